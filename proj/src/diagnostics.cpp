#include "helix/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace helix {

int sup_norm_order(double s, int d) {
    int r = static_cast<int>(std::floor(s - 0.5 * (d + 1)));
    return std::max(r, 0);
}

double l1_norm(const Field& f) {
    Field p = f;
    p.to_physical();
    double sum = 0.0;
    for (const cplx& v : p.data) sum += std::abs(v);
    return sum * p.box.volume() / static_cast<double>(p.data.size());
}

namespace {

// Spectral sum of weight(k) |c_k|^2 times the box volume.
template <typename W>
double weighted_l2(const Field& f, W weight) {
    Field g = f;
    g.to_spectral();
    const Box& b = g.box;
    double sum = 0.0;
    for (int i1 = 0; i1 < b.n1; ++i1) {
        double k1 = b.k1(i1);
        for (int i2 = 0; i2 < b.n2; ++i2) {
            double k2 = b.k2(i2);
            sum += weight(k1, k2) * std::norm(g.data[b.idx(i1, i2)]);
        }
    }
    return std::sqrt(sum * b.volume());
}

cplx ipow(cplx z, int a) {
    cplx r(1.0, 0.0);
    for (int j = 0; j < a; ++j) r *= z;
    return r;
}

// Sup norm of d^a f for one multi-index.
double deriv_sup(const Field& spectral_f, int a1, int a2) {
    Field g = spectral_f;
    const Box& b = g.box;
    const cplx I(0.0, 1.0);
    for (int i1 = 0; i1 < b.n1; ++i1) {
        cplx m1 = ipow(I * b.k1(i1), a1);
        for (int i2 = 0; i2 < b.n2; ++i2) {
            cplx m2 = ipow(I * b.k2(i2), a2);
            g.data[b.idx(i1, i2)] *= m1 * m2;
        }
    }
    return sup_abs(g);
}

}  // namespace

double h_s_norm(const Field& f, double s) {
    return weighted_l2(f, [s](double k1, double k2) {
        return std::pow(1.0 + k1 * k1 + k2 * k2, s);
    });
}

double grad_h_s_norm(const Field& f, double s) {
    return weighted_l2(f, [s](double k1, double k2) {
        double q = k1 * k1 + k2 * k2;
        return q * std::pow(1.0 + q, s);
    });
}

double w_s_inf_norm(const Field& f, int s) {
    Field g = f;
    g.to_spectral();
    double sum = 0.0;
    for (int a1 = 0; a1 <= s; ++a1) {
        int a2_max = f.box.d == 1 ? 0 : s - a1;
        for (int a2 = 0; a2 <= a2_max; ++a2) {
            if (a1 + a2 > s) continue;
            double v = deriv_sup(g, a1, a2);
            sum += v * v;
        }
    }
    return std::sqrt(sum);
}

double grad_w_s_inf_norm(const Field& f, int s) {
    Field g1 = derivative(f, 0);
    double v = w_s_inf_norm(g1, s);
    double sum = v * v;
    if (f.box.d == 2) {
        Field g2 = derivative(f, 1);
        double w = w_s_inf_norm(g2, s);
        sum += w * w;
    }
    return std::sqrt(sum);
}

NormReport norms(const Field& u, double s, double t) {
    NormReport r;
    r.t = t;
    r.L1 = l1_norm(u);
    r.L2 = l2_norm(u);
    r.Linf = sup_abs(u);
    r.Hs = h_s_norm(u, s);
    r.Ws_inf = w_s_inf_norm(u, sup_norm_order(s, u.box.d));
    r.sup_u = r.Linf;
    return r;
}

MSample m_sample(const Field& u, const Propagator& prop, double s,
                 double t) {
    Field low = prop.project_low(u);
    Field high = u;
    high.to_spectral();
    Field low_s = low;
    low_s.to_spectral();
    high -= low_s;

    MSample m;
    m.t = t;
    m.low_l2 = l2_norm(low);
    m.low_grad_hs = grad_h_s_norm(low, s);
    m.low_sup = sup_abs(low);
    m.low_grad_ws_inf = grad_w_s_inf_norm(low, static_cast<int>(s));
    m.high_hs = h_s_norm(high, s);
    m.high_hs1 = h_s_norm(high, s + 1.0);
    return m;
}

MFunctionals m_functionals(const std::vector<MSample>& series, double alpha,
                           int d, double c0) {
    MFunctionals out;
    out.c0 = c0;
    double memory = 0.0;  // int_0^t exp(-c0 a (t - tau)) |u_H|_{H^{s+1}}^2
    for (size_t j = 0; j < series.size(); ++j) {
        const MSample& m = series[j];
        if (j > 0) {
            const MSample& p = series[j - 1];
            double dt = m.t - p.t;
            double decay = std::exp(-c0 * alpha * dt);
            memory = decay * memory +
                     0.5 * dt *
                         (decay * p.high_hs1 * p.high_hs1 +
                          m.high_hs1 * m.high_hs1);
        }
        double w = 1.0 + alpha * m.t;
        double low = std::pow(w, 0.25 * d) * m.low_l2 +
                     std::pow(w, 0.25 * d + 0.5) * m.low_grad_hs +
                     std::pow(w, 0.5 * d) * m.low_sup +
                     std::pow(w, 0.5 * d + 0.5) * m.low_grad_ws_inf;
        double high = std::pow(w, 0.5 * d + 1.0) *
                      (m.high_hs + std::sqrt(alpha * memory));
        if (low > out.M_L) {
            out.M_L = low;
            out.t_arg_low = m.t;
        }
        if (high > out.M_H) {
            out.M_H = high;
            out.t_arg_high = m.t;
        }
    }
    out.M = out.M_L + out.M_H;
    return out;
}

DecayFit fit_decay(const std::vector<double>& times,
                   const std::vector<double>& values, double alpha) {
    require(times.size() == values.size(),
            "fit_decay: times and values differ in length");
    DecayFit fit;
    fit.n_points = static_cast<int>(times.size());
    if (fit.n_points < 4) return fit;
    for (double v : values)
        if (!(v > 0.0)) return fit;

    fit.t_lo = times.front();
    fit.t_hi = times.back();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t j = 0; j < times.size(); ++j) {
        double x = std::log(1.0 + alpha * times[j]);
        double y = std::log(values[j]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(times.size());
    double det = n * sxx - sx * sx;
    if (det <= 0.0) return fit;
    fit.exponent = (n * sxy - sx * sy) / det;
    double intercept = (sy - fit.exponent * sx) / n;
    fit.prefactor = std::exp(intercept);
    double rss = 0.0;
    for (size_t j = 0; j < times.size(); ++j) {
        double x = std::log(1.0 + alpha * times[j]);
        double r = std::log(values[j]) - intercept - fit.exponent * x;
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n);
    fit.ok = true;
    return fit;
}

DecayFit fit_decay_window(const std::vector<double>& times,
                          const std::vector<double>& values, double alpha,
                          double t_lo, double t_hi) {
    std::vector<double> t, v;
    for (size_t j = 0; j < times.size(); ++j) {
        if (times[j] < t_lo || times[j] > t_hi) continue;
        t.push_back(times[j]);
        v.push_back(values[j]);
    }
    return fit_decay(t, v, alpha);
}

namespace {

// Physical-space partial derivative of every component.
VecField grad_component(const VecField& n, int axis) {
    VecField g = n;
    for (int i = 0; i < 3; ++i) {
        g.c[i] = derivative(n.c[i], axis);
        g.c[i].to_physical();
    }
    return g;
}

}  // namespace

double bulk_identity_defect(const VecField& n) {
    const Box& b = n.c[0].box;
    VecField p = n;
    for (int i = 0; i < 3; ++i) p.c[i].to_physical();

    VecField d1 = grad_component(p, 0);
    VecField d2 = grad_component(p, 1);
    VecField cn = curl(p);
    for (int i = 0; i < 3; ++i) cn.c[i].to_physical();
    Field div(b, Space::physical);
    {
        Field a = derivative(p.c[0], 0);
        Field c = derivative(p.c[1], 1);
        a.to_physical();
        c.to_physical();
        for (size_t j = 0; j < div.data.size(); ++j)
            div.data[j] = a.data[j] + c.data[j];
    }

    // w = (n . grad) n - n (div n); its divergence carries the boundary
    // flux of the split.
    VecField w(b);
    for (int i = 0; i < 3; ++i) {
        w.c[i] = Field(b, Space::physical);
        for (size_t j = 0; j < w.c[i].data.size(); ++j) {
            cplx v = p.c[0].data[j] * d1.c[i].data[j] +
                     p.c[1].data[j] * d2.c[i].data[j] -
                     p.c[i].data[j] * div.data[j];
            w.c[i].data[j] = v;
        }
    }
    Field divw(b, Space::physical);
    {
        Field a = derivative(w.c[0], 0);
        Field c = derivative(w.c[1], 1);
        a.to_physical();
        c.to_physical();
        for (size_t j = 0; j < divw.data.size(); ++j)
            divw.data[j] = a.data[j] + c.data[j];
    }

    double sum = 0.0;
    for (size_t j = 0; j < p.c[0].data.size(); ++j) {
        double grad2 = 0.0, ncurl = 0.0, comp2 = 0.0;
        for (int i = 0; i < 3; ++i) {
            grad2 += std::norm(d1.c[i].data[j]) + std::norm(d2.c[i].data[j]);
            double ci = cn.c[i].data[j].real() + 0.5 * p.c[i].data[j].real();
            comp2 += ci * ci;
            ncurl += p.c[i].data[j].real() * cn.c[i].data[j].real();
        }
        double dv = div.data[j].real();
        double lhs = 0.5 * grad2 + 0.5 * ncurl;
        double rhs = 0.5 * (comp2 + dv * dv) - 0.125 +
                     0.5 * divw.data[j].real();
        sum += std::abs(lhs - rhs);
    }
    return sum / static_cast<double>(p.c[0].data.size());
}

EnergyReport energy_report(const Field& u, const FrameBasis& frame) {
    EnergyReport rep;
    const Box& b = u.box;

    VecField m = u_to_m(u, frame);
    VecField n = m;
    for (int i = 0; i < 3; ++i) {
        n.c[i].to_physical();
        Field h = frame.h.c[i];
        for (size_t j = 0; j < n.c[i].data.size(); ++j)
            n.c[i].data[j] += h.data[j];
    }
    VecField href = helical_state(b, 1.0);
    rep.total_relative_energy = energy(n) - energy(href);

    Field up = u;
    up.to_physical();
    Field au = apply_A_pseudospectral(up);
    rep.hessian_quadratic = 0.5 * inner(au, up).real();

    rep.bulk_identity_defect = bulk_identity_defect(n);

    if (b.n_per % 2 == 0) {
        VecField half = helical_state(b, 0.5);
        VecField ch = curl(half);
        double curl_sq = 0.0;
        for (int i = 0; i < 3; ++i) {
            ch.c[i].to_physical();
            Field r = ch.c[i];
            for (size_t j = 0; j < r.data.size(); ++j)
                r.data[j] += 0.5 * half.c[i].data[j];
            double v = l2_norm(r);
            curl_sq += v * v;
        }
        Field dh(b, Space::physical);
        {
            Field a = derivative(half.c[0], 0);
            Field c = derivative(half.c[1], 1);
            a.to_physical();
            c.to_physical();
            for (size_t j = 0; j < dh.data.size(); ++j)
                dh.data[j] = a.data[j] + c.data[j];
        }
        double vol = std::sqrt(b.volume());
        rep.half_state_curl_residual = std::sqrt(curl_sq) / vol;
        rep.half_state_div_residual = l2_norm(dh) / vol;
    } else {
        rep.half_state_curl_residual = -1.0;
        rep.half_state_div_residual = -1.0;
    }
    return rep;
}

}  // namespace helix
