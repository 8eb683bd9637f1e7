#include "helix/evolve.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "helix/util.hpp"

namespace helix {

namespace {

// Explicit part of the m-form flow: the full right-hand side minus the
// stiff diffusion alpha Lap m that the scheme treats implicitly (the
// optional beta Lap^2 m never appears here; it lives entirely in the
// implicit denominator). Returned spectral and dealiased.
VecField explicit_part(const VecField& m, const FrameBasis& frame, double alpha) {
    VecField lap = vec_laplacian(m);
    lap.to_physical();
    VecField out = rhs_m(m, frame, alpha);
    for (int c = 0; c < 3; ++c) {
        cplx* o = out.c[c].data.data();
        const cplx* l = lap.c[c].data.data();
        const size_t sz = out.c[c].data.size();
        for (size_t i = 0; i < sz; ++i) o[i] -= alpha * l[i];
    }
    out.to_spectral();
    dealias(out);
    return out;
}

// Applies fn(component, flat index, |k|^2) over all spectral slots.
template <class F>
void for_modes(const Box& b, F&& fn) {
    for (int c = 0; c < 3; ++c) {
        for (int i1 = 0; i1 < b.n1; ++i1) {
            const double k1 = b.k1(i1);
            for (int i2 = 0; i2 < b.n2; ++i2) {
                const double k2 = b.k2(i2);
                fn(c, static_cast<size_t>(b.idx(i1, i2)), k1 * k1 + k2 * k2);
            }
        }
    }
}

// Shared m-form step; the plain and regularized schemes differ only in
// the beta fed into the implicit denominator. Two-step backward
// differentiation once history exists, an implicit Euler predictor with
// a trapezoidal corrector to start. The new level is checked against
// the unit-sphere constraint before renormalization so a drifting run
// is caught rather than silently projected back.
bool step_m_form(SimState& st, const SimConfig& cfg, const FrameBasis& frame,
                 double beta) {
    const Box& b = st.m.box();
    const double h = cfg.dt;
    const double al = cfg.alpha;

    VecField cur = st.m;
    cur.to_spectral();
    VecField ncur = explicit_part(st.m, frame, al);

    VecField next(b, Space::spectral);
    if (!st.have_history) {
        VecField pred(b, Space::spectral);
        for_modes(b, [&](int c, size_t i, double q) {
            const double den = 1.0 + h * (al * q + beta * q * q);
            pred.c[c].data[i] = (cur.c[c].data[i] + h * ncur.c[c].data[i]) / den;
        });
        VecField npred = explicit_part(pred, frame, al);
        for_modes(b, [&](int c, size_t i, double q) {
            const double half = 0.5 * h * (al * q + beta * q * q);
            next.c[c].data[i] = ((1.0 - half) * cur.c[c].data[i] +
                                 0.5 * h * (ncur.c[c].data[i] + npred.c[c].data[i])) /
                                (1.0 + half);
        });
    } else {
        for_modes(b, [&](int c, size_t i, double q) {
            const double den = 1.5 + h * (al * q + beta * q * q);
            next.c[c].data[i] = (2.0 * cur.c[c].data[i] - 0.5 * st.m_prev.c[c].data[i] +
                                 h * (2.0 * ncur.c[c].data[i] - st.rhs_prev.c[c].data[i])) /
                                den;
        });
    }
    dealias(next);
    next.to_physical();

    const size_t sz = next.c[0].data.size();
    double defect = 0.0;
    for (size_t i = 0; i < sz; ++i) {
        double r2 = 0.0;
        for (int c = 0; c < 3; ++c)
            r2 += std::norm(frame.h.c[c].data[i] + next.c[c].data[i]);
        const double dev = std::abs(std::sqrt(r2) - 1.0);
        if (!(dev <= defect)) defect = dev;  // keeps NaN sticky
    }
    if (!(defect <= 1e-6)) return false;

    for (size_t i = 0; i < sz; ++i) {
        double r2 = 0.0;
        cplx n[3];
        for (int c = 0; c < 3; ++c) {
            n[c] = frame.h.c[c].data[i] + next.c[c].data[i];
            r2 += std::norm(n[c]);
        }
        const double inv = 1.0 / std::sqrt(r2);
        for (int c = 0; c < 3; ++c)
            next.c[c].data[i] = n[c] * inv - frame.h.c[c].data[i];
    }

    st.m_prev = std::move(cur);
    st.rhs_prev = std::move(ncur);
    st.have_history = true;
    st.m = std::move(next);
    st.t += h;
    st.step_count += 1;

    Field u = m_to_u(st.m, frame);
    const double sup = sup_abs(u);
    if (!(sup <= st.max_u_sup_seen)) st.max_u_sup_seen = sup;
    return true;
}

}  // namespace

Scheme scheme_from_name(const std::string& name) {
    if (name == "etd-u") return Scheme::etd_u;
    if (name == "imex-m") return Scheme::imex_m;
    if (name == "regularized-m") return Scheme::regularized_m;
    require(false, "sim: unknown scheme '" + name + "'");
    return Scheme::etd_u;
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::etd_u: return "etd-u";
        case Scheme::imex_m: return "imex-m";
        case Scheme::regularized_m: return "regularized-m";
    }
    return "?";
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::smallness_violated: return "smallness-violated";
        case Termination::constraint_violated: return "constraint-violated";
        case Termination::wraparound: return "wraparound";
    }
    return "?";
}

Box SimConfig::box() const {
    Box b;
    b.d = d;
    b.n_per = n_per;
    b.n1 = n1;
    b.n2 = d == 1 ? 1 : n2;
    b.L2 = d == 1 ? 0.0 : L2;
    return b;
}

void SimConfig::validate() const {
    box().validate();
    require(alpha > 0.0, "sim: alpha must be positive");
    require(dt > 0.0, "sim: dt must be positive");
    require(t_end > 0.0, "sim: t_end must be positive");
    const double n = std::round(t_end / dt);
    require(n >= 1.0 && std::abs(n * dt - t_end) <= 1e-6 * dt,
            "sim: t_end must be an integer number of steps");
    require(beta >= 0.0, "sim: beta must be nonnegative");
    require(scheme == Scheme::regularized_m || beta == 0.0,
            "sim: beta requires the regularized scheme");
    require(s >= 0.0, "sim: s must be nonnegative");
    require(snapshot_stride >= 1, "sim: snapshot_stride must be at least 1");
    require(chi.inner > 0.0 && chi.outer >= chi.inner,
            "sim: malformed frequency cutoff");
}

Field gaussian_chart_data(const Box& box, double amplitude, double sigma,
                          bool mean_zero) {
    box.validate();
    require(amplitude >= 0.0, "gaussian: amplitude must be nonnegative");
    require(sigma > 0.0, "gaussian: width must be positive");

    const double c1 = 0.5 * box.L1();
    const double c2 = box.d == 2 ? 0.5 * box.L2 : 0.0;
    auto bump = [&](double w1, double w2) {
        Field f(box);
        for (int i1 = 0; i1 < box.n1; ++i1) {
            const double d1 = i1 * box.dx1() - c1;
            const double g1 = std::exp(-0.5 * d1 * d1 / (w1 * w1));
            for (int i2 = 0; i2 < box.n2; ++i2) {
                double g = g1;
                if (box.d == 2) {
                    const double d2 = i2 * box.dx2() - c2;
                    g *= std::exp(-0.5 * d2 * d2 / (w2 * w2));
                }
                f.at(i1, i2) = amplitude * g;
            }
        }
        return f;
    };

    Field g = bump(sigma, sigma);
    g.to_spectral();
    if (mean_zero) g.at(0, 0) = cplx(0.0, 0.0);
    return g;
}

double edge_mass_fraction(const Field& u) {
    const Box& b = u.box;
    Field g1 = derivative(u, 0);
    g1.to_physical();
    Field g2;
    if (b.d == 2) {
        g2 = derivative(u, 1);
        g2.to_physical();
    }
    double total = 0.0, strip = 0.0;
    for (int i1 = 0; i1 < b.n1; ++i1) {
        const double x1 = i1 * b.dx1();
        const bool e1 = x1 < 0.05 * b.L1() || x1 >= 0.95 * b.L1();
        for (int i2 = 0; i2 < b.n2; ++i2) {
            bool edge = e1;
            if (b.d == 2) {
                const double x2 = i2 * b.dx2();
                edge = edge || x2 < 0.05 * b.L2 || x2 >= 0.95 * b.L2;
            }
            double a = std::abs(g1.at(i1, i2));
            if (b.d == 2) a = std::hypot(a, std::abs(g2.at(i1, i2)));
            total += a;
            if (edge) strip += a;
        }
    }
    // A field at rounding level (for example residue of the helical
    // background passing through transforms) spreads uniformly and has no
    // localization to measure; report it as empty rather than as wrapped.
    if (total <= 1e-13 * double(b.n1) * double(b.n2)) return 0.0;
    return strip / total;
}

bool step_etd_u(SimState& st, const SimConfig& cfg, const Propagator& prop) {
    const double sup = sup_abs(st.u);
    if (!(sup <= st.max_u_sup_seen)) st.max_u_sup_seen = sup;
    if (!(sup <= 0.5)) return false;

    const double h = cfg.dt;
    Field f0 = rhs_u_nonlinear(st.u, cfg.alpha);
    dealias(f0);
    Field stage = prop.duhamel(st.u, f0, f0, h);
    Field f1 = rhs_u_nonlinear(stage, cfg.alpha);
    dealias(f1);
    Field u1 = stage + cplx(h, 0.0) * prop.apply_phi2(f1 - f0, h);
    dealias(u1);
    st.u = std::move(u1);
    st.t += h;
    st.step_count += 1;
    return true;
}

bool step_imex_m(SimState& st, const SimConfig& cfg, const FrameBasis& frame) {
    return step_m_form(st, cfg, frame, 0.0);
}

bool step_regularized_m(SimState& st, const SimConfig& cfg,
                        const FrameBasis& frame) {
    return step_m_form(st, cfg, frame, cfg.beta);
}

RunRecord evolve(const SimConfig& cfg, const Field& u0) {
    cfg.validate();
    const Box b = cfg.box();
    require(u0.box.d == b.d && u0.box.n_per == b.n_per && u0.box.n1 == b.n1 &&
                u0.box.n2 == b.n2 && u0.box.L2 == b.L2,
            "evolve: initial data on the wrong grid");

    const Propagator prop(b, cfg.alpha, cfg.chi);
    const FrameBasis frame(b);
    const double e_ref = energy(helical_state(b, 1.0));
    const bool chart = cfg.scheme == Scheme::etd_u;

    RunRecord rec;
    rec.config = cfg;

    SimState st;
    Field u0d = u0;
    dealias(u0d);
    if (chart) {
        st.u = std::move(u0d);
    } else {
        st.m = u_to_m(u0d, frame);
    }

    // Samples the current state: norms of the chart field, the low/high
    // split sample, and the relative energy. Returns the boundary mass
    // fraction so the caller can spot wraparound.
    auto snapshot = [&]() {
        Field u = chart ? st.u : m_to_u(st.m, frame);
        NormReport nr = norms(u, cfg.s, st.t);
        rec.series.push_back(nr);
        rec.msamples.push_back(m_sample(u, prop, cfg.s, st.t));
        double de = std::numeric_limits<double>::quiet_NaN();
        if (!chart) {
            de = energy(frame.h + st.m) - e_ref;
        } else if (nr.sup_u < 1.0) {
            de = energy(frame.h + u_to_m(u, frame)) - e_ref;
        }
        rec.energy.push_back(de);
        return edge_mass_fraction(u);
    };

    Termination term = Termination::completed;
    if (snapshot() > 1e-6) term = Termination::wraparound;

    const long n_steps = std::lround(cfg.t_end / cfg.dt);
    for (long j = 1; term == Termination::completed && j <= n_steps; ++j) {
        bool ok = false;
        switch (cfg.scheme) {
            case Scheme::etd_u: ok = step_etd_u(st, cfg, prop); break;
            case Scheme::imex_m: ok = step_imex_m(st, cfg, frame); break;
            case Scheme::regularized_m: ok = step_regularized_m(st, cfg, frame); break;
        }
        if (!ok) {
            term = chart ? Termination::smallness_violated
                         : Termination::constraint_violated;
            break;
        }
        if (st.max_u_sup_seen > 0.5) {
            term = Termination::smallness_violated;
            break;
        }
        if (j % cfg.snapshot_stride == 0 || j == n_steps) {
            if (snapshot() > 1e-6) term = Termination::wraparound;
        }
    }

    rec.termination = term;
    rec.t_final = st.t;
    rec.max_u_sup_seen = st.max_u_sup_seen;
    rec.u_final = chart ? st.u : m_to_u(st.m, frame);
    const double floor = prop.high_spectral_floor();
    rec.functionals =
        m_functionals(rec.msamples, cfg.alpha, cfg.d, floor / (1.0 + floor));
    return rec;
}

}  // namespace helix
