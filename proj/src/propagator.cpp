#include "helix/propagator.hpp"

#include <cmath>

namespace helix {

namespace {

// Exponential integrator weights. The direct quotients lose accuracy to
// cancellation for small arguments, so a degree-8 Taylor polynomial
// takes over below |z| = 0.05; both branches then agree to ~1e-14.
cplx phi1_scalar(cplx z) {
    if (std::abs(z) < 0.05) {
        cplx s(1.0 / 362880.0, 0.0);
        const double inv[] = {1.0 / 40320.0, 1.0 / 5040.0, 1.0 / 720.0,
                              1.0 / 120.0,   1.0 / 24.0,   1.0 / 6.0,
                              1.0 / 2.0,     1.0};
        for (double c : inv) s = s * z + c;
        return s;
    }
    return (std::exp(z) - 1.0) / z;
}

cplx phi2_scalar(cplx z) {
    if (std::abs(z) < 0.05) {
        cplx s(1.0 / 3628800.0, 0.0);
        const double inv[] = {1.0 / 362880.0, 1.0 / 40320.0, 1.0 / 5040.0,
                              1.0 / 720.0,    1.0 / 120.0,   1.0 / 24.0,
                              1.0 / 6.0,      1.0 / 2.0};
        for (double c : inv) s = s * z + c;
        return s;
    }
    return (std::exp(z) - 1.0 - z) / (z * z);
}

}  // namespace

double CutoffProfile::operator()(double s) const {
    if (inner >= outer) return s <= inner ? 1.0 : 0.0;
    return smoothstep((outer - s) / (outer - inner));
}

Propagator::Propagator(const Box& box, double alpha, CutoffProfile chi)
    : box_(box), alpha_(alpha), chi_(chi) {
    box_.validate();
    require(box_.ladder() % 2 == 0,
            "propagator: ladder n1 / n_per must be even");
    require(chi_.inner > 0.0 && chi_.outer >= chi_.inner,
            "propagator: cutoff radii must satisfy 0 < inner <= outer");
    int p = box_.ladder();
    int k_lo = -(p / 2);
    std::int64_t n_fibers = static_cast<std::int64_t>(box_.n_per) * box_.n2;
    fibers_.resize(static_cast<size_t>(n_fibers));
    parallel_for(n_fibers, [&](std::int64_t fi) {
        int r = static_cast<int>(fi) / box_.n2;
        int i2 = static_cast<int>(fi) % box_.n2;
        BlochWavenumber xi;
        xi.d = box_.d;
        xi.xi1 = box_.xi1_of_fiber(r);
        xi.xi2 = box_.k2(i2);
        auto op = assemble_operator_window(xi, k_lo, k_lo + p - 1);
        std::vector<double> off(static_cast<size_t>(p - 1), op.step.real());
        auto eig = sym_tridiag_eigen(op.diag, off, p, p);
        FiberEigen& fe = fibers_[static_cast<size_t>(fi)];
        fe.lambda = std::move(eig.values);
        fe.vec.resize(static_cast<size_t>(p) * p);
        for (int n = 0; n < p; ++n)
            for (int j = 0; j < p; ++j)
                fe.vec[static_cast<size_t>(n) * p + j] = eig.vectors[n][j];
    });
}

const FiberEigen& Propagator::fiber(int r, int i2) const {
    return fibers_[static_cast<size_t>(r) * box_.n2 + i2];
}

double Propagator::star_radius(int r, int i2) const {
    double x1 = box_.xi1_of_fiber(r);
    return std::hypot(std::min(x1, 1.0 - x1), box_.k2(i2));
}

Field Propagator::apply_A(const Field& f) const {
    Field g = f;
    g.to_spectral();
    Field out(box_, Space::spectral);
    int p = box_.ladder();
    int k_lo = -(p / 2);
    std::int64_t n_fibers = static_cast<std::int64_t>(box_.n_per) * box_.n2;
    parallel_for(n_fibers, [&](std::int64_t fi) {
        int r = static_cast<int>(fi) / box_.n2;
        int i2 = static_cast<int>(fi) % box_.n2;
        double x1 = box_.xi1_of_fiber(r);
        double x2 = box_.k2(i2);
        double step = box_.d == 2 ? -0.5 * x2 : 0.0;
        std::vector<cplx> v(static_cast<size_t>(p));
        for (int j = 0; j < p; ++j)
            v[j] = g.data[g.box.idx(box_.i1_of_fiber(r, k_lo + j), i2)];
        for (int j = 0; j < p; ++j) {
            double k = k_lo + j + x1;
            cplx w = (k * k + x2 * x2) * v[j];
            if (j > 0) w += step * v[j - 1];
            if (j + 1 < p) w += step * v[j + 1];
            out.data[out.box.idx(box_.i1_of_fiber(r, k_lo + j), i2)] = w;
        }
    });
    return out;
}

template <class G>
Field Propagator::eigen_apply(const Field& f, G&& factor) const {
    Field g = f;
    g.to_spectral();
    Field out(box_, Space::spectral);
    int p = box_.ladder();
    int k_lo = -(p / 2);
    std::int64_t n_fibers = static_cast<std::int64_t>(box_.n_per) * box_.n2;
    parallel_for(n_fibers, [&](std::int64_t fi) {
        int r = static_cast<int>(fi) / box_.n2;
        int i2 = static_cast<int>(fi) % box_.n2;
        const FiberEigen& fe = fibers_[static_cast<size_t>(fi)];
        std::vector<cplx> v(static_cast<size_t>(p)), w(static_cast<size_t>(p));
        for (int j = 0; j < p; ++j)
            v[j] = g.data[g.box.idx(box_.i1_of_fiber(r, k_lo + j), i2)];
        for (int n = 0; n < p; ++n) {
            cplx acc(0.0, 0.0);
            const double* row = fe.vec.data() + static_cast<size_t>(n) * p;
            for (int j = 0; j < p; ++j) acc += row[j] * v[j];
            w[n] = factor(fe.lambda[n], n, static_cast<int>(fi)) * acc;
        }
        for (int j = 0; j < p; ++j) {
            cplx acc(0.0, 0.0);
            for (int n = 0; n < p; ++n)
                acc += fe.vec[static_cast<size_t>(n) * p + j] * w[n];
            out.data[out.box.idx(box_.i1_of_fiber(r, k_lo + j), i2)] = acc;
        }
    });
    return out;
}

Field Propagator::apply_semigroup(const Field& f, double t) const {
    cplx lt = t * cplx(-alpha_, 1.0);
    return eigen_apply(f, [lt](double lam, int, int) { return std::exp(lt * lam); });
}

Field Propagator::apply_phi1(const Field& f, double h) const {
    cplx lh = h * cplx(-alpha_, 1.0);
    return eigen_apply(f, [lh](double lam, int, int) { return phi1_scalar(lh * lam); });
}

Field Propagator::apply_phi2(const Field& f, double h) const {
    cplx lh = h * cplx(-alpha_, 1.0);
    return eigen_apply(f, [lh](double lam, int, int) { return phi2_scalar(lh * lam); });
}

Field Propagator::duhamel(const Field& u0, const Field& f0, const Field& f1,
                          double h) const {
    // exp(hL) u0 + h phi1(hL) f0 + h phi2(hL) (f1 - f0), the exponential
    // trapezoidal rule.
    Field df = f1;
    df.to_spectral();
    Field f0s = f0;
    f0s.to_spectral();
    df -= f0s;
    Field out = apply_semigroup(u0, h);
    out += cplx(h, 0.0) * apply_phi1(f0s, h);
    out += cplx(h, 0.0) * apply_phi2(df, h);
    return out;
}

Field Propagator::project_low(const Field& f) const {
    if (box_.d == 1) {
        // A is the plain second derivative here, so the low cutoff acts
        // on ordinary wavenumbers with the same radial profile.
        Field out = f;
        out.to_spectral();
        for (int i1 = 0; i1 < box_.n1; ++i1) {
            double c = chi_(std::abs(box_.k1(i1)));
            out.data[out.box.idx(i1, 0)] *= c;
        }
        return out;
    }
    return eigen_apply(f, [this](double, int n, int fi) {
        if (n != 0) return 0.0;
        int r = fi / box_.n2, i2 = fi % box_.n2;
        return chi_(star_radius(r, i2));
    });
}

Field Propagator::project_high(const Field& f) const {
    Field g = f;
    g.to_spectral();
    Field out = project_low(g);
    out *= cplx(-1.0, 0.0);
    out += g;
    return out;
}

Field Propagator::sobolev_A(const Field& f, double s) const {
    double half = 0.5 * s;
    return eigen_apply(f, [half](double lam, int, int) {
        return std::pow(std::max(1.0 + lam, 1e-300), half);
    });
}

double Propagator::high_spectral_floor() const {
    if (box_.d == 1) {
        double best = -1.0;
        for (int i1 = 0; i1 < box_.n1; ++i1) {
            double k = std::abs(box_.k1(i1));
            if (k <= chi_.inner + 1e-12) continue;
            if (best < 0.0 || k * k < best) best = k * k;
        }
        require(best >= 0.0, "propagator: high range is empty");
        return best;
    }
    double best = -1.0;
    auto consider = [&best](double lam) {
        if (best < 0.0 || lam < best) best = lam;
    };
    for (int r = 0; r < box_.n_per; ++r) {
        for (int i2 = 0; i2 < box_.n2; ++i2) {
            const FiberEigen& fe = fiber(r, i2);
            if (fe.lambda.size() > 1) consider(fe.lambda[1]);
            if (chi_(star_radius(r, i2)) < 1.0 - 1e-14) consider(fe.lambda[0]);
        }
    }
    require(best >= 0.0, "propagator: high range is empty");
    return best;
}

}  // namespace helix
