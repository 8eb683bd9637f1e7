// Norm family, weighted functionals, decay fits, and the energy
// identities evaluated on closed-form and randomized fields.
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helix/diagnostics.hpp"

using namespace helix;

namespace {

Box dbox1(int n_per = 16, int n1 = 512) {
    Box b;
    b.d = 1;
    b.n_per = n_per;
    b.n1 = n1;
    b.validate();
    return b;
}

Box dbox2() {
    Box b;
    b.d = 2;
    b.n_per = 4;
    b.n1 = 64;
    b.n2 = 64;
    b.L2 = 24.0;
    b.validate();
    return b;
}

Field gaussian_1d(const Box& b, double sigma) {
    Field f(b, Space::physical);
    double l1 = b.L1(), xc = 0.5 * l1;
    double amp = 1.0 / std::sqrt(2.0 * PI * sigma * sigma);
    for (int i1 = 0; i1 < b.n1; ++i1) {
        double x = i1 * b.dx1() - xc;
        f.at(i1) = amp * std::exp(-0.5 * x * x / (sigma * sigma));
    }
    return f;
}

Field random_smooth(const Box& b, unsigned seed, double amp) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Field f(b, Space::spectral);
    int c1 = std::min(b.n1 / 16, 12), c2 = std::min(b.n2 / 16, 12);
    for (int i1 = 0; i1 < b.n1; ++i1) {
        int j1 = Box::signed_index(i1, b.n1);
        for (int i2 = 0; i2 < b.n2; ++i2) {
            int j2 = Box::signed_index(i2, b.n2);
            if (std::abs(j1) > c1 || (b.d == 2 && std::abs(j2) > c2))
                continue;
            double w = std::exp(-(j1 * j1 + j2 * j2) / 18.0);
            f.at(i1, i2) = w * cplx(dist(gen), dist(gen));
        }
    }
    f.to_physical();
    double s = sup_abs(f);
    if (s > 0.0) f *= cplx(amp / s, 0.0);
    return f;
}

}  // namespace

TEST_CASE("Gaussian norms match the closed forms") {
    Box b = dbox1();
    double sigma = 1.5;
    Field g = gaussian_1d(b, sigma);
    NormReport r = norms(g, 2.0);
    CHECK(std::abs(r.L1 - 1.0) < 1e-8);
    CHECK(std::abs(r.L2 - std::pow(4.0 * PI * sigma * sigma, -0.25)) < 1e-8);
    CHECK(std::abs(r.Linf - 1.0 / std::sqrt(2.0 * PI * sigma * sigma)) <
          1e-8);
    CHECK(r.sup_u == r.Linf);
    // H^0 is Plancherel-equal to L^2.
    CHECK(std::abs(h_s_norm(g, 0.0) - r.L2) < 1e-12 * r.L2);
}

TEST_CASE("interpolation sanity holds on random fields") {
    for (unsigned seed : {1u, 2u, 3u}) {
        for (int dim : {1, 2}) {
            Box b = dim == 1 ? dbox1(4, 128) : dbox2();
            Field f = random_smooth(b, seed, 0.7);
            NormReport r = norms(f, 2.0);
            CHECK(r.L2 <= std::sqrt(r.L1 * r.Linf) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("sup-norm derivative order follows the dimension rule") {
    CHECK(sup_norm_order(2.0, 1) == 1);
    CHECK(sup_norm_order(2.0, 2) == 0);
    CHECK(sup_norm_order(3.0, 2) == 1);
    CHECK(sup_norm_order(1.0, 2) == 0);
}

TEST_CASE("derivative sup norms on a pure mode") {
    Box b = dbox1(4, 128);
    Field f(b, Space::spectral);
    int j = 3;  // k = 3/4
    f.at(Box::storage_index(j, b.n1)) = cplx(1.0, 0.0);
    double k = 0.75;
    double want = 0.0;
    for (int a = 0; a <= 2; ++a) want += std::pow(k, 2 * a);
    CHECK(std::abs(w_s_inf_norm(f, 2) - std::sqrt(want)) < 1e-12);
    CHECK(std::abs(grad_w_s_inf_norm(f, 2) - k * std::sqrt(want)) < 1e-12);
    CHECK(std::abs(grad_h_s_norm(f, 0.0) - k * l2_norm(f)) < 1e-12);
}

TEST_CASE("decay fit recovers synthetic power laws") {
    std::vector<double> t, v;
    double alpha = 0.7;
    for (int j = 0; j < 12; ++j) {
        t.push_back(0.5 * std::pow(1.6, j));
        v.push_back(std::pow(1.0 + alpha * t.back(), -0.5));
    }
    DecayFit fit = fit_decay(t, v, alpha);
    CHECK(fit.ok);
    CHECK(std::abs(fit.exponent + 0.5) < 1e-12);
    CHECK(std::abs(fit.prefactor - 1.0) < 1e-12);
    CHECK(fit.residual < 1e-12);

    // Positive rescaling shifts only the prefactor.
    std::vector<double> w = v;
    for (double& x : w) x *= 7.25;
    DecayFit fit2 = fit_decay(t, w, alpha);
    CHECK(std::abs(fit2.exponent - fit.exponent) < 1e-13);
    CHECK(std::abs(fit2.prefactor - 7.25) < 1e-12);

    // Too few or nonpositive samples are rejected.
    std::vector<double> t3(t.begin(), t.begin() + 3);
    std::vector<double> v3(v.begin(), v.begin() + 3);
    CHECK_FALSE(fit_decay(t3, v3, alpha).ok);
    w[4] = 0.0;
    CHECK_FALSE(fit_decay(t, w, alpha).ok);

    DecayFit win = fit_decay_window(t, v, alpha, 1.0, 20.0);
    CHECK(win.ok);
    CHECK(win.t_lo >= 1.0);
    CHECK(win.t_hi <= 20.0);
}

TEST_CASE("weighted functionals: zero, single sample, memory integral") {
    MFunctionals z = m_functionals({}, 1.0, 1, 0.5);
    CHECK(z.M == 0.0);

    MSample one;
    one.t = 0.0;
    one.low_l2 = 0.1;
    one.low_grad_hs = 0.2;
    one.low_sup = 0.3;
    one.low_grad_ws_inf = 0.4;
    one.high_hs = 0.5;
    MFunctionals f1 = m_functionals({one}, 1.0, 2, 0.5);
    CHECK(f1.M_L == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f1.M_H == doctest::Approx(0.5).epsilon(1e-14));

    // The incremental memory integral agrees with a direct evaluation
    // of the same trapezoid sum.
    double alpha = 0.8, c0 = 0.4;
    std::vector<MSample> series;
    for (int j = 0; j <= 40; ++j) {
        MSample m;
        m.t = 0.13 * j;
        m.high_hs1 = std::exp(-0.3 * m.t) * (1.0 + 0.1 * std::sin(2.0 * j));
        series.push_back(m);
    }
    MFunctionals got = m_functionals(series, alpha, 2, c0);

    double best = 0.0;
    for (size_t j = 0; j < series.size(); ++j) {
        double tj = series[j].t, I = 0.0;
        for (size_t i = 0; i + 1 <= j; ++i) {
            double a = series[i].t, bmid = series[i + 1].t;
            double ga = series[i].high_hs1, gb = series[i + 1].high_hs1;
            I += 0.5 * (bmid - a) *
                 (std::exp(-c0 * alpha * (tj - a)) * ga * ga +
                  std::exp(-c0 * alpha * (tj - bmid)) * gb * gb);
        }
        double val = std::pow(1.0 + alpha * tj, 2.0) * std::sqrt(alpha * I);
        best = std::max(best, val);
    }
    CHECK(got.M_H == doctest::Approx(best).epsilon(1e-12));

    // Running suprema never decrease when the series is extended.
    std::vector<MSample> prefix(series.begin(), series.begin() + 20);
    MFunctionals part = m_functionals(prefix, alpha, 2, c0);
    CHECK(part.M <= got.M * (1.0 + 1e-14));
}

TEST_CASE("energy report: zero perturbation and the half-pitch state") {
    Box b = dbox2();
    FrameBasis fr(b);
    Field zero(b, Space::physical);
    EnergyReport rep = energy_report(zero, fr);
    CHECK(std::abs(rep.total_relative_energy) < 1e-12);
    CHECK(std::abs(rep.hessian_quadratic) < 1e-14);
    CHECK(rep.bulk_identity_defect < 1e-12);
    CHECK(rep.half_state_curl_residual >= 0.0);
    CHECK(rep.half_state_curl_residual < 1e-12);
    CHECK(rep.half_state_div_residual < 1e-12);
}

TEST_CASE("bulk density split is an identity for unit fields") {
    Box b = dbox2();
    FrameBasis fr(b);
    for (unsigned seed : {4u, 5u}) {
        Field u = random_smooth(b, seed, 0.4);
        VecField m = u_to_m(u, fr);
        VecField n = m;
        for (int i = 0; i < 3; ++i)
            for (size_t j = 0; j < n.c[i].data.size(); ++j)
                n.c[i].data[j] += fr.h.c[i].data[j];
        CHECK(bulk_identity_defect(n) < 1e-10);
    }
}

TEST_CASE("relative energy approaches the quadratic form") {
    Box b = dbox2();
    FrameBasis fr(b);
    Field phi = random_smooth(b, 6u, 1.0);
    for (double amp : {1e-2, 1e-3}) {
        Field u = phi;
        u *= cplx(amp, 0.0);
        EnergyReport rep = energy_report(u, fr);
        double ratio = rep.total_relative_energy / rep.hessian_quadratic;
        double tol = amp == 1e-2 ? 0.1 : 0.01;
        CHECK(std::abs(ratio - 1.0) < tol);
    }
}

TEST_CASE("low/high sample splits cleanly on a low-mode field") {
    Box b = dbox1(4, 128);
    Propagator prop(b, 1.0);
    Field f(b, Space::spectral);
    f.at(Box::storage_index(2, b.n1)) = cplx(0.3, -0.1);  // k = 1/2
    MSample m = m_sample(f, prop, 2.0, 1.5);
    CHECK(m.t == 1.5);
    CHECK(m.low_l2 == doctest::Approx(l2_norm(f)).epsilon(1e-13));
    CHECK(m.high_hs == 0.0);
    CHECK(m.high_hs1 == 0.0);
}
