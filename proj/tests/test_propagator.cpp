// Fiber cache identities: banded operator, exact semigroup, exponential
// integrator weights, low/high projections, and the high-range floor.
#include <doctest.h>

#include <cmath>
#include <random>

#include "helix/frame.hpp"
#include "helix/propagator.hpp"

using namespace helix;

namespace {

Box pbox1() {
    Box b;
    b.d = 1;
    b.n_per = 4;
    b.n1 = 64;
    b.validate();
    return b;
}

Box pbox2() {
    Box b;
    b.d = 2;
    b.n_per = 8;
    b.n1 = 64;
    b.n2 = 32;
    b.L2 = 32.0;
    b.validate();
    return b;
}

Field random_dealiased(const Box& b, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Field f(b, Space::spectral);
    for (int i1 = 0; i1 < b.n1; ++i1) {
        int j1 = Box::signed_index(i1, b.n1);
        for (int i2 = 0; i2 < b.n2; ++i2) {
            int j2 = Box::signed_index(i2, b.n2);
            if (std::abs(j1) > dealias_radius(b.n1)) continue;
            if (b.d == 2 && std::abs(j2) > dealias_radius(b.n2)) continue;
            f.at(i1, i2) = cplx(dist(gen), dist(gen));
        }
    }
    return f;
}

double rel(const Field& got, const Field& want) {
    Field g = got, w = want;
    g.to_spectral();
    w.to_spectral();
    return l2_norm(g - w) / std::max(l2_norm(w), 1e-300);
}

// Single-fiber band vector as a grid field.
Field band_mode(const Propagator& P, int r, int i2, int band) {
    Field f(P.box(), Space::spectral);
    const FiberEigen& fe = P.fiber(r, i2);
    int p = P.ladder(), k_lo = -(p / 2);
    for (int j = 0; j < p; ++j)
        f.at(P.box().i1_of_fiber(r, k_lo + j), i2) =
            fe.vec[static_cast<size_t>(band) * p + j];
    return f;
}

// Reference phi weights by plain series summation.
cplx phi_ref(cplx z, int which) {
    cplx sum(0.0, 0.0), term(1.0, 0.0);
    double fact = which == 1 ? 1.0 : 2.0;
    for (int j = 0; j < 40; ++j) {
        sum += term / fact;
        term *= z;
        fact *= which + j + 1;
    }
    return sum;
}

}  // namespace

TEST_CASE("banded operator matches the pseudospectral application") {
    for (int dim : {1, 2}) {
        Box b = dim == 1 ? pbox1() : pbox2();
        Propagator P(b, 1.0);
        Field f = random_dealiased(b, 7u);
        Field got = P.apply_A(f);
        Field want = apply_A_pseudospectral(f);
        CHECK(rel(got, want) < 1e-12);
    }
}

TEST_CASE("semigroup agrees with the Taylor series of the banded operator") {
    Box b = pbox2();
    const double alpha = 0.8, h = 0.01;
    Propagator P(b, alpha);
    Field f = random_dealiased(b, 8u);
    Field got = P.apply_semigroup(f, h);

    Field term = f, sum = f;
    cplx lh = h * cplx(-alpha, 1.0);
    double fact = 1.0;
    for (int j = 1; j <= 14; ++j) {
        term = lh * P.apply_A(term);
        fact *= j;
        sum += cplx(1.0 / fact, 0.0) * term;
    }
    CHECK(rel(got, sum) < 1e-12);
}

TEST_CASE("semigroup identity, composition law, and a pure mode") {
    Box b = pbox1();
    Propagator P(b, 1.0);
    Field f = random_dealiased(b, 9u);
    CHECK(rel(P.apply_semigroup(f, 0.0), f) < 1e-15);

    Field two = P.apply_semigroup(P.apply_semigroup(f, 0.3), 0.7);
    Field one = P.apply_semigroup(f, 1.0);
    CHECK(rel(two, one) < 1e-13);

    // k1 = 5/4 evolves by exp(t(-1+i) 25/16) exactly.
    Field mode(b, Space::spectral);
    int i1 = Box::storage_index(5, b.n1);
    mode.at(i1) = cplx(1.0, 0.0);
    Field ev = P.apply_semigroup(mode, 2.0);
    cplx want = std::exp(2.0 * cplx(-1.0, 1.0) * (25.0 / 16.0));
    CHECK(std::abs(ev.at(i1) - want) < 1e-14);
    ev.at(i1) = cplx(0.0, 0.0);
    CHECK(l2_norm(ev) < 1e-14);
}

TEST_CASE("duhamel weights reproduce the series phi functions") {
    Box b = pbox1();
    const double alpha = 1.0;
    Propagator P(b, alpha);
    // Pure modes hit both the small-argument branch and the quotient.
    for (int j : {1, 3, 10}) {
        for (double h : {1e-4, 0.05, 0.8}) {
            Field mode(b, Space::spectral);
            int i1 = Box::storage_index(j, b.n1);
            mode.at(i1) = cplx(1.0, 0.0);
            double lam = std::pow(j / 4.0, 2);
            cplx z = h * cplx(-alpha, 1.0) * lam;

            Field zero(b, Space::spectral);
            Field got = P.duhamel(zero, mode, mode, h);
            cplx want = h * phi_ref(z, 1);
            CHECK(std::abs(got.at(i1) - want) <= 1e-13 * std::abs(want));

            // Linear-in-time forcing isolates phi2.
            Field got2 = P.duhamel(zero, zero, mode, h);
            cplx want2 = h * phi_ref(z, 2);
            CHECK(std::abs(got2.at(i1) - want2) <= 1e-13 * std::abs(want2));
        }
    }
}

TEST_CASE("duhamel is exact for a constant-forced pure mode") {
    Box b = pbox1();
    Propagator P(b, 0.6);
    Field mode(b, Space::spectral);
    int i1 = Box::storage_index(8, b.n1);
    mode.at(i1) = cplx(0.3, -0.4);
    double lam = 4.0;
    cplx L = cplx(-0.6, 1.0) * lam;
    double h = 0.7;
    Field u0(b, Space::spectral);
    u0.at(i1) = cplx(1.0, 0.25);
    Field got = P.duhamel(u0, mode, mode, h);
    cplx want = std::exp(L * h) * u0.at(i1) +
                (std::exp(L * h) - 1.0) / L * mode.at(i1);
    CHECK(std::abs(got.at(i1) - want) < 1e-13);
}

TEST_CASE("projections: partition, commutation, idempotency bounds") {
    Box b = pbox2();
    Propagator P(b, 1.0);
    Field f = random_dealiased(b, 10u);
    Field lo = P.project_low(f);
    Field hi = P.project_high(f);
    Field back = lo;
    back += hi;
    CHECK(rel(back, f) < 1e-15);

    Field a = P.project_low(P.apply_semigroup(f, 0.4));
    Field c = P.apply_semigroup(P.project_low(f), 0.4);
    CHECK(rel(a, c) < 1e-13);

    // The ramp makes Q_L only approximately idempotent; the defect is
    // bounded by max chi (1 - chi) = 1/4.
    Field twice = P.project_low(lo);
    Field diff = twice - lo;
    CHECK(l2_norm(diff) <= 0.25 * l2_norm(f) * (1.0 + 1e-12));

    CutoffProfile sharp;
    sharp.inner = sharp.outer = 1.0;
    Propagator Ps(b, 1.0, sharp);
    Field slo = Ps.project_low(f);
    CHECK(rel(Ps.project_low(slo), slo) < 1e-13);
}

TEST_CASE("low projection keeps band 0 inside the core and kills band 1") {
    Box b = pbox2();
    Propagator P(b, 1.0);
    // r = 2, i2 = 1: xi1 = 1/4, xi2 = 2 pi / 32, well inside the core.
    REQUIRE(P.star_radius(2, 1) < 1.0);
    Field b0 = band_mode(P, 2, 1, 0);
    CHECK(rel(P.project_low(b0), b0) < 1e-13);
    Field b1 = band_mode(P, 2, 1, 1);
    CHECK(l2_norm(P.project_low(b1)) < 1e-13 * l2_norm(b1));
    // Outside the outer radius even band 0 belongs to the high range.
    int far = b.n2 / 2;  // Nyquist row, |xi2| = pi
    REQUIRE(P.star_radius(2, far) > P.cutoff().outer);
    Field f0 = band_mode(P, 2, far, 0);
    CHECK(l2_norm(P.project_low(f0)) < 1e-13 * l2_norm(f0));
}

TEST_CASE("high range decays no slower than the spectral floor") {
    for (int dim : {1, 2}) {
        Box b = dim == 1 ? pbox1() : pbox2();
        const double alpha = 0.9;
        Propagator P(b, alpha);
        double floor_ = P.high_spectral_floor();
        if (dim == 1) {
            // Smallest |k1| beyond the sharp radius 1 is 5/4.
            CHECK(floor_ == doctest::Approx(25.0 / 16.0).epsilon(1e-14));
        } else {
            // The (1/2, 0) fiber carries the exactly degenerate pair 1/4.
            CHECK(floor_ == doctest::Approx(0.25).epsilon(1e-12));
        }
        Field f = random_dealiased(b, 11u + static_cast<unsigned>(dim));
        Field vh = P.project_high(f);
        double n0 = l2_norm(vh);
        for (double t : {0.5, 2.0, 10.0}) {
            double nt = l2_norm(P.apply_semigroup(vh, t));
            CHECK(nt <= std::exp(-alpha * floor_ * t) * n0 * (1.0 + 1e-11));
        }
    }
}

TEST_CASE("operator-adapted Sobolev weight") {
    Box b1 = pbox1();
    Propagator P1(b1, 1.0);
    Field f = random_dealiased(b1, 12u);
    // d = 1: (1 + A)^(1/2) is exactly the multiplier sqrt(1 + k1^2).
    Field got = P1.sobolev_A(f, 1.0);
    Field want = f;
    want.to_spectral();
    for (int i1 = 0; i1 < b1.n1; ++i1) {
        double k = b1.k1(i1);
        want.at(i1) *= std::sqrt(1.0 + k * k);
    }
    CHECK(rel(got, want) < 1e-13);

    // s = 0 is the identity for any d.
    Box b2 = pbox2();
    Propagator P2(b2, 1.0);
    Field g = random_dealiased(b2, 13u);
    CHECK(rel(P2.sobolev_A(g, 0.0), g) < 1e-14);

    // d = 2: equivalent to the plain Sobolev weight within fixed factors.
    Field adapted = P2.sobolev_A(g, 2.0);
    Field plain = g;
    plain.to_spectral();
    for (int i1 = 0; i1 < b2.n1; ++i1) {
        double k1 = b2.k1(i1);
        for (int i2 = 0; i2 < b2.n2; ++i2) {
            double k2 = b2.k2(i2);
            plain.at(i1, i2) *= 1.0 + k1 * k1 + k2 * k2;
        }
    }
    double ratio = l2_norm(adapted) / l2_norm(plain);
    CHECK(ratio > 0.4);
    CHECK(ratio < 2.5);
}
