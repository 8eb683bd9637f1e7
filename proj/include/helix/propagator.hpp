#pragma once

#include "helix/bloch.hpp"
#include "helix/field.hpp"

namespace helix {

// Radial cutoff for the low/high frequency split: 1 up to `inner`,
// 0 beyond `outer`, a quintic smoothstep ramp between. Setting
// inner == outer degenerates to the sharp indicator s <= inner.
struct CutoffProfile {
    double inner = 1.0;
    double outer = 2.0;

    double operator()(double s) const;
};

// Eigensystem of one Bloch fiber on the grid ladder. Eigenvalues are
// ascending; vectors are real, unit, and stored row-major with band n
// occupying entries [n * p, (n + 1) * p).
struct FiberEigen {
    std::vector<double> lambda;
    std::vector<double> vec;
};

// The quadratic-form operator A = -Lap + i cos x1 d2 block-diagonalizes
// over the Bloch fibers of the box (residue of j1 modulo n_per paired
// with the transverse index). This cache diagonalizes each fiber once
// and then applies the exact semigroup exp(t (-alpha + i) A), the ETD
// weights, spectral projections, and operator powers as small dense
// transforms per fiber.
//
// The low projection keeps the cutoff-weighted band-0 component of each
// fiber, evaluated at the reduced wavenumber |xi|_*. For d = 1 the
// operator is a plain Fourier multiplier and the low projection is the
// sharp indicator |k1| <= inner.
class Propagator {
  public:
    Propagator(const Box& box, double alpha, CutoffProfile chi = {});

    const Box& box() const { return box_; }
    double alpha() const { return alpha_; }
    const CutoffProfile& cutoff() const { return chi_; }

    // Exact banded application of A (independent of the eigensystems).
    Field apply_A(const Field& f) const;

    // exp(t L) f with L = (-alpha + i) A.
    Field apply_semigroup(const Field& f, double t) const;

    // phi1(h L) f and phi2(h L) f, the exponential integrator weights
    // phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2.
    Field apply_phi1(const Field& f, double h) const;
    Field apply_phi2(const Field& f, double h) const;

    // u0 advanced by h under du/dt = L u + F, with F interpolated
    // linearly between its endpoint values; exact for constant forcing.
    Field duhamel(const Field& u0, const Field& f0, const Field& f1,
                  double h) const;

    Field project_low(const Field& f) const;
    Field project_high(const Field& f) const;

    // (1 + A)^(s/2) f, an equivalent Sobolev weight adapted to A.
    Field sobolev_A(const Field& f, double s) const;

    // Smallest eigenvalue of A present in the range of project_high;
    // the semigroup contracts that range at least like
    // exp(-alpha * floor * t).
    double high_spectral_floor() const;

    int ladder() const { return box_.ladder(); }
    const FiberEigen& fiber(int r, int i2) const;
    // Reduced wavenumber |xi|_* of a fiber, the cutoff argument.
    double star_radius(int r, int i2) const;

  private:
    template <class G>
    Field eigen_apply(const Field& f, G&& factor) const;

    Box box_;
    double alpha_ = 1.0;
    CutoffProfile chi_;
    std::vector<FiberEigen> fibers_;
};

}  // namespace helix
