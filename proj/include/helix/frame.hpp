#pragma once

#include "helix/field.hpp"

namespace helix {

// Orthonormal frame attached to the unit-pitch helical profile
// h = (0, cos x1, sin x1): J1 = (0, -sin x1, cos x1) and J2 = (1, 0, 0)
// span the tangent plane at h. The frame satisfies d1 J1 = -h and
// d1 h = J1, which is what makes the chart equation below close.
// All three legs depend on x1 only but are stored on the full grid so
// pointwise algebra stays uniform.
struct FrameBasis {
    VecField J1, J2, h;

    explicit FrameBasis(const Box& box);
};

// Helical profile with winding rate kappa. The box must hold an integer
// number of its periods along x1.
VecField helical_state(const Box& box, double kappa);

// Spatial energy density of the helical profile, kappa * (kappa - 1) / 2.
double helical_energy_density(double kappa);

// Micromagnetic energy with the chiral term, integrated over the box:
// E[n] = 1/2 int |grad n|^2 + n . curl n.
double energy(const VecField& n);

// Chart between the complex perturbation variable and the 3-vector
// perturbation about the profile: m = u1 J1 + u2 J2 + z h with
// u = u1 + i u2 and z = -1 + sqrt(1 - |u|^2), so that |h + m| = 1
// pointwise. u_to_m requires sup |u| <= 1.
Field z_of_u(const Field& u);
VecField u_to_m(const Field& u, const FrameBasis& frame);
Field m_to_u(const VecField& m, const FrameBasis& frame);

// Dissipative chiral flow at a general field n:
//   dn/dt = n x (-Lap n + curl n)
//         + alpha (Lap n - curl n + (|grad n|^2 + curl n . n) n).
// The expression is algebraic in n and its derivatives; no unit-length
// assumption is built in, which lets tests feed it anything.
VecField llg_rhs(const VecField& n, double alpha);

// The same flow written for the perturbation m = n - h about the
// unit-pitch profile. Identical to llg_rhs(h + m, alpha) as an algebraic
// expression; kept separate so the chart equation can be checked
// against an independently assembled right-hand side.
VecField rhs_m(const VecField& m, const FrameBasis& frame, double alpha);

// Quadratic-form operator of the chart equation, applied directly on
// the grid: A u = -Lap u + i cos x1 d2 u (the trig term is absent when
// d = 1). Returns a physical-space field.
Field apply_A_pseudospectral(const Field& u);

// Chart form of the flow: du/dt = (-alpha + i) A u + alpha N1(u) + N2(u),
// with z treated as the dependent field z(u) and all derivatives of z
// taken spectrally from its grid values. Projecting rhs_m onto J1 + i J2
// reproduces this to rounding plus aliasing of the z tail.
Field rhs_u(const Field& u, double alpha);

// The nonlinear part alpha N1 + N2 alone, for exponential integrators
// that handle the (-alpha + i) A factor exactly.
Field rhs_u_nonlinear(const Field& u, double alpha);

}  // namespace helix
