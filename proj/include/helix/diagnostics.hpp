#pragma once

#include <vector>

#include "helix/field.hpp"
#include "helix/frame.hpp"
#include "helix/propagator.hpp"

namespace helix {

// Norm family reported along decay runs. All norms are of the complex
// chart field u on the box; runs that step the vector perturbation map
// back through the frame before reporting.
struct NormReport {
    double t = 0.0;
    double L1 = 0.0;
    double L2 = 0.0;
    double Linf = 0.0;
    double Hs = 0.0;      // multiplier (1 + |k|^2)^{s/2}
    double Ws_inf = 0.0;  // W^{r,inf} with r = sup_norm_order(s, d)
    double sup_u = 0.0;
};

// Derivative order of the sup-norm entry, floor(s - (d+1)/2), floored
// at zero so low s still reports a plain sup norm.
int sup_norm_order(double s, int d);

double l1_norm(const Field& f);

// Inhomogeneous Sobolev norm via the spectral multiplier.
double h_s_norm(const Field& f, double s);

// Same weight applied to the gradient, || |grad f| ||_{H^s}.
double grad_h_s_norm(const Field& f, double s);

// Square-summed sup norms over all derivatives up to order s:
// [sum_{|a| <= s} ||d^a f||_inf^2]^{1/2}.
double w_s_inf_norm(const Field& f, int s);

// The same for the gradient components, summed in squares.
double grad_w_s_inf_norm(const Field& f, int s);

NormReport norms(const Field& u, double s, double t = 0.0);

// One time sample of the weighted-norm bookkeeping: the low/high split
// norms entering the bootstrap functionals.
struct MSample {
    double t = 0.0;
    double low_l2 = 0.0;
    double low_grad_hs = 0.0;
    double low_sup = 0.0;
    double low_grad_ws_inf = 0.0;
    double high_hs = 0.0;
    double high_hs1 = 0.0;  // H^{s+1}, feeds the memory integral
};

MSample m_sample(const Field& u, const Propagator& prop, double s,
                 double t);

// Running suprema of the two weighted functionals. M_L collects the
// four low-frequency weights (1+at)^{d/4} |u_L|_2, (1+at)^{d/4+1/2}
// |grad u_L|_{H^s}, (1+at)^{d/2} |u_L|_inf, (1+at)^{d/2+1/2}
// |grad u_L|_{W^{s,inf}} summed at each time; M_H pairs
// (1+at)^{d/2+1} |u_H|_{H^s} with the exponentially weighted memory
// integral of |u_H|_{H^{s+1}}^2.
struct MFunctionals {
    double M_L = 0.0;
    double M_H = 0.0;
    double M = 0.0;
    double c0 = 0.0;         // rate inside the memory weight
    double t_arg_low = 0.0;  // times attaining the suprema
    double t_arg_high = 0.0;
};

MFunctionals m_functionals(const std::vector<MSample>& series, double alpha,
                           int d, double c0);

// Least-squares power-law fit of value against (1 + alpha t).
struct DecayFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double residual = 0.0;  // rms misfit of log(value)
    double t_lo = 0.0;
    double t_hi = 0.0;
    int n_points = 0;
    bool ok = false;  // at least 4 samples, all positive
};

DecayFit fit_decay(const std::vector<double>& times,
                   const std::vector<double>& values, double alpha);

// Restricts the fit to samples with t in [t_lo, t_hi].
DecayFit fit_decay_window(const std::vector<double>& times,
                          const std::vector<double>& values, double alpha,
                          double t_lo, double t_hi);

// Energy bookkeeping about the unit-pitch profile.
struct EnergyReport {
    double total_relative_energy = 0.0;  // E[h + m] - E[h] on the box
    double hessian_quadratic = 0.0;      // (1/2) Re <A u, u>
    double bulk_identity_defect = 0.0;   // mean |density split residual|
    // Stationarity residuals of the half-pitch profile, per unit
    // volume; negative when the box cannot hold the half-pitch state.
    double half_state_curl_residual = 0.0;
    double half_state_div_residual = 0.0;
};

EnergyReport energy_report(const Field& u, const FrameBasis& frame);

// Mean absolute defect of the pointwise split of the energy density
// into the chirality-completed square plus a pure divergence. Exact
// for unit-length fields; the discrete value reflects only rounding
// and the aliasing tail of well-resolved fields.
double bulk_identity_defect(const VecField& n);

}  // namespace helix
