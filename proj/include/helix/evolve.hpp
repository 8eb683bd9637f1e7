#pragma once

#include <string>
#include <vector>

#include "helix/diagnostics.hpp"
#include "helix/field.hpp"
#include "helix/frame.hpp"
#include "helix/propagator.hpp"

namespace helix {

// Time steppers for the perturbation dynamics. etd_u marches the chart
// field with the exact Bloch semigroup and a two-stage exponential
// rule for the remaining nonlinearity; imex_m marches the vector
// perturbation with alpha Lap m implicit (diagonal in Fourier) and
// everything else explicit, renormalizing |h + m| = 1 after each step;
// regularized_m adds a fourth-order -beta Lap^2 m to the implicit part.
enum class Scheme { etd_u, imex_m, regularized_m };

// Names as they appear in config files: etd-u, imex-m, regularized-m.
Scheme scheme_from_name(const std::string& name);
const char* scheme_name(Scheme s);

// How a run ended. completed is the only healthy outcome; the others
// record the first violated runtime contract, and the record's t_final
// then holds the time of the offending state.
enum class Termination {
    completed,
    smallness_violated,   // sup|u| crossed 1/2
    constraint_violated,  // |h + m| drifted beyond 1e-6 before renormalization
    wraparound            // boundary mass above 1e-6 of the total
};
const char* termination_name(Termination t);

struct SimConfig {
    int d = 1;
    int n_per = 32;
    int n1 = 256;
    int n2 = 1;       // transverse points, d = 2 only
    double L2 = 0.0;  // transverse length, d = 2 only
    double alpha = 1.0;
    double dt = 0.05;
    double t_end = 10.0;
    Scheme scheme = Scheme::etd_u;
    double beta = 0.0;  // fourth-order damping, regularized_m only
    double s = 2.0;     // Sobolev order used in the reports
    int snapshot_stride = 10;
    CutoffProfile chi;  // low/high split for the weighted functionals

    Box box() const;

    // Rejects inconsistent parameters; t_end must be an integer number
    // of steps so the final sample lands exactly on the horizon.
    void validate() const;
};

// Marching state. Exactly one representation is authoritative: the
// chart field u under etd_u, the vector perturbation m under the
// m-form schemes. m_prev and rhs_prev keep the two-step history of
// the multistep formula; have_history stays false until the starter
// step has run once.
struct SimState {
    double t = 0.0;
    long step_count = 0;
    double max_u_sup_seen = 0.0;
    Field u;
    VecField m;
    VecField m_prev;    // spectral, previous time level
    VecField rhs_prev;  // spectral, explicit part at the previous level
    bool have_history = false;
};

// Everything a run leaves behind: sampled norms, the low/high split
// samples with their running functionals, relative energies, and the
// termination verdict. Sample vectors are aligned index by index.
struct RunRecord {
    SimConfig config;
    std::vector<NormReport> series;
    std::vector<MSample> msamples;
    std::vector<double> energy;  // E[h + m] - E[h] per sample
    MFunctionals functionals;
    Termination termination = Termination::completed;
    double t_final = 0.0;
    double max_u_sup_seen = 0.0;
    Field u_final;  // chart form of the last sampled state
};

// Tensor Gaussian initial data in the chart with the given peak
// amplitude and width. mean_zero removes the zero mode exactly: that
// mode sits in the kernel of the damping and would otherwise put an
// undecaying floor under every norm. The subtraction is a single
// spectral coefficient, so it costs a uniform background of height
// mass/volume in physical space while leaving the rest of the spectrum
// untouched; wider surgery (notching out a neighborhood of k = 0)
// would visibly steepen measured decay, since the heat-like law draws
// exactly on the modes nearest zero. Returned spectral.
Field gaussian_chart_data(const Box& box, double amplitude, double sigma,
                          bool mean_zero = true);

// Fraction of the L1 mass of |grad u| within 5% of the box edge
// (farther than 0.45 L from the box center along any axis). Crossing
// 1e-6 is the wraparound criterion: periodic images are about to
// interact and decay measurements stop being meaningful. The gradient
// is measured rather than u itself so the uniform background of
// mean-removed data (and any mean the nonlinearity regenerates) cannot
// mask or fake an overlap; a constant carries no spatial information
// and wraps nothing.
double edge_mass_fraction(const Field& u);

// One step each. The steppers advance t and step_count on success and
// return false with the state untouched at the offending level when
// their guard fires: sup|u| > 1/2 for the chart scheme, a constraint
// defect above 1e-6 before renormalization for the m-form schemes
// (the usual symptom of a too-large dt against the explicit terms).
bool step_etd_u(SimState& state, const SimConfig& config, const Propagator& prop);
bool step_imex_m(SimState& state, const SimConfig& config, const FrameBasis& frame);
bool step_regularized_m(SimState& state, const SimConfig& config,
                        const FrameBasis& frame);

// Marches u0 (given in the chart; m-form schemes map it through the
// frame) to t_end or to the first violated contract, sampling every
// snapshot_stride steps and at the final step. Abnormal endings are
// recorded in the result, not thrown.
RunRecord evolve(const SimConfig& config, const Field& u0);

}  // namespace helix
