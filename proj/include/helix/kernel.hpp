#pragma once

#include <vector>

#include "helix/diagnostics.hpp"
#include "helix/propagator.hpp"

namespace helix {

// Quadrature lattice for the continuum-frequency synthesis of the
// low-band kernel. Frequencies along the helix axis are sampled with
// spacing 1/n_xi1: quasi-momenta xi1 = j/n_xi1 in [0,1) carrying a
// Fourier ladder k in [-ladder, ladder] when d = 2, plain wavenumbers
// kappa = q/n_xi1 when d = 1. Transverse frequencies are j*xi2_step
// for |j| <= n_xi2. The lattice periodizes space: the synthesized
// kernel repeats with period 2*pi*n_xi1 along x1 and 2*pi/xi2_step
// along x2, so resolution flags watch the phase spread against the
// half periods.
struct KernelQuadrature {
    int d = 1;
    double alpha = 1.0;
    int n_xi1 = 256;
    int ladder = 8;         // d = 2 only
    int n_xi2 = 0;          // d = 2 only
    double xi2_step = 0.0;  // d = 2 only
    CutoffProfile chi;

    void validate() const;
};

struct KernelValue {
    cplx value{0.0, 0.0};
    // False when the requested separation or the accumulated phase
    // spread exceeds what the frequency lattice can represent.
    bool resolved = true;
};

enum class KernelNorm { l2, sup };

struct KernelScanRow {
    double t = 0.0;
    double norm = 0.0;
    double envelope = 0.0;
    bool resolved = true;
};

struct KernelScan {
    std::vector<KernelScanRow> rows;
    double expected_exponent = 0.0;  // -(d/2)(1 - 1/p) - k/2
    DecayFit fit;                    // over the resolved rows only
    bool resolution_warning = false;
};

// Band-0 kernel of e^{t(-alpha + i)A} assembled by quadrature over
// the frequency lattice. Fiber eigenpairs are solved once at
// construction; evaluation and norm scans then reduce to weighted
// sums over the table.
class KernelTable {
public:
    explicit KernelTable(const KernelQuadrature& quad);

    // Kernel value at positions x, y (second coordinates ignored for
    // d = 1). Only x2 - y2 enters transversally, so transverse
    // translation invariance is structural. `sign` selects the
    // conjugate dispersion e^{t(-alpha - i)A} with sign = -1; the two
    // are related by conj(G_+(t, y, x)) = G_-(t, x, y).
    KernelValue evaluate(double t, double x1, double x2, double y1,
                         double y2, int sign = +1) const;

    // Mixed partial of order (a1, a2) in x, same conventions.
    KernelValue evaluate_deriv(double t, double x1, double x2, double y1,
                               double y2, int a1, int a2,
                               int sign = +1) const;

    // Largest time whose phase spread still fits the half periods.
    double resolution_horizon() const;

    // sup over y of || |grad|^deriv G(t, . , y) ||_p per time. L2
    // norms are exact lattice Parseval sums; sup norms synthesize the
    // kernel on a padded grid and sharpen the peak by parabolic
    // interpolation plus a direct re-evaluation. The fit uses only
    // rows inside the resolution horizon; callers wanting unbiased
    // exponents should also keep t >= a few 1/alpha so the (1+at)
    // abscissa is past its knee.
    KernelScan norm_scan(const std::vector<double>& times, KernelNorm norm,
                         int deriv, int n_y1 = 4) const;

    const KernelQuadrature& quad() const { return quad_; }

private:
    struct Node {
        double xi1 = 0.0;  // quasi-momentum (d = 2), wavenumber (d = 1)
        double xi2 = 0.0;
        double lambda = 0.0;
        double chi = 0.0;
        int q1 = 0;  // integer lattice indices, for exact FFT binning
        int q2 = 0;
        std::vector<cplx> c;  // band-0 ladder, empty for d = 1
    };

    cplx ladder_sum(const Node& f, double x, int a1) const;
    cplx direct_sum(double t, double x1, double dx2, double y1, int a1,
                    int a2, int sign) const;
    double sup_slice(double t, double y1, int deriv) const;
    double l2_slice(double t, double y1, int deriv) const;
    bool time_resolved(double t) const;

    KernelQuadrature quad_;
    std::vector<Node> nodes_;
    double pref_ = 0.0;      // lattice measure over the 2 pi factors
    double period1_ = 0.0;   // synthesized x1 period
    double period2_ = 0.0;   // synthesized x2 period (d = 2)
};

}  // namespace helix
