#include "helix/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace helix {

namespace {

double matrix_scale(const std::vector<double>& diag, const std::vector<double>& off) {
    double s = 0.0;
    for (double v : diag) s = std::max(s, std::abs(v));
    for (double v : off) s = std::max(s, std::abs(v));
    return std::max(s, 1.0);
}

// LU factorization of (T - lambda I) with partial pivoting, tridiagonal
// storage plus a second superdiagonal created by row swaps.
struct TriLU {
    std::vector<double> dl, d, du, du2;
    std::vector<int> piv;

    void factor(const std::vector<double>& diag, const std::vector<double>& off,
                double lambda, double tiny) {
        int n = static_cast<int>(diag.size());
        dl.assign(off.begin(), off.end());
        du.assign(off.begin(), off.end());
        d.resize(n);
        for (int i = 0; i < n; ++i) d[i] = diag[i] - lambda;
        du2.assign(std::max(n - 2, 0), 0.0);
        piv.assign(std::max(n - 1, 0), 0);
        for (int i = 0; i + 1 < n; ++i) {
            if (std::abs(d[i]) >= std::abs(dl[i])) {
                if (d[i] == 0.0) d[i] = tiny;
                double fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
                if (i + 2 < n) du2[i] = 0.0;
                piv[i] = 0;
            } else {
                double fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                double tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - fact * d[i + 1];
                if (i + 2 < n) {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                piv[i] = 1;
            }
        }
        if (n > 0 && d[n - 1] == 0.0) d[n - 1] = tiny;
    }

    void solve(std::vector<double>& b, double tiny) const {
        int n = static_cast<int>(b.size());
        for (int i = 0; i + 1 < n; ++i) {
            if (piv[i] == 0) {
                b[i + 1] -= dl[i] * b[i];
            } else {
                double tmp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tmp - dl[i] * b[i];
            }
        }
        auto dd = [&](int i) { return d[i] != 0.0 ? d[i] : tiny; };
        b[n - 1] /= dd(n - 1);
        if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd(n - 2);
        for (int i = n - 3; i >= 0; --i)
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd(i);
    }
};

void normalize(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    require(s > 0.0, "tridiag: zero vector in inverse iteration");
    for (double& x : v) x /= s;
}

}  // namespace

int sym_tridiag_count_below(const std::vector<double>& diag,
                            const std::vector<double>& off, double x) {
    int n = static_cast<int>(diag.size());
    int count = 0;
    const double safe = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    double q = diag[0] - x;
    if (q < 0.0) ++count;
    for (int i = 1; i < n; ++i) {
        if (q == 0.0) q = safe;
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

TridiagEigen sym_tridiag_eigen(const std::vector<double>& diag,
                               const std::vector<double>& off,
                               int n_values, int n_vectors) {
    int n = static_cast<int>(diag.size());
    require(n >= 1 && static_cast<int>(off.size()) == n - 1, "tridiag: bad shape");
    require(n_values >= 1 && n_values <= n && n_vectors <= n_values,
            "tridiag: bad eigenpair request");

    TridiagEigen out;

    bool diagonal = std::all_of(off.begin(), off.end(), [](double v) { return v == 0.0; });
    if (diagonal) {
        // Exact diagonal case: stable ascending sort keeps ties in
        // original index order and the eigenvectors are coordinate axes.
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return diag[a] < diag[b]; });
        for (int m = 0; m < n_values; ++m) out.values.push_back(diag[order[m]]);
        for (int m = 0; m < n_vectors; ++m) {
            std::vector<double> v(n, 0.0);
            v[order[m]] = 1.0;
            out.vectors.push_back(std::move(v));
        }
        return out;
    }

    double scale = matrix_scale(diag, off);
    double lo = diag[0], hi = diag[0];
    for (int i = 0; i < n; ++i) {
        double radius = (i > 0 ? std::abs(off[i - 1]) : 0.0) +
                        (i + 1 < n ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - radius);
        hi = std::max(hi, diag[i] + radius);
    }
    lo -= scale * 1e-12;
    hi += scale * 1e-12;

    const double eps = std::numeric_limits<double>::epsilon();
    for (int m = 0; m < n_values; ++m) {
        double a = lo, b = hi;
        while (b - a > 4.0 * eps * std::max(std::abs(a), std::abs(b)) + 1e-300) {
            double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            if (sym_tridiag_count_below(diag, off, mid) <= m) a = mid;
            else b = mid;
        }
        out.values.push_back(0.5 * (a + b));
    }

    const double tiny = eps * scale;
    std::uint64_t rng = 0x9e3779b97f4a7c15ull;
    auto next_rand = [&rng]() {
        rng = rng * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(rng >> 11) / 9007199254740992.0 - 0.5;
    };

    for (int m = 0; m < n_vectors; ++m) {
        TriLU lu;
        // Small shift keeps the factorization from going exactly
        // singular at machine-exact eigenvalues.
        lu.factor(diag, off, out.values[m] * (1.0 + eps) + tiny, tiny);
        std::vector<double> v(n);
        for (double& x : v) x = next_rand();
        normalize(v);
        for (int iter = 0; iter < 4; ++iter) {
            lu.solve(v, tiny);
            // Orthogonalize against everything already computed; a
            // no-op for well-separated eigenvalues, essential inside
            // clusters.
            for (const auto& w : out.vectors) {
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += v[i] * w[i];
                for (int i = 0; i < n; ++i) v[i] -= dot * w[i];
            }
            normalize(v);
        }
        out.vectors.push_back(std::move(v));
    }
    return out;
}

}  // namespace helix
