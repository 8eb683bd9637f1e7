#pragma once

#include <vector>

#include "helix/util.hpp"

namespace helix {

// Lowest eigenpairs of a real symmetric tridiagonal matrix.
// Eigenvalues come from Sturm-count bisection, eigenvectors from
// inverse iteration with Gram-Schmidt inside near-degenerate clusters.
// Exact ties (possible when the off-diagonal vanishes) are resolved by
// a stable ascending sort of the diagonal, so results are
// deterministic.
struct TridiagEigen {
    std::vector<double> values;               // ascending, size n_values
    std::vector<std::vector<double>> vectors; // unit vectors, size n_vectors
};

TridiagEigen sym_tridiag_eigen(const std::vector<double>& diag,
                               const std::vector<double>& off,
                               int n_values, int n_vectors);

// Number of eigenvalues strictly below x (Sturm count); used by the
// solver and exposed for tests.
int sym_tridiag_count_below(const std::vector<double>& diag,
                            const std::vector<double>& off, double x);

}  // namespace helix
