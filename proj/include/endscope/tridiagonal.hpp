#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "endscope/errors.hpp"

namespace endscope {

/// Thomas elimination for a tridiagonal system.
/// lower[i] couples row i+1 to column i, upper[i] couples row i to column i+1.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0 || rhs.size() != n || lower.size() + 1 != n || upper.size() + 1 != n) {
        throw SolverError("tridiagonal system has inconsistent dimensions");
    }
    std::vector<double> c(n, 0.0);
    std::vector<double> x(n, 0.0);
    double pivot = diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot)) throw SolverError("singular tridiagonal system");
    if (n > 1) c[0] = upper[0] / pivot;
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            throw SolverError("singular tridiagonal system");
        }
        if (i + 1 < n) c[i] = upper[i] / pivot;
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
}

}  // namespace endscope
