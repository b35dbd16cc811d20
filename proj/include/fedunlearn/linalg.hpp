#pragma once

#include <cstddef>
#include <vector>

namespace fedunlearn {

// Dense row-major n x n helpers for the small systems this project needs
// (curvature blocks, the exact-Newton oracle). Not a general BLAS.

// Solve A x = b for symmetric positive definite A via Cholesky.
// Throws NumericError if A is not (numerically) positive definite.
std::vector<double> solve_spd(const std::vector<double>& a, std::vector<double> b, std::size_t n);

// Solve A x = b via LU with partial pivoting. Throws NumericError on a
// (numerically) singular matrix.
std::vector<double> solve_lu(const std::vector<double>& a, std::vector<double> b, std::size_t n);

} // namespace fedunlearn
