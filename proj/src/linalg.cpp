#include "fedunlearn/linalg.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

#include "fedunlearn/errors.hpp"

namespace fedunlearn {

std::vector<double> solve_spd(const std::vector<double>& a, std::vector<double> b, std::size_t n) {
    if (a.size() != n * n || b.size() != n)
        throw ValidationError("solve_spd: dimension mismatch");
    // Lower-triangular Cholesky factor, computed in place on a copy.
    std::vector<double> l = a;
    for (std::size_t j = 0; j < n; ++j) {
        double d = l[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
        if (!(d > 0.0) || !std::isfinite(d))
            throw NumericError("solve_spd: matrix not positive definite", static_cast<long>(j));
        const double ljj = std::sqrt(d);
        l[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = l[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            l[i * n + j] = s / ljj;
        }
    }
    // Forward then backward substitution.
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
        b[i] = s / l[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * b[k];
        b[ii] = s / l[ii * n + ii];
    }
    return b;
}

std::vector<double> solve_lu(const std::vector<double>& a, std::vector<double> b, std::size_t n) {
    if (a.size() != n * n || b.size() != n)
        throw ValidationError("solve_lu: dimension mismatch");
    std::vector<double> lu = a;
    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t p = j;
        double best = std::abs(lu[j * n + j]);
        for (std::size_t i = j + 1; i < n; ++i) {
            const double v = std::abs(lu[i * n + j]);
            if (v > best) { best = v; p = i; }
        }
        if (!(best > 0.0) || !std::isfinite(best))
            throw NumericError("solve_lu: matrix is singular", static_cast<long>(j));
        if (p != j) {
            for (std::size_t k = 0; k < n; ++k) std::swap(lu[p * n + k], lu[j * n + k]);
            std::swap(piv[p], piv[j]);
        }
        const double d = lu[j * n + j];
        for (std::size_t i = j + 1; i < n; ++i) {
            const double m = lu[i * n + j] / d;
            lu[i * n + j] = m;
            for (std::size_t k = j + 1; k < n; ++k) lu[i * n + k] -= m * lu[j * n + k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[piv[i]];
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= lu[i * n + k] * x[k];
        x[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= lu[ii * n + k] * x[k];
        x[ii] = s / lu[ii * n + ii];
    }
    return x;
}

} // namespace fedunlearn
