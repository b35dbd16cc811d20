#pragma once

// Reference implementations the tests check the library against. Everything
// here is written from the definitions, independent of the code under test:
// finite differences instead of analytic gradients, dense matrices instead of
// diagonal shortcuts, direct summation instead of recursions.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

// Central finite differences of a scalar function, step h per coordinate.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double saved = x[j];
        x[j] = saved + h;
        const double fp = f(x);
        x[j] = saved - h;
        const double fm = f(x);
        x[j] = saved;
        g[j] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline double rel_l2_error(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::logic_error("rel_l2_error: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// Full empirical Fisher matrix (1/n) * sum_i g_i g_i^T, dense row-major d x d.
inline std::vector<double> dense_outer_fim(const std::vector<std::vector<double>>& grads) {
    const std::size_t n = grads.size();
    const std::size_t d = grads.front().size();
    std::vector<double> m(d * d, 0.0);
    for (const auto& g : grads)
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) m[r * d + c] += g[r] * g[c];
    for (double& v : m) v /= static_cast<double>(n);
    return m;
}

// Bias-corrected moments evaluated as the direct sums
//   m_t = (1-b1) * sum_{i=1..t} b1^(t-i) grad_i / (1 - b1^t)
//   v_t = sqrt((1-b2) * sum_{i=1..t} b2^(t-i) gamma_i^2 / (1 - b2^t))
// with the beta=0 limits taken as "latest term only".
struct MomentSums {
    std::vector<double> m;
    std::vector<double> v;
};

inline MomentSums direct_moment_sums(const std::vector<std::vector<double>>& grads,
                                     const std::vector<std::vector<double>>& gammas,
                                     double beta1, double beta2) {
    const std::size_t t = grads.size();
    const std::size_t d = grads.front().size();
    MomentSums out{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t j = 0; j < d; ++j) {
        double ms = 0.0, vs = 0.0;
        for (std::size_t i = 1; i <= t; ++i) {
            const double w1 = std::pow(beta1, static_cast<double>(t - i));
            const double w2 = std::pow(beta2, static_cast<double>(t - i));
            ms += w1 * grads[i - 1][j];
            vs += w2 * gammas[i - 1][j] * gammas[i - 1][j];
        }
        const double m_corr = beta1 == 0.0 ? 1.0 : (1.0 - std::pow(beta1, static_cast<double>(t)));
        const double v_corr = beta2 == 0.0 ? 1.0 : (1.0 - std::pow(beta2, static_cast<double>(t)));
        out.m[j] = (1.0 - beta1) * ms / m_corr;
        out.v[j] = std::sqrt((1.0 - beta2) * vs / v_corr);
        if (beta1 == 0.0) out.m[j] = grads[t - 1][j];
        if (beta2 == 0.0) out.v[j] = std::abs(gammas[t - 1][j]);
    }
    return out;
}

// Gauss-Jordan elimination with full normalization; slow and simple.
inline std::vector<double> gauss_jordan_solve(std::vector<double> a, std::vector<double> b,
                                              std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (a[piv * n + col] == 0.0) throw std::runtime_error("gauss_jordan_solve: singular");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        const double d = a[col * n + col];
        for (std::size_t c = 0; c < n; ++c) a[col * n + c] /= d;
        b[col] /= d;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    return b;
}

// Softmax probabilities written out directly (exp / sum of exps, max-shifted).
inline std::vector<double> ref_softmax(const std::vector<double>& logits) {
    double mx = logits[0];
    for (double z : logits) mx = std::max(mx, z);
    std::vector<double> p(logits.size());
    double s = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        p[c] = std::exp(logits[c] - mx);
        s += p[c];
    }
    for (double& v : p) v /= s;
    return p;
}

// Reference forward pass for the one-hidden-layer network, parameter layout
// [W1 (h x in), b1, W2 (C x h), b2], tanh hidden. Returns class probabilities.
inline std::vector<double> ref_mlp_forward(const std::vector<double>& params,
                                           const std::vector<double>& x, int in, int hidden,
                                           int classes) {
    std::vector<double> a(static_cast<std::size_t>(hidden));
    const double* w1 = params.data();
    const double* b1 = w1 + static_cast<std::size_t>(hidden) * in;
    const double* w2 = b1 + hidden;
    const double* b2 = w2 + static_cast<std::size_t>(classes) * hidden;
    for (int u = 0; u < hidden; ++u) {
        double z = b1[u];
        for (int j = 0; j < in; ++j) z += w1[static_cast<std::size_t>(u) * in + j] * x[j];
        a[static_cast<std::size_t>(u)] = std::tanh(z);
    }
    std::vector<double> logits(static_cast<std::size_t>(classes));
    for (int c = 0; c < classes; ++c) {
        double z = b2[c];
        for (int u = 0; u < hidden; ++u) z += w2[static_cast<std::size_t>(c) * hidden + u] * a[u];
        logits[static_cast<std::size_t>(c)] = z;
    }
    return ref_softmax(logits);
}

// Test-local randomness; deliberately separate from the library's helpers.
struct Rand {
    std::mt19937_64 eng;
    explicit Rand(std::uint64_t seed) : eng(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(eng() >> 11) * 0x1.0p-53);
    }
    double normal() {
        const double u1 = 1.0 - uniform(0.0, 1.0);
        const double u2 = uniform(0.0, 1.0);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }
    int below(int n) { return static_cast<int>(eng() % static_cast<std::uint64_t>(n)); }
    std::vector<double> vec(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (double& e : v) e = uniform(lo, hi);
        return v;
    }
};

// Random symmetric positive definite matrix M^T M + ridge * I, row-major.
inline std::vector<double> random_spd(std::size_t n, Rand& rnd, double ridge = 1.0) {
    std::vector<double> m(n * n);
    for (double& v : m) v = rnd.uniform(-1.0, 1.0);
    std::vector<double> a(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += m[k * n + r] * m[k * n + c];
            a[r * n + c] = s;
        }
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] += ridge;
    return a;
}

} // namespace oracle
