#include "fedunlearn/fim.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "fedunlearn/errors.hpp"
#include "fedunlearn/linalg.hpp"

namespace fedunlearn {

int DiagFim::num_blocks() const {
    if (block_size <= 1) return dim();
    return (dim() + block_size - 1) / block_size;
}

int DiagFim::block_dim(int k) const {
    const int start = k * block_size;
    const int rest = dim() - start;
    return rest < block_size ? rest : block_size;
}

std::size_t DiagFim::block_offset(int k) const {
    return static_cast<std::size_t>(k) * block_size * block_size;
}

namespace {

void check_grads(std::span<const std::vector<double>> grads, int effective_batch) {
    if (grads.empty())
        throw ValidationError("fim estimate: no per-sample gradients");
    if (effective_batch != static_cast<int>(grads.size()))
        throw ValidationError("fim estimate: effective_batch " + std::to_string(effective_batch) +
                              " does not match gradient count " + std::to_string(grads.size()));
    const std::size_t d = grads[0].size();
    for (const auto& g : grads)
        if (g.size() != d) throw ValidationError("fim estimate: ragged gradient list");
}

} // namespace

DiagFim estimate_diag_fim(std::span<const std::vector<double>> per_sample_grads,
                          int effective_batch) {
    check_grads(per_sample_grads, effective_batch);
    const std::size_t d = per_sample_grads[0].size();
    DiagFim fim;
    fim.gamma.assign(d, 0.0);
    fim.effective_batch = effective_batch;
    fim.block_size = 1;
    for (const auto& g : per_sample_grads)
        for (std::size_t j = 0; j < d; ++j) fim.gamma[j] += g[j] * g[j];
    const double inv_n = 1.0 / effective_batch;
    for (double& x : fim.gamma) x *= inv_n;
    return fim;
}

DiagFim estimate_block_fim(std::span<const std::vector<double>> per_sample_grads,
                           int effective_batch, int b) {
    check_grads(per_sample_grads, effective_batch);
    const int d = static_cast<int>(per_sample_grads[0].size());
    if (b < 1) throw ValidationError("block size must be >= 1");
    if (b > d)
        throw ValidationError("block size " + std::to_string(b) + " exceeds parameter count " +
                              std::to_string(d));
    if (b == 1) return estimate_diag_fim(per_sample_grads, effective_batch);

    DiagFim fim;
    fim.gamma.assign(d, 0.0);
    fim.effective_batch = effective_batch;
    fim.block_size = b;
    const int nb = fim.num_blocks();
    fim.blocks.assign(fim.block_offset(nb - 1) + static_cast<std::size_t>(b) * b, 0.0);
    for (const auto& g : per_sample_grads) {
        for (int k = 0; k < nb; ++k) {
            const int o = k * b;
            const int s = fim.block_dim(k);
            double* blk = fim.blocks.data() + fim.block_offset(k);
            for (int r = 0; r < s; ++r)
                for (int c = 0; c < s; ++c) blk[r * b + c] += g[o + r] * g[o + c];
        }
    }
    const double inv_n = 1.0 / effective_batch;
    for (double& x : fim.blocks) x *= inv_n;
    for (int k = 0; k < nb; ++k) {
        const double* blk = fim.blocks.data() + fim.block_offset(k);
        for (int r = 0; r < fim.block_dim(k); ++r) fim.gamma[k * b + r] = blk[r * b + r];
    }
    return fim;
}

FimMomentState make_moment_state(int dim, double beta1, double beta2, double eps_stab) {
    if (dim < 1) throw ValidationError("moment state: dimension must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ValidationError("moment state: beta coefficients must lie in [0, 1)");
    if (!(eps_stab > 0.0)) throw ValidationError("moment state: eps_stab must be > 0");
    FimMomentState st;
    st.m.assign(dim, 0.0);
    st.v.assign(dim, 0.0);
    st.m_accum.assign(dim, 0.0);
    st.v_accum.assign(dim, 0.0);
    st.beta1 = beta1;
    st.beta2 = beta2;
    st.eps_stab = eps_stab;
    return st;
}

FimMomentState update_moments(FimMomentState state, const std::vector<double>& grad,
                              const DiagFim& fim) {
    const std::size_t d = state.m_accum.size();
    if (grad.size() != d || fim.gamma.size() != d)
        throw ValidationError("update_moments: dimension mismatch");
    state.t += 1;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    for (std::size_t j = 0; j < d; ++j) {
        state.m_accum[j] = b1 * state.m_accum[j] + (1.0 - b1) * grad[j];
        state.v_accum[j] = b2 * state.v_accum[j] + (1.0 - b2) * fim.gamma[j] * fim.gamma[j];
    }
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t j = 0; j < d; ++j) {
        state.m[j] = state.m_accum[j] / bc1;
        state.v[j] = std::sqrt(state.v_accum[j] / bc2);
    }
    state.block_size = fim.block_size;
    if (fim.block_size > 1)
        state.current_blocks = fim.blocks;
    else
        state.current_blocks.clear();
    return state;
}

ParamVector apply_update(const ParamVector& params, const FimMomentState& state, double eta,
                         int effective_batch, bool paper_literal_scaling) {
    if (state.t < 1) throw ValidationError("apply_update: no moments accumulated yet");
    if (!(eta > 0.0)) throw ValidationError("apply_update: eta must be > 0");
    if (effective_batch < 1) throw ValidationError("apply_update: effective batch must be >= 1");
    const std::size_t d = params.size();
    if (state.m.size() != d) throw ValidationError("apply_update: dimension mismatch");
    const double step = paper_literal_scaling ? eta / effective_batch : eta;

    ParamVector out = params;
    if (state.block_size <= 1) {
        for (std::size_t j = 0; j < d; ++j)
            out[j] -= step * state.m[j] / (state.v[j] + state.eps_stab);
    } else {
        const int b = state.block_size;
        const int nb = (static_cast<int>(d) + b - 1) / b;
        if (state.current_blocks.size() < static_cast<std::size_t>(nb) * b * b)
            throw ValidationError("apply_update: moment state lacks current-step blocks");
        for (int k = 0; k < nb; ++k) {
            const int o = k * b;
            const int s = (static_cast<int>(d) - o < b) ? static_cast<int>(d) - o : b;
            std::vector<double> mat(static_cast<std::size_t>(s) * s);
            std::vector<double> rhs(s);
            const double* blk = state.current_blocks.data() +
                                static_cast<std::size_t>(k) * b * b;
            for (int r = 0; r < s; ++r) {
                for (int c = 0; c < s; ++c) mat[r * s + c] = blk[r * b + c];
                mat[r * s + r] = state.v[o + r] + state.eps_stab;
                rhs[r] = state.m[o + r];
            }
            const std::vector<double> sol = solve_lu(mat, std::move(rhs), s);
            for (int r = 0; r < s; ++r) out[o + r] -= step * sol[r];
        }
    }
    for (std::size_t j = 0; j < d; ++j)
        if (!std::isfinite(out[j]))
            throw NumericError("apply_update produced a nonfinite parameter",
                               static_cast<long>(j));
    return out;
}

ParamVector newton_step_exact(const ParamVector& params, const std::vector<double>& grad,
                              const std::vector<double>& hessian) {
    const std::size_t d = params.size();
    if (grad.size() != d || hessian.size() != d * d)
        throw ValidationError("newton_step_exact: dimension mismatch");
    if (d > 200) throw ValidationError("newton_step_exact: dimension capped at 200");
    const std::vector<double> step = solve_spd(hessian, grad, d);
    ParamVector out = params;
    for (std::size_t j = 0; j < d; ++j) out[j] -= step[j];
    return out;
}

} // namespace fedunlearn
