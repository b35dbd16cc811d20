#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedunlearn/types.hpp"

namespace fedunlearn {

// Diagonal (or block-diagonal) estimate of the empirical Fisher information,
// built from per-sample gradients of one mini-batch.
//
// gamma holds the d diagonal entries in every mode. With block_size b > 1 the
// blocks field additionally stores ceil(d/b) dense blocks row-major, each b*b
// except a smaller trailing block when b does not divide d; block k covers
// coordinates [k*b, k*b + block_dim(k)) and starts at storage offset k*b*b.
struct DiagFim {
    std::vector<double> gamma;
    std::vector<double> blocks;
    int effective_batch = 0;
    int block_size = 1;

    int dim() const { return static_cast<int>(gamma.size()); }
    int num_blocks() const;
    int block_dim(int k) const;
    std::size_t block_offset(int k) const;
};

// gamma[j] = (1/n) * sum_i g_i[j]^2, the diagonal of the averaged gradient
// outer product. Sums run in sample order and divide once at the end.
DiagFim estimate_diag_fim(std::span<const std::vector<double>> per_sample_grads,
                          int effective_batch);

// Block-diagonal variant: each stored block is the matching sub-block of
// (1/n) * sum_i g_i g_i^T. b=1 delegates to estimate_diag_fim, so the two
// agree bitwise in that case.
DiagFim estimate_block_fim(std::span<const std::vector<double>> per_sample_grads,
                           int effective_batch, int b);

// Adam-style moment tracking over (gradient, FIM diagonal) pairs. m and v are
// the bias-corrected values consumed by apply_update; m_accum / v_accum are
// the raw exponentially weighted sums behind them.
struct FimMomentState {
    std::vector<double> m;
    std::vector<double> v;
    std::vector<double> m_accum;
    std::vector<double> v_accum;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_stab = 1e-8;
    int block_size = 1;
    std::vector<double> current_blocks;
};

FimMomentState make_moment_state(int dim, double beta1, double beta2, double eps_stab);

// One step of the moment recursions
//   m_accum <- beta1*m_accum + (1-beta1)*grad
//   v_accum <- beta2*v_accum + (1-beta2)*gamma.*gamma
// followed by bias correction: m = m_accum/(1-beta1^t), v = sqrt(v_accum/(1-beta2^t)).
// With beta1=beta2=0 this degenerates to m=grad, v=|gamma|. In block mode the
// momentum still runs on the diagonal only; the current step's blocks are kept
// for apply_update's off-diagonal terms.
FimMomentState update_moments(FimMomentState state, const std::vector<double>& grad,
                              const DiagFim& fim);

// params[j] <- params[j] - step * m[j]/(v[j] + eps_stab), step = eta. With
// paper_literal_scaling the step becomes eta/effective_batch instead. In block
// mode each block solves (B + eps_stab*I) s = m_block where B is the current
// step's block with its diagonal replaced by the momentum-corrected v entries.
// Throws NumericError (with the offending coordinate) if any output is nonfinite.
ParamVector apply_update(const ParamVector& params, const FimMomentState& state, double eta,
                         int effective_batch, bool paper_literal_scaling = false);

// params - H^{-1} grad via a dense SPD solve. Test oracle for the exactness of
// curvature-corrected steps; d capped at 200.
ParamVector newton_step_exact(const ParamVector& params, const std::vector<double>& grad,
                              const std::vector<double>& hessian);

} // namespace fedunlearn
