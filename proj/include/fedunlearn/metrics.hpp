#pragma once

#include <span>

#include "fedunlearn/model.hpp"
#include "fedunlearn/types.hpp"

namespace fedunlearn {

struct MetricReport {
    double acc_baseline = 0.0;
    double acc_unlearned = 0.0;
    double sape = 0.0;
    double t_b_ms = 0.0;
    double t_u_ms = 0.0;
    double speedup_v = 0.0;
    double predicted_v = 0.0;
    double d_u = 0.0;
};

// Symmetric absolute percentage error |b - a| / (|a| + |b|). Scale-invariant,
// so percent or fraction inputs give the same value.
double sape(double acc_a, double acc_b);

// Measured speedup T_b / T_u.
double speedup(double t_b_ms, double t_u_ms);

// The closed-form speedup estimate
//   v = [ (T_u*t_u)/(T_b*t_b) * (1 + 5k / (6*(k_u*(B-dB) + k_c*B))) ]^-1
// with T_* round counts, t_* per-round times, k total clients split into k_u
// unlearned and k_c learned, B the batch size and dB the per-batch deletions.
double predicted_speedup(double T_b, double t_b, double T_u, double t_u, double k, double k_u,
                         double k_c, double B, double delta_B);

// Same estimate before the "curvature pass costs 5k forward passes"
// substitution: the correction term is curvature_cost / (6 * forward_cost *
// (k_u*(B-dB) + k_c*B)) with both costs supplied by the caller.
double predicted_speedup_unreduced(double T_b, double t_b, double T_u, double t_u, double k_u,
                                   double k_c, double B, double delta_B, double curvature_cost,
                                   double forward_cost);

// Sum over probes of the L2 distance between the two models' outputs on the
// same input.
double output_distance(const ModelSpec& spec, const ParamVector& params_a,
                       const ParamVector& params_b, std::span<const Example> probe_set);

} // namespace fedunlearn
