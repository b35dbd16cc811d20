#include "fedunlearn/metrics.hpp"

#include <cmath>

#include "fedunlearn/errors.hpp"

namespace fedunlearn {

double sape(double acc_a, double acc_b) {
    if (acc_a < 0.0 || acc_b < 0.0) throw ValidationError("sape: accuracies must be nonnegative");
    const double denom = std::abs(acc_a) + std::abs(acc_b);
    if (denom == 0.0) throw ValidationError("sape: both accuracies are zero");
    return std::abs(acc_b - acc_a) / denom;
}

double speedup(double t_b_ms, double t_u_ms) {
    if (!(t_b_ms > 0.0) || !(t_u_ms > 0.0))
        throw ValidationError("speedup: times must be positive");
    return t_b_ms / t_u_ms;
}

double predicted_speedup(double T_b, double t_b, double T_u, double t_u, double k, double k_u,
                         double k_c, double B, double delta_B) {
    if (!(T_b > 0.0) || !(t_b > 0.0) || !(T_u > 0.0) || !(t_u > 0.0) || !(k > 0.0) ||
        !(k_u > 0.0) || !(k_c >= 0.0) || !(B > 0.0))
        throw ValidationError("predicted_speedup: arguments must be positive");
    if (!(delta_B >= 0.0 && delta_B < B))
        throw ValidationError("predicted_speedup: need 0 <= delta_B < B");
    const double work = k_u * (B - delta_B) + k_c * B;
    if (!(work > 0.0)) throw ValidationError("predicted_speedup: zero work term");
    const double ratio = (T_u * t_u) / (T_b * t_b);
    return 1.0 / (ratio * (1.0 + 5.0 * k / (6.0 * work)));
}

double predicted_speedup_unreduced(double T_b, double t_b, double T_u, double t_u, double k_u,
                                   double k_c, double B, double delta_B, double curvature_cost,
                                   double forward_cost) {
    if (!(T_b > 0.0) || !(t_b > 0.0) || !(T_u > 0.0) || !(t_u > 0.0) || !(k_u > 0.0) ||
        !(k_c >= 0.0) || !(B > 0.0) || !(curvature_cost >= 0.0) || !(forward_cost > 0.0))
        throw ValidationError("predicted_speedup_unreduced: bad arguments");
    if (!(delta_B >= 0.0 && delta_B < B))
        throw ValidationError("predicted_speedup_unreduced: need 0 <= delta_B < B");
    const double work = k_u * (B - delta_B) + k_c * B;
    if (!(work > 0.0)) throw ValidationError("predicted_speedup_unreduced: zero work term");
    const double ratio = (T_u * t_u) / (T_b * t_b);
    return 1.0 / (ratio * (1.0 + curvature_cost / (6.0 * forward_cost * work)));
}

double output_distance(const ModelSpec& spec, const ParamVector& params_a,
                       const ParamVector& params_b, std::span<const Example> probe_set) {
    if (probe_set.empty()) throw ValidationError("output_distance: empty probe set");
    double total = 0.0;
    for (const Example& ex : probe_set) {
        const std::vector<double> fa = predict(spec, params_a, ex.x);
        const std::vector<double> fb = predict(spec, params_b, ex.x);
        double sq = 0.0;
        for (std::size_t i = 0; i < fa.size(); ++i) {
            const double diff = fa[i] - fb[i];
            sq += diff * diff;
        }
        total += std::sqrt(sq);
    }
    return total;
}

} // namespace fedunlearn
