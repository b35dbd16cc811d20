#pragma once

#include <string>
#include <vector>

#include "fedunlearn/federated.hpp"

namespace fedunlearn {

enum class ReinitMode { Fresh, Warm };

const char* reinit_mode_name(ReinitMode m);
ReinitMode reinit_mode_from_name(const std::string& name);

struct UnlearnOutcome {
    ParamVector unlearned_params;
    ServerState server;
    std::vector<RoundRecord> rounds;
    double total_wall_time_ms = 0.0;
    double final_loss = 0.0;
    double final_accuracy = 0.0;
};

// Retraining on the post-deletion data with the curvature-corrected optimizer.
// Fresh mode redraws the initialization from seeds.init (the same draw the
// original training used, so a run with no deletions reproduces it exactly);
// warm mode starts from the trained parameters instead.
UnlearnOutcome run_unlearning(const std::vector<LocalDataset>& partition,
                              const std::vector<DeletionSequence>& deletions,
                              const RunSettings& settings, ReinitMode reinit,
                              const ParamVector* trained_params = nullptr);

// Retrain-from-scratch reference: identical orchestration, plain mini-batch
// SGD on the mean gradient, always from a fresh initialization.
UnlearnOutcome run_baseline_retrain(const std::vector<LocalDataset>& partition,
                                    const std::vector<DeletionSequence>& deletions,
                                    const RunSettings& settings);

} // namespace fedunlearn
