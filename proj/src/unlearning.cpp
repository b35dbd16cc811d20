#include "fedunlearn/unlearning.hpp"

#include <utility>

#include "fedunlearn/errors.hpp"

namespace fedunlearn {

const char* reinit_mode_name(ReinitMode m) { return m == ReinitMode::Fresh ? "fresh" : "warm"; }

ReinitMode reinit_mode_from_name(const std::string& name) {
    if (name == "fresh") return ReinitMode::Fresh;
    if (name == "warm") return ReinitMode::Warm;
    throw ValidationError("unknown reinit mode '" + name + "' (expected fresh or warm)");
}

namespace {

UnlearnOutcome from_run(RunResult run) {
    UnlearnOutcome out;
    out.unlearned_params = run.server.global_params;
    out.server = std::move(run.server);
    out.rounds = std::move(run.rounds);
    out.total_wall_time_ms = run.total_wall_time_ms;
    out.final_loss = run.final_loss;
    out.final_accuracy = run.final_accuracy;
    return out;
}

} // namespace

UnlearnOutcome run_unlearning(const std::vector<LocalDataset>& partition,
                              const std::vector<DeletionSequence>& deletions,
                              const RunSettings& settings, ReinitMode reinit,
                              const ParamVector* trained_params) {
    RunSettings s = settings;
    s.optimizer = OptimizerKind::Fim;
    const ParamVector* start = nullptr;
    if (reinit == ReinitMode::Warm) {
        if (!trained_params)
            throw ValidationError("run_unlearning: warm reinit needs the trained parameters");
        start = trained_params;
    }
    return from_run(run_federated(partition, deletions, s, start));
}

UnlearnOutcome run_baseline_retrain(const std::vector<LocalDataset>& partition,
                                    const std::vector<DeletionSequence>& deletions,
                                    const RunSettings& settings) {
    RunSettings s = settings;
    s.optimizer = OptimizerKind::Sgd;
    return from_run(run_federated(partition, deletions, s));
}

} // namespace fedunlearn
