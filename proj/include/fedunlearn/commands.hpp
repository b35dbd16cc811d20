#pragma once

#include <string>
#include <vector>

#include "fedunlearn/metrics.hpp"

namespace fedunlearn {

struct CommandOptions {
    std::string config_path;
    std::string checkpoint_path;
    std::string method = "fim";
    std::string out_dir = ".";
    int threads = 1;
    std::vector<std::string> seed_overrides;
    bool corrupt_gradient = false;
};

// Each command throws ValidationError / NumericError / ProvenanceError on
// failure; the CLI maps those to exit codes 1 / 2 / 3.

// Runs federated training and writes checkpoint.bin, train_report.json and
// train_rounds.csv into out_dir.
void cmd_train(const CommandOptions& opt);

// Selects and applies deletions, retrains with the chosen method against the
// checkpoint's provenance, and writes unlearn_<method>_report.json plus the
// matching rounds CSV.
void cmd_unlearn(const CommandOptions& opt);

// Reads two run reports (baseline side first), emits the comparison metrics
// as one JSON object on stdout and as compare.json in out_dir.
MetricReport cmd_compare(const std::string& report_baseline, const std::string& report_unlearned,
                         const std::string& out_dir);

// Finite-difference check of the analytic gradients plus a dense cross-check
// of the curvature diagonal, over the configured model and the built-in model
// kinds. corrupt_gradient deliberately breaks one coordinate to prove the
// check can fail.
void cmd_gradcheck(const CommandOptions& opt);

} // namespace fedunlearn
