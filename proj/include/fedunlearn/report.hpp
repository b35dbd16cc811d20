#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedunlearn/config.hpp"
#include "fedunlearn/federated.hpp"
#include "fedunlearn/metrics.hpp"

namespace fedunlearn {

// One run's machine-readable record: the config echo (replaying it reproduces
// the run, timing fields aside), provenance hashes, the per-round log and the
// final model. Written as JSON plus a per-round CSV for plotting.
struct RunReport {
    std::string command;
    std::string method;
    ExperimentConfig config;
    std::uint64_t config_hash = 0;
    std::uint64_t dataset_hash = 0;
    std::vector<RoundRecord> rounds;
    long rounds_executed = 0;
    double total_wall_time_ms = 0.0;
    double final_loss = 0.0;
    double final_accuracy = 0.0;
    ParamVector final_params;
    std::string started_at;
    std::string finished_at;
};

std::string utc_timestamp();

void save_report(const std::string& json_path, const RunReport& report);
void save_rounds_csv(const std::string& csv_path, const std::vector<RoundRecord>& rounds);
RunReport load_report(const std::string& json_path);

nlohmann::json metric_report_to_json(const MetricReport& m);

} // namespace fedunlearn
