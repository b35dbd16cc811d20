#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedunlearn/data.hpp"
#include "fedunlearn/federated.hpp"
#include "fedunlearn/model.hpp"
#include "fedunlearn/unlearning.hpp"

#include "json.hpp"

namespace fedunlearn {

struct DatasetSpec {
    enum class Source { Synth, Csv, Idx };
    Source source = Source::Synth;

    // synth: well-specified softmax data at deterministically drawn true
    // parameters (standard normal scaled by param_scale, seeded by data_seed).
    int n = 1000;
    int d = 10;
    int classes = 3;
    double param_scale = 1.0;
    std::uint64_t data_seed = 11;

    // csv
    std::string path;
    CsvSchema schema;

    // idx
    std::string images;
    std::string labels;
};

struct StopRule {
    std::optional<double> loss_threshold;
};

struct ExperimentConfig {
    ModelSpec model;
    DatasetSpec dataset;
    int K = 10;
    double q = 1.0;
    int E_local = 1;
    int B = 128;
    double eta = 0.001;
    long T = 200;
    double r = 0.01;
    int k_u = 1;
    int block_size = 3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_stab = 1e-8;
    bool paper_literal_scaling = false;
    BatchingMode batching_mode = BatchingMode::Mask;
    ReinitMode reinit_mode = ReinitMode::Fresh;
    AggregationMode aggregation = AggregationMode::FedAvg;
    bool uniform_weights = false;
    double max_client_deletion_fraction = 0.5;
    StopRule stop;
    Seeds seeds;
};

// Fail-closed parse: unknown keys, type mismatches and out-of-range values
// are all collected and reported together in one ValidationError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Canonical echo of the config (every field explicit, keys sorted by the JSON
// library). Feeding it back through config_from_json reproduces the struct.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Fingerprint of the canonical echo; checkpoints and reports carry it so a
// replay against a different config is refused.
std::uint64_t hash_config(const ExperimentConfig& cfg);

// Applies "name=value" to the named seed (init, partition, deletion,
// batching).
void apply_seed_override(ExperimentConfig& cfg, const std::string& override_text);

// Materializes the configured dataset (generating or loading it).
Dataset load_dataset(const DatasetSpec& spec);

// The true parameters behind a synth dataset spec.
ParamVector synth_true_params(const DatasetSpec& spec);

RunSettings to_run_settings(const ExperimentConfig& cfg, OptimizerKind optimizer, int threads);

} // namespace fedunlearn
