#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedunlearn/deletion.hpp"
#include "fedunlearn/fim.hpp"
#include "fedunlearn/model.hpp"
#include "fedunlearn/types.hpp"

namespace fedunlearn {

enum class OptimizerKind { Sgd, Fim };
enum class AggregationMode { FedAvg, TwoGroup };

const char* optimizer_kind_name(OptimizerKind k);
OptimizerKind optimizer_kind_from_name(const std::string& name);
const char* aggregation_mode_name(AggregationMode m);
AggregationMode aggregation_mode_from_name(const std::string& name);

// Every stochastic choice in a run traces to exactly one of these.
// partition also seeds the per-round participant draw (tagged, so the streams
// stay distinct); batching is mixed with the client id for per-client streams.
struct Seeds {
    std::uint64_t init = 1;
    std::uint64_t partition = 2;
    std::uint64_t deletion = 3;
    std::uint64_t batching = 4;
};

struct RunSettings {
    ModelSpec model;
    int K = 10;
    double q = 1.0;
    int E_local = 1;
    int B = 128;
    double eta = 0.001;
    long T = 200;
    OptimizerKind optimizer = OptimizerKind::Fim;
    int block_size = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_stab = 1e-8;
    bool paper_literal_scaling = false;
    BatchingMode batching = BatchingMode::Mask;
    AggregationMode aggregation = AggregationMode::FedAvg;
    bool uniform_weights = false;
    // When set, rounds stop early once the global loss on the remaining
    // training data drops to this value or below.
    std::optional<double> loss_threshold;
    Seeds seeds;
    int threads = 1;
};

struct ClientState {
    int id = 0;
    Role role = Role::Learned;
    LocalDataset data;
    std::vector<int> deleted_indices;
    int original_n = 0;
    ParamVector params;
    FimMomentState opt_state;
    std::uint64_t rng_seed = 0;
    // Mask-mode batch layout is round-independent, so it is cut once.
    std::optional<RoundBatches> batch_cache;
};

struct ServerState {
    ParamVector global_params;
    std::vector<double> weights;
    long round = 0;
};

struct RoundRecord {
    long round = 0;
    double global_loss = 0.0;
    double global_accuracy = 0.0;
    double wall_time_ms = 0.0;
    std::vector<double> per_client_update_norms;
};

struct ClientUpdate {
    int id = 0;
    ParamVector params;
    double weight = 0.0;
    double update_norm = 0.0;
    Role role = Role::Learned;
};

struct LocalResult {
    ParamVector params;
    bool skipped = false;
    double update_norm = 0.0;
};

// Deterministic shuffle by seed, then a contiguous split into K parts whose
// sizes differ by at most one (earlier parts take the remainder).
std::vector<LocalDataset> partition_iid(const Dataset& dataset, int K, std::uint64_t seed);

// One client's work for one round: copy the broadcast params, run E_local
// epochs over its mini-batches with the configured optimizer, return the new
// params and the L2 norm of the move. A client with no data left is skipped.
LocalResult local_training(ClientState& client, const ParamVector& global_params,
                           const RunSettings& s, long round);

// Weighted combination of client models, reduced in ascending client-id order
// so any input ordering gives bitwise-identical output. FedAvg mode is the
// weighted mean anchored at the lowest-id update (equal inputs therefore
// aggregate to themselves exactly); two-group mode is the literal two-term
// form: sum over each role group of (1/(K_g * sum p)) * sum p_k w_k.
ParamVector aggregate(std::vector<ClientUpdate> updates, AggregationMode mode);

struct RunResult {
    ServerState server;
    std::vector<RoundRecord> rounds;
    double total_wall_time_ms = 0.0;
    // Final global loss/accuracy over the remaining training data, evaluated
    // even when T=0 (accuracy is NaN for regression models).
    double final_loss = 0.0;
    double final_accuracy = 0.0;
};

// Shared round loop behind training, unlearning and the retrain baseline:
// applies the deletion sequences to the partition, builds clients, starts from
// start_params (or a fresh seeds.init draw when null), and runs up to T rounds
// of broadcast / local training / aggregation with the configured stop rule.
RunResult run_federated(const std::vector<LocalDataset>& partition,
                        const std::vector<DeletionSequence>& deletions, const RunSettings& s,
                        const ParamVector* start_params = nullptr);

// partition_iid + run_federated with no deletions.
RunResult run_training(const Dataset& dataset, const RunSettings& s);

} // namespace fedunlearn
