#include "fedunlearn/federated.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "fedunlearn/errors.hpp"
#include "fedunlearn/rng.hpp"

namespace fedunlearn {

const char* optimizer_kind_name(OptimizerKind k) {
    return k == OptimizerKind::Sgd ? "sgd-baseline" : "fim";
}

OptimizerKind optimizer_kind_from_name(const std::string& name) {
    if (name == "sgd-baseline" || name == "sgd") return OptimizerKind::Sgd;
    if (name == "fim") return OptimizerKind::Fim;
    throw ValidationError("unknown optimizer '" + name + "' (expected fim or sgd-baseline)");
}

const char* aggregation_mode_name(AggregationMode m) {
    return m == AggregationMode::FedAvg ? "fedavg" : "two-group";
}

AggregationMode aggregation_mode_from_name(const std::string& name) {
    if (name == "fedavg") return AggregationMode::FedAvg;
    if (name == "two-group") return AggregationMode::TwoGroup;
    throw ValidationError("unknown aggregation mode '" + name + "' (expected fedavg or two-group)");
}

std::vector<LocalDataset> partition_iid(const Dataset& dataset, int K, std::uint64_t seed) {
    if (K <= 0) throw ValidationError("partition_iid: K must be positive");
    if (static_cast<int>(dataset.size()) < K)
        throw ValidationError("partition_iid: dataset smaller than client count");
    Dataset shuffled = dataset;
    auto rng = make_rng(seed);
    shuffle_vec(shuffled, rng);
    const int n = static_cast<int>(shuffled.size());
    const int base = n / K;
    const int extra = n % K;
    std::vector<LocalDataset> parts(K);
    int pos = 0;
    for (int k = 0; k < K; ++k) {
        const int size = base + (k < extra ? 1 : 0);
        parts[k].assign(shuffled.begin() + pos, shuffled.begin() + pos + size);
        pos += size;
    }
    return parts;
}

LocalResult local_training(ClientState& client, const ParamVector& global_params,
                           const RunSettings& s, long round) {
    if (client.data.empty()) return {global_params, true, 0.0};

    client.params = global_params;
    const RoundBatches* layout = nullptr;
    RoundBatches fresh;
    if (s.batching == BatchingMode::Mask) {
        if (!client.batch_cache)
            client.batch_cache = make_batches(client.data, client.deleted_indices,
                                              client.original_n, s.B, s.batching,
                                              client.rng_seed, round);
        layout = &*client.batch_cache;
    } else {
        fresh = make_batches(client.data, client.deleted_indices, client.original_n, s.B,
                             s.batching, client.rng_seed, round);
        layout = &fresh;
    }

    for (int epoch = 0; epoch < s.E_local; ++epoch) {
        for (const MiniBatch& mb : layout->batches) {
            const int eff = mb.end - mb.begin;
            const std::span<const Example> batch(layout->order.data() + mb.begin,
                                                 static_cast<std::size_t>(eff));
            if (s.optimizer == OptimizerKind::Sgd) {
                const std::vector<double> g = mean_gradient(s.model, client.params, batch);
                for (std::size_t j = 0; j < client.params.size(); ++j)
                    client.params[j] -= s.eta * g[j];
            } else {
                const GradientBatch gb = gradient(s.model, client.params, batch);
                const DiagFim fim = s.block_size > 1
                                        ? estimate_block_fim(gb.per_sample, eff, s.block_size)
                                        : estimate_diag_fim(gb.per_sample, eff);
                client.opt_state = update_moments(std::move(client.opt_state), gb.mean, fim);
                client.params = apply_update(client.params, client.opt_state, s.eta, eff,
                                             s.paper_literal_scaling);
            }
        }
    }

    double norm_sq = 0.0;
    for (std::size_t j = 0; j < client.params.size(); ++j) {
        const double diff = client.params[j] - global_params[j];
        norm_sq += diff * diff;
    }
    return {client.params, false, std::sqrt(norm_sq)};
}

ParamVector aggregate(std::vector<ClientUpdate> updates, AggregationMode mode) {
    if (updates.empty()) throw ValidationError("aggregate: no client updates");
    std::sort(updates.begin(), updates.end(),
              [](const ClientUpdate& a, const ClientUpdate& b) { return a.id < b.id; });
    const std::size_t d = updates[0].params.size();
    double total_weight = 0.0;
    for (const ClientUpdate& u : updates) {
        if (u.params.size() != d) throw ValidationError("aggregate: parameter length mismatch");
        if (u.weight < 0.0) throw ValidationError("aggregate: negative weight");
        total_weight += u.weight;
    }
    if (!(total_weight > 0.0)) throw ValidationError("aggregate: all weights are zero");

    if (mode == AggregationMode::FedAvg) {
        // Anchor at the first update so that all-equal inputs come back
        // unchanged bit for bit.
        ParamVector out = updates[0].params;
        for (std::size_t k = 1; k < updates.size(); ++k) {
            const double alpha = updates[k].weight / total_weight;
            for (std::size_t j = 0; j < d; ++j)
                out[j] += alpha * (updates[k].params[j] - updates[0].params[j]);
        }
        return out;
    }

    // Two-group form: each role group contributes
    // (1 / (group size * group weight sum)) * sum_k p_k w_k, and the two terms
    // add. A missing group simply contributes nothing.
    ParamVector out(d, 0.0);
    for (Role role : {Role::Learned, Role::Unlearned}) {
        double group_weight = 0.0;
        long group_count = 0;
        for (const ClientUpdate& u : updates) {
            if (u.role != role) continue;
            group_weight += u.weight;
            group_count += 1;
        }
        if (group_count == 0) continue;
        if (!(group_weight > 0.0))
            throw ValidationError("aggregate: a role group has zero total weight");
        const double scale = 1.0 / (static_cast<double>(group_count) * group_weight);
        for (const ClientUpdate& u : updates) {
            if (u.role != role) continue;
            for (std::size_t j = 0; j < d; ++j) out[j] += scale * u.weight * u.params[j];
        }
    }
    return out;
}

RunResult run_federated(const std::vector<LocalDataset>& partition,
                        const std::vector<DeletionSequence>& deletions, const RunSettings& s,
                        const ParamVector* start_params) {
    validate_spec(s.model);
    const int K = static_cast<int>(partition.size());
    if (K < 1) throw ValidationError("run_federated: empty partition");
    if (s.K != K)
        throw ValidationError("run_federated: settings.K=" + std::to_string(s.K) +
                              " but partition has " + std::to_string(K) + " parts");
    if (s.E_local < 1) throw ValidationError("run_federated: E_local must be >= 1");
    if (s.B < 1) throw ValidationError("run_federated: batch size must be >= 1");
    if (s.T < 0) throw ValidationError("run_federated: negative round count");
    if (!(s.q > 0.0 && s.q <= 1.0))
        throw ValidationError("run_federated: participation fraction must lie in (0, 1]");
    const int d = param_count(s.model);
    if (s.optimizer == OptimizerKind::Fim && s.block_size > d)
        throw ValidationError("run_federated: block size exceeds parameter count");

    std::vector<ClientState> clients(K);
    for (int k = 0; k < K; ++k) {
        ClientState& c = clients[k];
        c.id = k;
        c.original_n = static_cast<int>(partition[k].size());
        const DeletionSequence* seq = nullptr;
        for (const DeletionSequence& ds : deletions)
            if (ds.client_id == k) seq = &ds;
        if (seq && !seq->indices.empty()) {
            c.role = Role::Unlearned;
            c.deleted_indices = seq->indices;
            c.data = apply_deletion(partition[k], *seq);
        } else {
            c.role = Role::Learned;
            c.data = partition[k];
        }
        c.rng_seed = mix_seed(s.seeds.batching, static_cast<std::uint64_t>(k));
        if (s.optimizer == OptimizerKind::Fim)
            c.opt_state = make_moment_state(d, s.beta1, s.beta2, s.eps_stab);
    }

    LocalDataset all_remaining;
    for (const ClientState& c : clients)
        all_remaining.insert(all_remaining.end(), c.data.begin(), c.data.end());
    if (all_remaining.empty()) throw ValidationError("run_federated: no training data remains");

    ServerState server;
    server.global_params = start_params ? *start_params : init_params(s.model, s.seeds.init);
    if (static_cast<int>(server.global_params.size()) != d)
        throw ValidationError("run_federated: start parameter length mismatch");
    server.weights.resize(K);
    for (int k = 0; k < K; ++k)
        server.weights[k] = s.uniform_weights ? 1.0 : static_cast<double>(clients[k].data.size());

    const int participants_per_round =
        std::min(K, std::max(1, static_cast<int>(std::llround(s.q * K))));
    const std::uint64_t participation_seed = mix_seed(s.seeds.partition, 0x706172746963ULL);
    const int threads = std::max(1, s.threads);

    RunResult result;
    for (long t = 0; t < s.T; ++t) {
        const auto tic = std::chrono::steady_clock::now();

        std::vector<int> participating;
        if (participants_per_round >= K) {
            participating.resize(K);
            for (int k = 0; k < K; ++k) participating[k] = k;
        } else {
            auto rng = make_rng(mix_seed(participation_seed, static_cast<std::uint64_t>(t)));
            participating = sample_without_replacement(K, participants_per_round, rng);
            std::sort(participating.begin(), participating.end());
        }

        std::vector<LocalResult> locals(participating.size());
        auto train_chunk = [&](std::size_t tid) {
            for (std::size_t i = tid; i < participating.size(); i += threads)
                locals[i] =
                    local_training(clients[participating[i]], server.global_params, s, t);
        };
        if (threads > 1 && participating.size() > 1) {
            std::vector<std::thread> pool;
            for (int w = 1; w < threads; ++w) pool.emplace_back(train_chunk, w);
            train_chunk(0);
            for (std::thread& th : pool) th.join();
        } else {
            train_chunk(0);
        }

        std::vector<ClientUpdate> updates;
        std::vector<double> norms(participating.size(), 0.0);
        for (std::size_t i = 0; i < participating.size(); ++i) {
            norms[i] = locals[i].update_norm;
            if (locals[i].skipped) continue;
            updates.push_back({participating[i], std::move(locals[i].params),
                               server.weights[participating[i]], locals[i].update_norm,
                               clients[participating[i]].role});
        }
        server.global_params = aggregate(std::move(updates), s.aggregation);
        server.round = t + 1;

        const auto toc = std::chrono::steady_clock::now();
        const double wall_ms =
            std::chrono::duration<double, std::milli>(toc - tic).count();

        RoundRecord rec;
        rec.round = t;
        rec.global_loss = loss(s.model, server.global_params, all_remaining);
        rec.global_accuracy = s.model.is_classifier()
                                  ? accuracy(s.model, server.global_params, all_remaining)
                                  : std::numeric_limits<double>::quiet_NaN();
        rec.wall_time_ms = wall_ms;
        rec.per_client_update_norms = std::move(norms);
        result.rounds.push_back(std::move(rec));
        result.total_wall_time_ms += wall_ms;

        if (s.loss_threshold && result.rounds.back().global_loss <= *s.loss_threshold) break;
    }
    result.final_loss = loss(s.model, server.global_params, all_remaining);
    result.final_accuracy = s.model.is_classifier()
                                ? accuracy(s.model, server.global_params, all_remaining)
                                : std::numeric_limits<double>::quiet_NaN();
    result.server = std::move(server);
    return result;
}

RunResult run_training(const Dataset& dataset, const RunSettings& s) {
    const std::vector<LocalDataset> partition = partition_iid(dataset, s.K, s.seeds.partition);
    return run_federated(partition, {}, s);
}

} // namespace fedunlearn
