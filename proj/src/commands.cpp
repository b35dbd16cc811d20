#include "fedunlearn/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "fedunlearn/checkpoint.hpp"
#include "fedunlearn/config.hpp"
#include "fedunlearn/errors.hpp"
#include "fedunlearn/report.hpp"
#include "fedunlearn/rng.hpp"
#include "fedunlearn/unlearning.hpp"

namespace fedunlearn {

namespace {

ExperimentConfig load_config_with_overrides(const CommandOptions& opt) {
    if (opt.config_path.empty()) throw ValidationError("no --config file given");
    ExperimentConfig cfg = load_config(opt.config_path);
    for (const std::string& o : opt.seed_overrides) apply_seed_override(cfg, o);
    return cfg;
}

std::string ensure_out_dir(const std::string& out_dir) {
    const std::string dir = out_dir.empty() ? "." : out_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

// Deterministic first-n/K+1 then n/K sizes; mirrors partition_iid without
// touching example contents.
std::vector<int> partition_sizes(long n, int K) {
    std::vector<int> sizes(K, static_cast<int>(n / K));
    for (int k = 0; k < static_cast<int>(n % K); ++k) sizes[k] += 1;
    return sizes;
}

} // namespace

void cmd_train(const CommandOptions& opt) {
    const ExperimentConfig cfg = load_config_with_overrides(opt);
    const std::string out_dir = ensure_out_dir(opt.out_dir);

    RunReport report;
    report.command = "train";
    report.method = optimizer_kind_name(OptimizerKind::Sgd);
    report.started_at = utc_timestamp();

    const Dataset dataset = load_dataset(cfg.dataset);
    report.config = cfg;
    report.config_hash = hash_config(cfg);
    report.dataset_hash = hash_dataset(dataset);

    const RunSettings settings = to_run_settings(cfg, OptimizerKind::Sgd, opt.threads);
    RunResult run = run_training(dataset, settings);

    Checkpoint ckpt;
    ckpt.config_hash = report.config_hash;
    ckpt.dataset_hash = report.dataset_hash;
    ckpt.model = cfg.model;
    ckpt.params = run.server.global_params;
    save_checkpoint(out_dir + "/checkpoint.bin", ckpt);

    report.rounds = std::move(run.rounds);
    report.rounds_executed = static_cast<long>(report.rounds.size());
    report.total_wall_time_ms = run.total_wall_time_ms;
    report.final_loss = run.final_loss;
    report.final_accuracy = run.final_accuracy;
    report.final_params = std::move(run.server.global_params);
    report.finished_at = utc_timestamp();
    save_report(out_dir + "/train_report.json", report);
    save_rounds_csv(out_dir + "/train_rounds.csv", report.rounds);

    std::cout << "train: " << report.rounds_executed << " rounds, final loss "
              << report.final_loss << ", wrote " << out_dir << "/checkpoint.bin\n";
}

void cmd_unlearn(const CommandOptions& opt) {
    const ExperimentConfig cfg = load_config_with_overrides(opt);
    const std::string out_dir = ensure_out_dir(opt.out_dir);
    if (opt.checkpoint_path.empty()) throw ValidationError("no --checkpoint file given");

    OptimizerKind optimizer;
    std::string method_tag;
    if (opt.method == "fim") {
        optimizer = OptimizerKind::Fim;
        method_tag = "fim";
    } else if (opt.method == "baseline") {
        optimizer = OptimizerKind::Sgd;
        method_tag = "baseline";
    } else {
        throw ValidationError("unknown --method '" + opt.method + "' (expected fim or baseline)");
    }

    const Checkpoint ckpt = load_checkpoint(opt.checkpoint_path);
    if (ckpt.config_hash != hash_config(cfg))
        throw ProvenanceError("checkpoint " + opt.checkpoint_path +
                              " was trained under a different config than " + opt.config_path);

    RunReport report;
    report.command = "unlearn";
    report.method = optimizer_kind_name(optimizer);
    report.started_at = utc_timestamp();

    const Dataset dataset = load_dataset(cfg.dataset);
    report.config = cfg;
    report.config_hash = hash_config(cfg);
    report.dataset_hash = hash_dataset(dataset);
    if (report.dataset_hash != ckpt.dataset_hash)
        throw ProvenanceError("dataset fingerprint does not match the checkpoint (expected " +
                              std::to_string(ckpt.dataset_hash) + ", got " +
                              std::to_string(report.dataset_hash) + ")");

    const std::vector<LocalDataset> partition =
        partition_iid(dataset, cfg.K, cfg.seeds.partition);
    std::vector<int> sizes(cfg.K);
    for (int k = 0; k < cfg.K; ++k) sizes[k] = static_cast<int>(partition[k].size());
    const std::vector<DeletionSequence> deletions = select_deletions(
        sizes, cfg.r, cfg.k_u, cfg.seeds.deletion, cfg.max_client_deletion_fraction);

    const RunSettings settings = to_run_settings(cfg, optimizer, opt.threads);
    UnlearnOutcome outcome =
        optimizer == OptimizerKind::Fim
            ? run_unlearning(partition, deletions, settings, cfg.reinit_mode, &ckpt.params)
            : run_baseline_retrain(partition, deletions, settings);

    report.rounds = std::move(outcome.rounds);
    report.rounds_executed = static_cast<long>(report.rounds.size());
    report.total_wall_time_ms = outcome.total_wall_time_ms;
    report.final_loss = outcome.final_loss;
    report.final_accuracy = outcome.final_accuracy;
    report.final_params = std::move(outcome.unlearned_params);
    report.finished_at = utc_timestamp();

    const std::string stem = out_dir + "/unlearn_" + method_tag;
    save_report(stem + "_report.json", report);
    save_rounds_csv(stem + "_rounds.csv", report.rounds);

    std::cout << "unlearn[" << method_tag << "]: " << report.rounds_executed
              << " rounds, final loss " << report.final_loss << ", wrote " << stem
              << "_report.json\n";
}

MetricReport cmd_compare(const std::string& report_baseline, const std::string& report_unlearned,
                         const std::string& out_dir) {
    const RunReport a = load_report(report_baseline);
    const RunReport b = load_report(report_unlearned);
    if (a.config_hash != b.config_hash)
        throw ProvenanceError("reports were produced under different configs");
    if (a.dataset_hash != b.dataset_hash)
        throw ProvenanceError("reports were produced from different datasets");

    MetricReport m;
    m.acc_baseline = 100.0 * a.final_accuracy;
    m.acc_unlearned = 100.0 * b.final_accuracy;
    m.sape = sape(m.acc_baseline, m.acc_unlearned);
    m.t_b_ms = a.total_wall_time_ms;
    m.t_u_ms = b.total_wall_time_ms;
    m.speedup_v = speedup(m.t_b_ms, m.t_u_ms);

    // Plug-in estimate: the average per-batch deletion count follows from the
    // config alone (partition sizes and the seeded deletion draw are both
    // content-free).
    const ExperimentConfig& cfg = a.config;
    const Dataset dataset = load_dataset(cfg.dataset);
    if (hash_dataset(dataset) != a.dataset_hash)
        throw ProvenanceError("dataset no longer matches the reports being compared");
    const std::vector<int> sizes = partition_sizes(static_cast<long>(dataset.size()), cfg.K);
    const std::vector<DeletionSequence> deletions = select_deletions(
        sizes, cfg.r, cfg.k_u, cfg.seeds.deletion, cfg.max_client_deletion_fraction);
    double total_deleted = 0.0;
    double unlearned_batches = 0.0;
    for (const DeletionSequence& seq : deletions) {
        total_deleted += static_cast<double>(seq.indices.size());
        unlearned_batches += std::ceil(static_cast<double>(sizes[seq.client_id]) / cfg.B);
    }
    const double delta_B = unlearned_batches > 0.0 ? total_deleted / unlearned_batches : 0.0;
    if (a.rounds_executed > 0 && b.rounds_executed > 0) {
        m.predicted_v = predicted_speedup(
            static_cast<double>(a.rounds_executed),
            a.total_wall_time_ms / static_cast<double>(a.rounds_executed),
            static_cast<double>(b.rounds_executed),
            b.total_wall_time_ms / static_cast<double>(b.rounds_executed),
            static_cast<double>(cfg.K), static_cast<double>(cfg.k_u),
            static_cast<double>(cfg.K - cfg.k_u), static_cast<double>(cfg.B), delta_B);
    } else {
        m.predicted_v = std::numeric_limits<double>::quiet_NaN();
    }

    const std::size_t probe_count = std::min<std::size_t>(1000, dataset.size());
    m.d_u = output_distance(cfg.model, a.final_params, b.final_params,
                            std::span<const Example>(dataset.data(), probe_count));

    const nlohmann::json j = metric_report_to_json(m);
    std::cout << j.dump(2) << '\n';
    if (!out_dir.empty()) {
        const std::string dir = ensure_out_dir(out_dir);
        std::ofstream out(dir + "/compare.json");
        if (!out) throw ValidationError("cannot write " + dir + "/compare.json");
        out << j.dump(2) << '\n';
    }
    return m;
}

namespace {

Example random_example(const ModelSpec& spec, std::mt19937_64& rng) {
    Example ex;
    ex.x.resize(spec.input_dim);
    for (double& v : ex.x) v = normal01(rng);
    if (spec.is_classifier())
        ex.y = static_cast<double>(uniform_below(rng, spec.num_classes));
    else
        ex.y = normal01(rng);
    return ex;
}

// Central finite difference of the batch loss, the standard against which the
// analytic gradient is judged.
std::vector<double> fd_gradient(const ModelSpec& spec, const ParamVector& params,
                                std::span<const Example> batch) {
    std::vector<double> fd(params.size());
    ParamVector work = params;
    for (std::size_t j = 0; j < params.size(); ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(params[j]));
        work[j] = params[j] + h;
        const double up = loss(spec, work, batch);
        work[j] = params[j] - h;
        const double down = loss(spec, work, batch);
        work[j] = params[j];
        fd[j] = (up - down) / (2.0 * h);
    }
    return fd;
}

} // namespace

void cmd_gradcheck(const CommandOptions& opt) {
    const ExperimentConfig cfg = load_config_with_overrides(opt);

    std::vector<ModelSpec> specs;
    specs.push_back(cfg.model);
    ModelSpec linreg;
    linreg.kind = ModelKind::LinearRegression;
    linreg.input_dim = 5;
    linreg.lambda_reg = 0.01;
    specs.push_back(linreg);
    ModelSpec softmax;
    softmax.kind = ModelKind::SoftmaxClassifier;
    softmax.input_dim = 6;
    softmax.num_classes = 4;
    softmax.lambda_reg = 0.01;
    specs.push_back(softmax);
    ModelSpec mlp;
    mlp.kind = ModelKind::Mlp1h;
    mlp.input_dim = 5;
    mlp.hidden_dim = 7;
    mlp.num_classes = 3;
    mlp.lambda_reg = 0.01;
    specs.push_back(mlp);

    auto rng = make_rng(20240811);
    for (const ModelSpec& spec : specs) {
        const int d = param_count(spec);
        double max_rel = 0.0;
        long worst_coord = 0;
        for (int trial = 0; trial < 25; ++trial) {
            ParamVector params(d);
            for (double& p : params) p = 0.5 * normal01(rng);
            std::vector<Example> batch(1 + trial % 4);
            for (Example& ex : batch) ex = random_example(spec, rng);

            std::vector<double> g = mean_gradient(spec, params, batch);
            if (opt.corrupt_gradient) g[0] += 1e-3;
            const std::vector<double> fd = fd_gradient(spec, params, batch);

            double diff_sq = 0.0, ref_sq = 0.0, worst_abs = 0.0;
            long coord = 0;
            for (int j = 0; j < d; ++j) {
                const double diff = g[j] - fd[j];
                diff_sq += diff * diff;
                ref_sq += fd[j] * fd[j];
                if (std::abs(diff) > worst_abs) {
                    worst_abs = std::abs(diff);
                    coord = j;
                }
            }
            const double rel = std::sqrt(diff_sq) / std::max(std::sqrt(ref_sq), 1e-12);
            if (rel > max_rel) {
                max_rel = rel;
                worst_coord = coord;
            }
        }
        std::printf("gradcheck %-18s max relative error %.3e\n", model_kind_name(spec.kind),
                    max_rel);
        if (!(max_rel < 1e-5))
            throw NumericError(std::string("gradient check failed for ") +
                                   model_kind_name(spec.kind) + " (relative error " +
                                   std::to_string(max_rel) + ")",
                               worst_coord);
    }

    // Curvature diagonal vs the explicitly formed outer-product average.
    const ModelSpec& spec = specs[2];
    const int d = param_count(spec);
    ParamVector params(d);
    for (double& p : params) p = 0.5 * normal01(rng);
    std::vector<Example> batch(16);
    for (Example& ex : batch) ex = random_example(spec, rng);
    const GradientBatch gb = gradient(spec, params, batch);
    const DiagFim fim = estimate_diag_fim(gb.per_sample, static_cast<int>(batch.size()));
    double max_diag_err = 0.0;
    long worst = 0;
    for (int j = 0; j < d; ++j) {
        double dense_jj = 0.0;
        for (const auto& g : gb.per_sample) dense_jj += g[j] * g[j];
        dense_jj /= static_cast<double>(batch.size());
        const double err = std::abs(dense_jj - fim.gamma[j]);
        if (err > max_diag_err) {
            max_diag_err = err;
            worst = j;
        }
    }
    std::printf("gradcheck curvature diagonal  max absolute error %.3e\n", max_diag_err);
    if (!(max_diag_err <= 1e-12))
        throw NumericError("curvature diagonal disagrees with the dense outer product",
                           worst);
    std::printf("gradcheck: all checks passed\n");
}

} // namespace fedunlearn
