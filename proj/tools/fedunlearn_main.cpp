#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "fedunlearn/commands.hpp"
#include "fedunlearn/errors.hpp"

namespace {

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void add_common(CLI::App* cmd, fedunlearn::CommandOptions& opt) {
    cmd->add_option("--config", opt.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out-dir", opt.out_dir, "output directory")
        ->envname("FEDUNLEARN_OUT_DIR")
        ->default_val(".");
    cmd->add_option("--threads", opt.threads, "worker thread cap")
        ->default_val(default_threads());
    cmd->add_option("--seed-override", opt.seed_overrides,
                    "override a named seed, e.g. init=7 (repeatable)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated training with curvature-guided rapid retraining after data deletion"};
    app.require_subcommand(1);

    fedunlearn::CommandOptions train_opt;
    CLI::App* train = app.add_subcommand("train", "run federated training, write a checkpoint");
    add_common(train, train_opt);

    fedunlearn::CommandOptions unlearn_opt;
    CLI::App* unlearn =
        app.add_subcommand("unlearn", "delete data and retrain from the checkpoint's config");
    add_common(unlearn, unlearn_opt);
    unlearn->add_option("--checkpoint", unlearn_opt.checkpoint_path, "trained checkpoint")
        ->required();
    unlearn->add_option("--method", unlearn_opt.method, "fim or baseline")->default_val("fim");

    fedunlearn::CommandOptions baseline_opt;
    CLI::App* baseline =
        app.add_subcommand("baseline", "shorthand for unlearn --method baseline");
    add_common(baseline, baseline_opt);
    baseline->add_option("--checkpoint", baseline_opt.checkpoint_path, "trained checkpoint")
        ->required();

    std::string report_a, report_b, compare_out;
    CLI::App* compare = app.add_subcommand(
        "compare", "compute closeness and speedup metrics from two run reports");
    compare->add_option("report_baseline", report_a, "baseline-side report JSON")->required();
    compare->add_option("report_unlearned", report_b, "unlearned-side report JSON")->required();
    compare->add_option("--out-dir", compare_out, "output directory")
        ->envname("FEDUNLEARN_OUT_DIR")
        ->default_val(".");

    fedunlearn::CommandOptions gradcheck_opt;
    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "verify analytic gradients against finite differences");
    gradcheck->add_option("--config", gradcheck_opt.config_path, "experiment config (JSON)")
        ->required();
    gradcheck->add_option("--seed-override", gradcheck_opt.seed_overrides,
                          "override a named seed, e.g. init=7 (repeatable)");
    gradcheck->add_flag("--corrupt-gradient", gradcheck_opt.corrupt_gradient,
                        "deliberately break one coordinate (self-test of the check)")
        ->group("");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) fedunlearn::cmd_train(train_opt);
        if (unlearn->parsed()) fedunlearn::cmd_unlearn(unlearn_opt);
        if (baseline->parsed()) {
            baseline_opt.method = "baseline";
            fedunlearn::cmd_unlearn(baseline_opt);
        }
        if (compare->parsed()) fedunlearn::cmd_compare(report_a, report_b, compare_out);
        if (gradcheck->parsed()) fedunlearn::cmd_gradcheck(gradcheck_opt);
    } catch (const fedunlearn::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const fedunlearn::NumericError& e) {
        std::cerr << "numerical error: " << e.what();
        if (e.index >= 0) std::cerr << " (coordinate " << e.index << ")";
        std::cerr << '\n';
        return 2;
    } catch (const fedunlearn::ProvenanceError& e) {
        std::cerr << "provenance error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
