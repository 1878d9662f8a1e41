#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "banditcv/harness.hpp"
#include "config.hpp"
#include "svg_plot.hpp"
#include "verify.hpp"

namespace {

using namespace banditcv;
using namespace banditcv::cli;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerifyFailed = 3;

uint64_t resolve_seed(bool seed_set, uint64_t cli_seed, const ExperimentSpec& spec) {
    if (seed_set) return cli_seed;
    if (spec.master_seed != 0) return spec.master_seed;
    if (const char* env = std::getenv("BANDIT_CV_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw ConfigError("BANDIT_CV_SEED must be an unsigned integer");
        }
    }
    return 0;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            bool seed_set, uint64_t seed, const std::string& out_dir, int threads) {
    ExperimentSpec spec;
    try {
        spec = load_config(config_path);
        for (const auto& ov : overrides) apply_override(spec, ov);
        spec.master_seed = resolve_seed(seed_set, seed, spec);
        if (!out_dir.empty()) spec.out_dir = out_dir;
        if (spec.out_dir.empty()) spec.out_dir = "results/" + spec.name;
        if (threads > 0) spec.threads = threads;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const ExperimentResult result = run_experiment(spec);
        std::printf("%-28s %12s %12s\n", "algorithm", "final_mean", "ci_half");
        for (const auto& tr : result.traces) {
            std::string label = tr.algorithm;
            if (tr.swept) {
                char buf[48];
                std::snprintf(buf, sizeof(buf), " [%s=%g]", to_string(spec.sweep).c_str(),
                              tr.sweep_value);
                label += buf;
            }
            std::printf("%-28s %12.4f %12.4f\n", label.c_str(), tr.final_mean(),
                        tr.final_ci_half());
        }
        std::printf("results written to %s\n", spec.out_dir.c_str());
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_plot(const std::string& results_dir, std::string out_file) {
    try {
        const std::vector<Series> series = load_results_dir(results_dir);
        if (series.empty()) {
            std::cerr << "plot error: no result files in " << results_dir << "\n";
            return kExitConfig;
        }
        if (out_file.empty())
            out_file = (std::filesystem::path(results_dir) / "regret.svg").string();
        std::ofstream out(out_file, std::ios::binary);
        if (!out) {
            std::cerr << "plot error: cannot write " << out_file << "\n";
            return kExitRuntime;
        }
        out << render_regret_svg(series);
        std::printf("wrote %s (%zu series)\n", out_file.c_str(), series.size());
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "plot error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_verify(bool quick, const std::string& fault) {
    VerifyOptions options;
    options.quick = quick;
    std::string fault_name = fault;
    if (fault_name.empty())
        if (const char* env = std::getenv("BANDIT_CV_FAULT")) fault_name = env;
    if (fault_name == "beta-dof") options.fault_beta_dof = true;

    const std::vector<CheckResult> results = run_verification(options);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("[%s] %-28s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    std::printf("%s\n", all_pass ? "all checks passed" : "verification FAILED");
    return all_pass ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bandits with correlated auxiliary feedback: experiments and checks"};
    app.require_subcommand(1);

    std::string config_path, out_dir, results_dir, plot_out, fault;
    std::vector<std::string> overrides;
    uint64_t seed = 0;
    int threads = 0;
    bool quick = false;

    CLI::App* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    run->add_option("--config", config_path, "Path to the experiment config")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "Master seed (overrides config)");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--override", overrides, "key=value config override (repeatable)");
    run->add_option("--threads", threads, "Replication worker threads");

    CLI::App* plot = app.add_subcommand("plot", "Render an SVG chart from result CSVs");
    plot->add_option("dir", results_dir, "Results directory")->required();
    plot->add_option("--out", plot_out, "Output SVG path");

    CLI::App* verify = app.add_subcommand("verify", "Run the property-based check suite");
    verify->add_flag("--quick", quick, "Reduced Monte Carlo budget, looser tolerances");
    verify->add_option("--inject-fault", fault, "")->group("");  // hidden test hook

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return cmd_run(config_path, overrides, seed_opt->count() > 0, seed, out_dir, threads);
    if (plot->parsed()) return cmd_plot(results_dir, plot_out);
    if (verify->parsed()) return cmd_verify(quick, fault);
    return kExitConfig;
}
