#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "banditcv/algorithms.hpp"
#include "banditcv/environments.hpp"

namespace banditcv {

enum class SweepAxis { none, bias, history, sigma_v };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& s);

struct AlgorithmSpec {
    std::string name;  // display label, e.g. "OFUL-AF"
    VariantConfig config;
};

struct ExperimentSpec {
    std::string name = "experiment";
    SettingKind setting = SettingKind::linear;
    double sigma_v2 = 0.01;
    double sigma_w2 = 0.01;
    bool coupled = true;
    int dim = 5;           // linear setting only
    int num_actions = 100; // linear setting only
    int horizon = 5000;
    int replications = 50;
    std::vector<AlgorithmSpec> algorithms;
    SweepAxis sweep = SweepAxis::none;
    std::vector<double> sweep_values;
    uint64_t master_seed = 0;
    int threads = 0;  // 0 = hardware concurrency
    bool fixed_instance = false;
    std::string out_dir;  // empty: keep results in memory only
};

// Per-replication cumulative regret, plus the normal-approximation summary.
struct RegretTrace {
    std::vector<std::vector<double>> cum_regret;  // [replication][round]
};

struct TraceSummary {
    std::vector<double> mean;
    std::vector<double> ci_half;  // 1.96 sd / sqrt(R)
    bool single_replication = false;
};

TraceSummary aggregate(const RegretTrace& trace);

struct TraceResult {
    std::string algorithm;
    bool swept = false;
    double sweep_value = 0.0;
    RegretTrace trace;
    TraceSummary summary;
    double wall_ms = 0.0;

    double final_mean() const { return summary.mean.back(); }
    double final_ci_half() const { return summary.ci_half.back(); }
};

struct ExperimentResult {
    std::vector<TraceResult> traces;

    const TraceResult& find(const std::string& algorithm) const;
    const TraceResult& find(const std::string& algorithm, double sweep_value) const;
};

// Runs every (algorithm, sweep point, replication) cell. Deterministic given
// the spec: replication streams are keyed on (master_seed, replication, round)
// so every algorithm inside one replication sees the same instance, contexts,
// and reward noise. Writes CSVs + manifest when out_dir is set.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Named sweeps with the paper's value lists as defaults.
ExperimentResult sweep_correlation(ExperimentSpec spec,
                                   std::vector<double> sigma_v = {0.3, 0.2, 0.1528, 0.1, 0.0655});
ExperimentResult sweep_bias(ExperimentSpec spec,
                            std::vector<double> biases = {1.0, 0.2, 0.1, 0.07, 0.05});
ExperimentResult sweep_history(ExperimentSpec spec,
                               std::vector<double> sizes = {5, 7, 10, 15, 20});

// The instance a given replication sees (exposed so tests can pair against it).
ProblemInstance replication_instance(const ExperimentSpec& spec, double sigma_v2_override,
                                     int replication);

std::string manifest_json(const ExperimentSpec& spec);
std::string trace_csv_filename(const std::string& algorithm, SweepAxis axis, bool swept,
                               double sweep_value);
void write_results(const ExperimentSpec& spec, const ExperimentResult& result);

}  // namespace banditcv
