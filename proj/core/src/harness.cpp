#include "banditcv/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace banditcv {

namespace {

// stream tags for seed derivation
constexpr uint64_t kInstanceStream = 1;
constexpr uint64_t kContextStream = 2;
constexpr uint64_t kNoiseStream = 3;
constexpr uint64_t kExtraStream = 4;
constexpr uint64_t kHistoryStream = 5;

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string sanitize_filename(const std::string& s) {
    std::string out;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '-');
    }
    return out;
}

void validate(const ExperimentSpec& spec) {
    if (spec.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (spec.replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (spec.algorithms.empty()) throw std::invalid_argument("algorithms must be nonempty");
    if (spec.sweep != SweepAxis::none && spec.sweep_values.empty())
        throw std::invalid_argument("sweep_values must be nonempty when a sweep axis is set");
    if (spec.setting == SettingKind::linear && spec.num_actions < 2)
        throw std::invalid_argument("num_actions must be >= 2");
    for (const auto& algo : spec.algorithms)
        if (algo.name.empty()) throw std::invalid_argument("algorithm name must be nonempty");
}

bool axis_applies(SweepAxis axis, Variant variant) {
    switch (axis) {
        case SweepAxis::none: return false;
        case SweepAxis::bias: return variant == Variant::be;
        case SweepAxis::history: return variant == Variant::eh;
        case SweepAxis::sigma_v: return true;
    }
    return false;
}

struct TracePlan {
    AlgorithmSpec algo;
    bool swept = false;
    double sweep_value = 0.0;
    double sigma_v2 = 0.0;
};

std::vector<TracePlan> plan_traces(const ExperimentSpec& spec) {
    std::vector<TracePlan> plans;
    for (const auto& algo : spec.algorithms) {
        if (spec.sweep == SweepAxis::none || !axis_applies(spec.sweep, algo.config.variant)) {
            plans.push_back({algo, false, 0.0, spec.sigma_v2});
            continue;
        }
        for (double value : spec.sweep_values) {
            TracePlan plan{algo, true, value, spec.sigma_v2};
            switch (spec.sweep) {
                case SweepAxis::bias: plan.algo.config.bias = value; break;
                case SweepAxis::history:
                    plan.algo.config.history_size = static_cast<int>(std::lround(value));
                    break;
                case SweepAxis::sigma_v: plan.sigma_v2 = value * value; break;
                case SweepAxis::none: break;
            }
            plans.push_back(std::move(plan));
        }
    }
    return plans;
}

}  // namespace

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::none: return "none";
        case SweepAxis::bias: return "bias";
        case SweepAxis::history: return "history";
        case SweepAxis::sigma_v: return "sigma_v";
    }
    throw std::logic_error("unknown SweepAxis");
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "none") return SweepAxis::none;
    if (s == "bias") return SweepAxis::bias;
    if (s == "history") return SweepAxis::history;
    if (s == "sigma_v") return SweepAxis::sigma_v;
    throw std::invalid_argument("unknown sweep axis: " + s);
}

TraceSummary aggregate(const RegretTrace& trace) {
    if (trace.cum_regret.empty()) throw std::invalid_argument("aggregate: no replications");
    const size_t rounds = trace.cum_regret.front().size();
    const size_t reps = trace.cum_regret.size();
    TraceSummary summary;
    summary.single_replication = reps == 1;
    summary.mean.assign(rounds, 0.0);
    summary.ci_half.assign(rounds, 0.0);
    for (const auto& rep : trace.cum_regret) {
        if (rep.size() != rounds) throw std::invalid_argument("aggregate: ragged trace");
        for (size_t t = 0; t < rounds; ++t) summary.mean[t] += rep[t];
    }
    for (double& m : summary.mean) m /= static_cast<double>(reps);
    if (reps > 1) {
        for (size_t t = 0; t < rounds; ++t) {
            double ss = 0.0;
            for (const auto& rep : trace.cum_regret) {
                const double d = rep[t] - summary.mean[t];
                ss += d * d;
            }
            const double sd = std::sqrt(ss / static_cast<double>(reps - 1));
            summary.ci_half[t] = 1.96 * sd / std::sqrt(static_cast<double>(reps));
        }
    }
    return summary;
}

const TraceResult& ExperimentResult::find(const std::string& algorithm) const {
    for (const auto& tr : traces)
        if (tr.algorithm == algorithm && !tr.swept) return tr;
    throw std::out_of_range("no trace for algorithm " + algorithm);
}

const TraceResult& ExperimentResult::find(const std::string& algorithm,
                                          double sweep_value) const {
    for (const auto& tr : traces)
        if (tr.algorithm == algorithm && tr.swept &&
            std::abs(tr.sweep_value - sweep_value) < 1e-12)
            return tr;
    throw std::out_of_range("no trace for algorithm " + algorithm + " at requested sweep value");
}

ProblemInstance replication_instance(const ExperimentSpec& spec, double sigma_v2_override,
                                     int replication) {
    const uint64_t seed = derive_seed(
        spec.master_seed,
        {kInstanceStream, spec.fixed_instance ? 0ULL : static_cast<uint64_t>(replication)});
    switch (spec.setting) {
        case SettingKind::linear: {
            if (spec.coupled)
                return make_linear_instance(seed, spec.dim, sigma_v2_override, spec.sigma_w2,
                                            spec.num_actions);
            return make_uncorrelated_linear_instance(seed, spec.dim, sigma_v2_override,
                                                     spec.sigma_w2, spec.num_actions);
        }
        case SettingKind::linear_contextual: {
            ProblemInstance inst =
                make_linear_contextual_instance(seed, sigma_v2_override, spec.sigma_w2);
            inst.coupled = spec.coupled;
            return inst;
        }
        case SettingKind::nonlinear_contextual: {
            ProblemInstance inst =
                make_nonlinear_contextual_instance(seed, sigma_v2_override, spec.sigma_w2);
            inst.coupled = spec.coupled;
            return inst;
        }
    }
    throw std::logic_error("unknown setting");
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    validate(spec);
    const std::vector<TracePlan> plans = plan_traces(spec);

    // one gate table per dof_offset; delta is fixed per setting
    std::map<int, std::shared_ptr<const std::vector<double>>> gate_tables;
    {
        const ProblemInstance probe = replication_instance(spec, spec.sigma_v2, 0);
        for (const auto& plan : plans) {
            const int off = plan.algo.config.dof_offset;
            if (!gate_tables.count(off))
                gate_tables[off] = std::make_shared<const std::vector<double>>(
                    build_gate_table(spec.horizon + 1, probe.delta, off));
        }
    }

    ExperimentResult result;
    result.traces.resize(plans.size());
    for (size_t i = 0; i < plans.size(); ++i) {
        result.traces[i].algorithm = plans[i].algo.name;
        result.traces[i].swept = plans[i].swept;
        result.traces[i].sweep_value = plans[i].sweep_value;
        result.traces[i].trace.cum_regret.assign(spec.replications,
                                                 std::vector<double>(spec.horizon, 0.0));
    }
    std::vector<double> cell_ms(plans.size() * spec.replications, 0.0);

    struct Cell {
        size_t plan;
        int rep;
    };
    std::vector<Cell> cells;
    cells.reserve(plans.size() * spec.replications);
    for (size_t p = 0; p < plans.size(); ++p)
        for (int r = 0; r < spec.replications; ++r) cells.push_back({p, r});

    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    const auto run_cell = [&](const Cell& cell) {
        const TracePlan& plan = plans[cell.plan];
        const auto started = std::chrono::steady_clock::now();
        const ProblemInstance instance = replication_instance(spec, plan.sigma_v2, cell.rep);
        Rng history_rng(derive_seed(spec.master_seed,
                                    {kHistoryStream, static_cast<uint64_t>(cell.rep)}));
        AfcLearner learner = make_learner(instance, plan.algo.config, history_rng);
        learner.gate_table = gate_tables.at(plan.algo.config.dof_offset);

        std::vector<double>& cum = result.traces[cell.plan].trace.cum_regret[cell.rep];
        double total = 0.0;
        for (int t = 1; t <= spec.horizon; ++t) {
            Rng ctx_rng(derive_seed(spec.master_seed, {kContextStream,
                                                       static_cast<uint64_t>(cell.rep),
                                                       static_cast<uint64_t>(t)}));
            Rng noise_rng(derive_seed(spec.master_seed, {kNoiseStream,
                                                         static_cast<uint64_t>(cell.rep),
                                                         static_cast<uint64_t>(t)}));
            Rng extra_rng(derive_seed(spec.master_seed, {kExtraStream,
                                                         static_cast<uint64_t>(cell.rep),
                                                         static_cast<uint64_t>(t)}));
            const ActionSet actions = round_actions(instance, ctx_rng);
            const StepResult res = step(learner, instance, actions, noise_rng, extra_rng);
            total += res.regret;
            cum[t - 1] = total;
        }
        cell_ms[cell.plan * spec.replications + cell.rep] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                .count();
    };

    const auto worker = [&] {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                run_cell(cells[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    int threads = spec.threads > 0 ? spec.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (size_t p = 0; p < plans.size(); ++p) {
        result.traces[p].summary = aggregate(result.traces[p].trace);
        double ms = 0.0;
        for (int r = 0; r < spec.replications; ++r) ms += cell_ms[p * spec.replications + r];
        result.traces[p].wall_ms = ms;
    }

    if (!spec.out_dir.empty()) write_results(spec, result);
    return result;
}

ExperimentResult sweep_correlation(ExperimentSpec spec, std::vector<double> sigma_v) {
    spec.sweep = SweepAxis::sigma_v;
    spec.sweep_values = std::move(sigma_v);
    spec.sigma_w2 = 0.01;  // sigma_w fixed at 0.1
    return run_experiment(spec);
}

ExperimentResult sweep_bias(ExperimentSpec spec, std::vector<double> biases) {
    spec.sweep = SweepAxis::bias;
    spec.sweep_values = std::move(biases);
    return run_experiment(spec);
}

ExperimentResult sweep_history(ExperimentSpec spec, std::vector<double> sizes) {
    spec.sweep = SweepAxis::history;
    spec.sweep_values = std::move(sizes);
    return run_experiment(spec);
}

std::string manifest_json(const ExperimentSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["setting"] = to_string(spec.setting);
    j["sigma_v2"] = spec.sigma_v2;
    j["sigma_w2"] = spec.sigma_w2;
    j["coupled"] = spec.coupled;
    j["dim"] = spec.dim;
    j["num_actions"] = spec.num_actions;
    j["horizon"] = spec.horizon;
    j["replications"] = spec.replications;
    j["sweep"] = to_string(spec.sweep);
    j["sweep_values"] = spec.sweep_values;
    j["master_seed"] = spec.master_seed;
    j["threads"] = spec.threads;
    j["fixed_instance"] = spec.fixed_instance;
    nlohmann::json algos = nlohmann::json::array();
    for (const auto& algo : spec.algorithms) {
        nlohmann::json a;
        a["name"] = algo.name;
        a["variant"] = to_string(algo.config.variant);
        a["bias"] = algo.config.bias;
        a["history_size"] = algo.config.history_size;
        a["ratio"] = algo.config.ratio;
        a["extra_at_chosen"] = algo.config.extra_at_chosen;
        a["dof_offset"] = algo.config.dof_offset;
        a["history_ridge"] = algo.config.history_ridge;
        algos.push_back(a);
    }
    j["algorithms"] = algos;
    return j.dump(2);
}

std::string trace_csv_filename(const std::string& algorithm, SweepAxis axis, bool swept,
                               double sweep_value) {
    std::string name = "trace__" + sanitize_filename(algorithm);
    if (swept) name += "__" + to_string(axis) + "=" + sanitize_filename(format_double(sweep_value));
    return name + ".csv";
}

void write_results(const ExperimentSpec& spec, const ExperimentResult& result) {
    namespace fs = std::filesystem;
    const fs::path dir(spec.out_dir);
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write manifest.json in " + spec.out_dir);
        out << manifest_json(spec) << '\n';
    }

    for (const auto& tr : result.traces) {
        const fs::path file = dir / trace_csv_filename(tr.algorithm, spec.sweep, tr.swept,
                                                       tr.sweep_value);
        std::ofstream out(file, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + file.string());
        out << "round,mean_cum_regret,ci_low,ci_high\n";
        for (size_t t = 0; t < tr.summary.mean.size(); ++t) {
            const double m = tr.summary.mean[t];
            const double h = tr.summary.ci_half[t];
            out << (t + 1) << ',' << format_double(m) << ',' << format_double(m - h) << ','
                << format_double(m + h) << '\n';
        }
    }

    {
        std::ofstream out(dir / "summary.csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write summary.csv in " + spec.out_dir);
        out << "algorithm,sweep_value,final_mean,final_ci_half,wall_ms\n";
        for (const auto& tr : result.traces) {
            out << tr.algorithm << ',' << (tr.swept ? format_double(tr.sweep_value) : "") << ','
                << format_double(tr.final_mean()) << ',' << format_double(tr.final_ci_half())
                << ',' << format_double(tr.wall_ms) << '\n';
        }
    }
}

}  // namespace banditcv
