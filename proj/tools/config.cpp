#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace banditcv::cli {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
}

template <typename T>
T get_field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing required key \"" + key + "\" in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for key \"" + key + "\" in " + where);
    }
}

template <typename T>
T get_optional(const json& obj, const std::string& key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for key \"" + key + "\" in " + where);
    }
}

}  // namespace

std::string default_algorithm_name(SettingKind setting, Variant variant) {
    std::string base;
    switch (setting) {
        case SettingKind::linear: base = "OFUL"; break;
        case SettingKind::linear_contextual: base = "Lin-UCB"; break;
        case SettingKind::nonlinear_contextual: base = "NLin-UCB"; break;
    }
    switch (variant) {
        case Variant::vanilla: return base;
        case Variant::af: return base + "-AF";
        case Variant::is: return base + "-IS/MF";
        case Variant::mf: return base + "-MF";
        case Variant::be: return base + "-BE";
        case Variant::eh: return base + "-EH";
    }
    return base;
}

ExperimentSpec parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    reject_unknown_keys(j, {"name", "setting", "horizon", "replications", "algorithms", "sweep",
                            "sigma_v2", "sigma_w2", "coupled", "dim", "num_actions",
                            "master_seed", "threads", "fixed_instance", "out_dir"},
                        "config");

    ExperimentSpec spec;
    spec.name = get_optional<std::string>(j, "name", "config", "experiment");
    try {
        spec.setting = setting_kind_from_string(get_field<std::string>(j, "setting", "config"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad value for key \"setting\": ") + e.what());
    }
    spec.horizon = get_field<int>(j, "horizon", "config");
    spec.replications = get_field<int>(j, "replications", "config");
    spec.sigma_v2 = get_optional<double>(j, "sigma_v2", "config", 0.01);
    spec.sigma_w2 = get_optional<double>(j, "sigma_w2", "config", 0.01);
    spec.coupled = get_optional<bool>(j, "coupled", "config", true);
    spec.dim = get_optional<int>(j, "dim", "config", 5);
    spec.num_actions = get_optional<int>(j, "num_actions", "config", 100);
    spec.master_seed = get_optional<uint64_t>(j, "master_seed", "config", 0);
    spec.threads = get_optional<int>(j, "threads", "config", 0);
    spec.fixed_instance = get_optional<bool>(j, "fixed_instance", "config", false);
    spec.out_dir = get_optional<std::string>(j, "out_dir", "config", "");

    if (!j.contains("algorithms") || !j.at("algorithms").is_array() ||
        j.at("algorithms").empty())
        throw ConfigError("key \"algorithms\" must be a nonempty array");
    for (const auto& a : j.at("algorithms")) {
        if (!a.is_object()) throw ConfigError("entries of \"algorithms\" must be objects");
        reject_unknown_keys(a, {"name", "variant", "bias", "history_size", "ratio",
                                "extra_at_chosen", "dof_offset", "history_ridge"},
                            "algorithms entry");
        AlgorithmSpec algo;
        try {
            algo.config.variant =
                variant_from_string(get_field<std::string>(a, "variant", "algorithms entry"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("bad value for key \"variant\": ") + e.what());
        }
        algo.config.bias = get_optional<double>(a, "bias", "algorithms entry", 0.05);
        algo.config.history_size = get_optional<int>(a, "history_size", "algorithms entry", 200);
        algo.config.ratio = get_optional<double>(a, "ratio", "algorithms entry", 2.0);
        algo.config.extra_at_chosen =
            get_optional<bool>(a, "extra_at_chosen", "algorithms entry", true);
        algo.config.dof_offset = get_optional<int>(a, "dof_offset", "algorithms entry", 2);
        algo.config.history_ridge =
            get_optional<double>(a, "history_ridge", "algorithms entry", 1e-6);
        algo.name = get_optional<std::string>(
            a, "name", "algorithms entry",
            default_algorithm_name(spec.setting, algo.config.variant));
        spec.algorithms.push_back(std::move(algo));
    }

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        if (!s.is_object()) throw ConfigError("key \"sweep\" must be an object");
        reject_unknown_keys(s, {"axis", "values"}, "sweep");
        try {
            spec.sweep = sweep_axis_from_string(get_field<std::string>(s, "axis", "sweep"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("bad value for key \"axis\": ") + e.what());
        }
        spec.sweep_values = get_field<std::vector<double>>(s, "values", "sweep");
        if (spec.sweep != SweepAxis::none && spec.sweep_values.empty())
            throw ConfigError("key \"values\" in sweep must be nonempty");
    }
    return spec;
}

ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void apply_override(ExperimentSpec& spec, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like key=value, got \"" + assignment + "\"");
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    const auto as_int = [&] {
        try {
            return std::stoi(value);
        } catch (...) {
            throw ConfigError("override \"" + key + "\" needs an integer value");
        }
    };
    const auto as_double = [&] {
        try {
            return std::stod(value);
        } catch (...) {
            throw ConfigError("override \"" + key + "\" needs a numeric value");
        }
    };
    const auto as_bool = [&]() -> bool {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        throw ConfigError("override \"" + key + "\" needs true/false");
    };

    if (key == "horizon")
        spec.horizon = as_int();
    else if (key == "replications")
        spec.replications = as_int();
    else if (key == "threads")
        spec.threads = as_int();
    else if (key == "dim")
        spec.dim = as_int();
    else if (key == "num_actions")
        spec.num_actions = as_int();
    else if (key == "sigma_v2")
        spec.sigma_v2 = as_double();
    else if (key == "sigma_w2")
        spec.sigma_w2 = as_double();
    else if (key == "master_seed")
        spec.master_seed = static_cast<uint64_t>(std::stoull(value));
    else if (key == "fixed_instance")
        spec.fixed_instance = as_bool();
    else if (key == "coupled")
        spec.coupled = as_bool();
    else if (key == "name")
        spec.name = value;
    else if (key == "out_dir")
        spec.out_dir = value;
    else
        throw ConfigError("unknown override key \"" + key + "\"");
}

}  // namespace banditcv::cli
