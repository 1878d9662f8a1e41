#pragma once

#include <stdexcept>
#include <string>

#include "banditcv/harness.hpp"

namespace banditcv::cli {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Strict schema: unknown keys are rejected and every error message names the
// offending field.
ExperimentSpec parse_config(const std::string& json_text);
ExperimentSpec load_config(const std::string& path);

// "key=value" override applied after loading; unknown keys are ConfigErrors.
void apply_override(ExperimentSpec& spec, const std::string& assignment);

// Default display label, e.g. (linear, af) -> "OFUL-AF".
std::string default_algorithm_name(SettingKind setting, Variant variant);

}  // namespace banditcv::cli
