#pragma once

#include <string>
#include <vector>

namespace banditcv::cli {

struct Series {
    std::string label;
    std::vector<double> round;
    std::vector<double> mean;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
};

// Parses a trace CSV (round,mean_cum_regret,ci_low,ci_high); label from the
// file name.
Series load_trace_csv(const std::string& path);

// All trace__*.csv in a directory, sorted by file name.
std::vector<Series> load_results_dir(const std::string& dir);

// Static line chart: one polyline + one CI band polygon per series, fixed
// palette, deterministic output bytes for identical input.
std::string render_regret_svg(const std::vector<Series>& series);

}  // namespace banditcv::cli
