#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace banditcv::cli {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kPaletteSize = 10;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

Series load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    Series series;
    {
        std::string stem = std::filesystem::path(path).stem().string();
        const std::string prefix = "trace__";
        if (stem.rfind(prefix, 0) == 0) stem = stem.substr(prefix.size());
        std::replace(stem.begin(), stem.end(), '_', ' ');
        series.label = stem;
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("round,", 0) != 0)
        throw std::runtime_error("not a trace CSV (bad header): " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double r, m, lo, hi;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &r, &m, &lo, &hi) != 4)
            throw std::runtime_error("bad row in " + path + ": " + line);
        series.round.push_back(r);
        series.mean.push_back(m);
        series.ci_low.push_back(lo);
        series.ci_high.push_back(hi);
    }
    if (series.round.empty()) throw std::runtime_error("empty trace CSV: " + path);
    return series;
}

std::vector<Series> load_results_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (fs::is_directory(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("trace__", 0) == 0 && entry.path().extension() == ".csv")
                files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<Series> out;
    for (const auto& f : files) out.push_back(load_trace_csv(f));
    return out;
}

std::string render_regret_svg(const std::vector<Series>& series) {
    if (series.empty()) throw std::invalid_argument("render_regret_svg: no series");

    const double width = 860, height = 520;
    const double ml = 70, mr = 215, mt = 30, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmax = 1.0, ymax = 0.0;
    for (const auto& s : series) {
        xmax = std::max(xmax, s.round.back());
        for (double v : s.ci_high) ymax = std::max(ymax, v);
    }
    if (ymax <= 0.0) ymax = 1.0;
    ymax *= 1.05;

    const auto px = [&](double x) { return ml + pw * (x - 1.0) / std::max(1.0, xmax - 1.0); };
    const auto py = [&](double y) { return mt + ph * (1.0 - y / ymax); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    // axes
    svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(ml + pw)
        << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(ml)
        << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = 1.0 + (xmax - 1.0) * i / 5.0;
        const double yv = ymax * i / 5.0;
        svg << "<line x1=\"" << fmt(px(xv)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\""
            << fmt(px(xv)) << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(mt + ph + 20)
            << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt_tick(xv) << "</text>\n";
        svg << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(py(yv)) << "\" x2=\"" << fmt(ml)
            << "\" y2=\"" << fmt(py(yv)) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(py(yv) + 4)
            << "\" font-size=\"12\" text-anchor=\"end\">" << fmt_tick(yv) << "</text>\n";
    }
    svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(height - 12)
        << "\" font-size=\"14\" text-anchor=\"middle\">round</text>\n";
    svg << "<text x=\"18\" y=\"" << fmt(mt + ph / 2)
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << fmt(mt + ph / 2) << ")\">mean cumulative regret</text>\n";

    for (size_t k = 0; k < series.size(); ++k) {
        const Series& s = series[k];
        const char* color = kPalette[k % kPaletteSize];
        const size_t n = s.round.size();
        const size_t stride = std::max<size_t>(1, n / 1000);

        std::vector<size_t> idx;
        for (size_t i = 0; i < n; i += stride) idx.push_back(i);
        if (idx.back() != n - 1) idx.push_back(n - 1);

        svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (size_t i : idx) svg << fmt(px(s.round[i])) << ',' << fmt(py(s.ci_high[i])) << ' ';
        for (auto it = idx.rbegin(); it != idx.rend(); ++it)
            svg << fmt(px(s.round[*it])) << ',' << fmt(py(s.ci_low[*it])) << ' ';
        svg << "\"/>\n";

        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i : idx) svg << fmt(px(s.round[i])) << ',' << fmt(py(s.mean[i])) << ' ';
        svg << "\"/>\n";

        const double ly = mt + 16 + 20 * static_cast<double>(k);
        svg << "<line x1=\"" << fmt(ml + pw + 12) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
            << fmt(ml + pw + 36) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fmt(ml + pw + 42) << "\" y=\"" << fmt(ly)
            << "\" font-size=\"12\">" << xml_escape(s.label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace banditcv::cli
