#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using namespace banditcv;
using namespace banditcv::cli;

namespace {

const fs::path kTmp = BANDITCV_TEST_TMP;

int run_cmd(const std::string& args, const fs::path& stdout_file = {},
            const fs::path& stderr_file = {}) {
    std::string cmd = std::string(BANDITCV_CLI_PATH) + " " + args;
    if (!stdout_file.empty()) cmd += " >" + stdout_file.string();
    if (!stderr_file.empty()) cmd += " 2>" + stderr_file.string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

const char* kSmallConfig = R"({
  "name": "cli-test",
  "setting": "linear",
  "horizon": 20,
  "replications": 3,
  "num_actions": 15,
  "algorithms": [{"variant": "vanilla"}, {"variant": "af"}]
})";

std::string strip_wall_ms(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t n = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        n += 1;
        pos += needle.size();
    }
    return n;
}

}  // namespace

TEST_CASE("config parsing: strict schema") {
    CHECK_THROWS_WITH_AS(parse_config("{\"setting\": \"linear\"}"),
                         doctest::Contains("horizon"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"setting":"linear","horizon":5,"replications":1,"banana":1,
                         "algorithms":[{"variant":"vanilla"}]})"),
        doctest::Contains("banana"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"setting":"linear","horizon":5,"replications":1,
                         "algorithms":[{"variant":"vanilla","color":"red"}]})"),
        doctest::Contains("color"), ConfigError);
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);

    const ExperimentSpec spec = parse_config(kSmallConfig);
    CHECK(spec.algorithms[0].name == "OFUL");
    CHECK(spec.algorithms[1].name == "OFUL-AF");
    CHECK(spec.horizon == 20);

    CHECK(default_algorithm_name(SettingKind::linear_contextual, Variant::is) ==
          "Lin-UCB-IS/MF");
    CHECK(default_algorithm_name(SettingKind::nonlinear_contextual, Variant::eh) ==
          "NLin-UCB-EH");
}

TEST_CASE("config overrides") {
    ExperimentSpec spec = parse_config(kSmallConfig);
    apply_override(spec, "replications=2");
    CHECK(spec.replications == 2);
    apply_override(spec, "sigma_v2=0.09");
    CHECK(spec.sigma_v2 == doctest::Approx(0.09));
    CHECK_THROWS_WITH_AS(apply_override(spec, "nope=3"), doctest::Contains("nope"), ConfigError);
    CHECK_THROWS_AS(apply_override(spec, "badformat"), ConfigError);
}

TEST_CASE("cmd_run: determinism and manifest echo") {
    fs::remove_all(kTmp);
    const fs::path cfg = kTmp / "small.json";
    write_file(cfg, kSmallConfig);

    const fs::path out1 = kTmp / "out1", out2 = kTmp / "out2";
    CHECK(run_cmd("run --config " + cfg.string() + " --seed 7 --out " + out1.string(),
                  kTmp / "run1.log") == 0);
    CHECK(run_cmd("run --config " + cfg.string() + " --seed 7 --out " + out2.string(),
                  kTmp / "run2.log") == 0);

    for (const char* name : {"trace__OFUL.csv", "trace__OFUL-AF.csv", "manifest.json"})
        CHECK(slurp(out1 / name) == slurp(out2 / name));
    CHECK(strip_wall_ms(slurp(out1 / "summary.csv")) ==
          strip_wall_ms(slurp(out2 / "summary.csv")));

    // --override is reflected in the manifest
    const fs::path out3 = kTmp / "out3";
    CHECK(run_cmd("run --config " + cfg.string() + " --seed 7 --out " + out3.string() +
                      " --override replications=2",
                  kTmp / "run3.log") == 0);
    CHECK(slurp(out3 / "manifest.json").find("\"replications\": 2") != std::string::npos);
}

TEST_CASE("cmd_run: config errors exit 1 and name the field") {
    const fs::path cfg = kTmp / "missing_horizon.json";
    write_file(cfg, R"({"setting":"linear","replications":2,
                        "algorithms":[{"variant":"vanilla"}]})");
    const fs::path err = kTmp / "err1.txt";
    CHECK(run_cmd("run --config " + cfg.string(), kTmp / "ignore.log", err) == 1);
    CHECK(slurp(err).find("horizon") != std::string::npos);

    CHECK(run_cmd("run --config " + (kTmp / "does_not_exist.json").string(),
                  kTmp / "ignore.log", kTmp / "err2.txt") == 1);
}

TEST_CASE("cmd_plot: missing inputs, structure, determinism") {
    const fs::path empty_dir = kTmp / "empty";
    fs::create_directories(empty_dir);
    const fs::path err = kTmp / "plot_err.txt";
    CHECK(run_cmd("plot " + empty_dir.string(), kTmp / "ignore.log", err) == 1);
    CHECK(slurp(err).find("no result files") != std::string::npos);

    const fs::path dir = kTmp / "plotdata";
    write_file(dir / "trace__Solo.csv",
               "round,mean_cum_regret,ci_low,ci_high\n1,1.0,0.9,1.1\n2,1.5,1.3,1.7\n"
               "3,2.0,1.7,2.3\n");
    const fs::path svg1 = kTmp / "chart1.svg", svg2 = kTmp / "chart2.svg";
    CHECK(run_cmd("plot " + dir.string() + " --out " + svg1.string(), kTmp / "ignore.log") == 0);
    CHECK(run_cmd("plot " + dir.string() + " --out " + svg2.string(), kTmp / "ignore.log") == 0);
    const std::string svg = slurp(svg1);
    CHECK(svg == slurp(svg2));
    CHECK(count_occurrences(svg, "<polyline") == 1);
    CHECK(count_occurrences(svg, "<polygon") == 1);
    CHECK(svg.find("Solo") != std::string::npos);
}

TEST_CASE("svg renderer: one band and one polyline per series") {
    Series a;
    a.label = "a";
    a.round = {1, 2, 3};
    a.mean = {0.1, 0.2, 0.3};
    a.ci_low = {0.05, 0.15, 0.25};
    a.ci_high = {0.15, 0.25, 0.35};
    Series b = a;
    b.label = "b&c";
    const std::string svg = render_regret_svg({a, b});
    CHECK(count_occurrences(svg, "<polyline") == 2);
    CHECK(count_occurrences(svg, "<polygon") == 2);
    CHECK(svg.find("b&amp;c") != std::string::npos);
    CHECK_THROWS_AS(render_regret_svg({}), std::invalid_argument);
}

TEST_CASE("cmd_verify: quick suite passes, injected fault fails") {
    CHECK(run_cmd("verify --quick", kTmp / "verify.log") == 0);
    const std::string log = slurp(kTmp / "verify.log");
    CHECK(log.find("theorem1-variance-q1") != std::string::npos);
    CHECK(log.find("FAIL") == std::string::npos);

    CHECK(run_cmd("verify --quick --inject-fault beta-dof", kTmp / "verify_fault.log") == 3);
    const std::string fault_log = slurp(kTmp / "verify_fault.log");
    CHECK(fault_log.find("[FAIL] theorem1-variance-q3") != std::string::npos);
}
