#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "emscale/cli.hpp"
#include "emscale/serialize.hpp"

using namespace emscale;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("emscale_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) {
        if (c == '\n') ++n;
    }
    return n;
}

const std::vector<std::string> kSmallScenario = {
    "--scenario", "ro_ht", "--n", "12", "--length", "1024", "--seed", "7",
};

std::vector<std::string> with(std::vector<std::string> base,
                              std::initializer_list<std::string> extra) {
    base.insert(base.end(), extra);
    return base;
}

}  // namespace

TEST_CASE("synth writes one csv per execution plus the sidecar") {
    const auto dir = fresh_dir("synth");
    auto args = with(kSmallScenario, {"--out", dir.string()});
    CHECK(cli::cmd_synth(args) == cli::kExitOk);
    int csvs = 0;
    bool sidecar = false;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".csv") ++csvs;
        if (entry.path().filename() == "traceset.json") sidecar = true;
    }
    CHECK(csvs == 12);
    CHECK(sidecar);
}

TEST_CASE("synth is byte-deterministic across runs") {
    const auto dir1 = fresh_dir("synth_det1");
    const auto dir2 = fresh_dir("synth_det2");
    CHECK(cli::cmd_synth(with(kSmallScenario, {"--out", dir1.string()})) == cli::kExitOk);
    CHECK(cli::cmd_synth(with(kSmallScenario, {"--out", dir2.string()})) == cli::kExitOk);
    CHECK(slurp(dir1 / "trace_0000.csv") == slurp(dir2 / "trace_0000.csv"));
    CHECK(slurp(dir1 / "trace_0011.csv") == slurp(dir2 / "trace_0011.csv"));
    CHECK(slurp(dir1 / "traceset.json") == slurp(dir2 / "traceset.json"));
}

TEST_CASE("li scenario without params echoes defaults in the sidecar") {
    const auto dir = fresh_dir("synth_li");
    CHECK(cli::cmd_synth({"--scenario", "li_ht", "--n", "4", "--length", "512", "--out",
                          dir.string()}) == cli::kExitOk);
    const auto sidecar = serialize::load_json_file((dir / "traceset.json").string());
    REQUIRE(sidecar.contains("scenario"));
    const auto& sc = sidecar["scenario"];
    REQUIRE(sc.contains("li"));
    const synthgen::LiParams defaults;
    CHECK(sc["li"]["modulation_chip_length"].get<int>() == defaults.modulation_chip_length);
    CHECK(sc["li"]["modulation_depth"].get<double>() == defaults.modulation_depth);
    CHECK(sc["li"]["carrier_center_freq"].get<double>() == defaults.carrier_center_freq);
}

TEST_CASE("unknown scenario fails with the config exit code") {
    const auto dir = fresh_dir("synth_bad");
    CHECK(cli::cmd_synth({"--scenario", "nonsense", "--out", dir.string()}) == cli::kExitConfig);
}

TEST_CASE("analyze produces a profile with the configured shape") {
    const auto traces = fresh_dir("analyze_in");
    CHECK(cli::cmd_synth(with(kSmallScenario, {"--out", traces.string()})) == cli::kExitOk);
    const auto out = fresh_dir("analyze_out");
    const std::vector<std::string> args = {
        "--in",     traces.string(), "--windows", "64,128", "--batch", "4",
        "--k-max",  "4",             "--n-init",  "2",      "--seed",  "5",
        "--out",    out.string(),
    };
    CHECK(cli::cmd_analyze(args) == cli::kExitOk);
    const auto profile = serialize::load_json_file((out / "profile.json").string());
    CHECK(profile["k_max"].get<int>() == 4);
    REQUIRE(profile["scales"].size() == 2);
    CHECK(profile["scales"][0]["window_size"].get<int>() == 64);
    CHECK(profile["scales"][0]["selected_orders"].size() == 3);  // 12 execs / batch 4
    CHECK(profile.contains("config"));
    CHECK(profile["config"]["analysis"]["k_max"].get<int>() == 4);
    CHECK(profile["config"]["normalize"].get<std::string>() == "zscore");
    const auto csv = slurp(out / "profile.csv");
    CHECK(count_lines(csv) == 3);  // header + 2 windows
}

TEST_CASE("analyze from an in-memory scenario without trace files") {
    const auto out = fresh_dir("analyze_mem");
    const std::vector<std::string> args = {
        "--scenario", "baseline", "--n",     "12",          "--length", "1024",
        "--scenario-seed", "3",   "--windows", "64",        "--batch",  "6",
        "--k-max",    "3",        "--n-init", "2",          "--seed",   "5",
        "--out",      out.string(),
    };
    CHECK(cli::cmd_analyze(args) == cli::kExitOk);
    CHECK(fs::exists(out / "profile.json"));
}

TEST_CASE("analyze with no input source is a config error") {
    CHECK(cli::cmd_analyze({"--windows", "64"}) == cli::kExitConfig);
}

TEST_CASE("analyze profile json is byte-identical across runs and thread bounds") {
    const auto traces = fresh_dir("analyze_det_in");
    CHECK(cli::cmd_synth(with(kSmallScenario, {"--out", traces.string()})) == cli::kExitOk);
    const auto out1 = fresh_dir("analyze_det1");
    const auto out2 = fresh_dir("analyze_det2");
    std::vector<std::string> base = {"--in",    traces.string(), "--windows", "64,128",
                                     "--batch", "4",             "--k-max",   "4",
                                     "--n-init", "2",            "--seed",    "5"};
    CHECK(cli::cmd_analyze(with(base, {"--out", out1.string(), "--threads", "1"})) ==
          cli::kExitOk);
    CHECK(cli::cmd_analyze(with(base, {"--out", out2.string(), "--threads", "8"})) ==
          cli::kExitOk);
    CHECK(slurp(out1 / "profile.json") == slurp(out2 / "profile.json"));
}

TEST_CASE("classify emits requested formats and exits zero") {
    const auto traces = fresh_dir("classify_in");
    CHECK(cli::cmd_synth(with(kSmallScenario, {"--out", traces.string()})) == cli::kExitOk);
    const auto out = fresh_dir("classify_out");
    std::vector<std::string> analyze = {"--in",    traces.string(), "--windows", "64,128,256",
                                        "--batch", "4",             "--k-max",   "4",
                                        "--n-init", "2",            "--seed",    "5",
                                        "--out",   out.string()};
    CHECK(cli::cmd_analyze(analyze) == cli::kExitOk);
    CHECK(cli::cmd_classify({"--profile", (out / "profile.json").string(), "--out",
                             out.string(), "--format", "json,csv,svg"}) == cli::kExitOk);
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "report.csv"));
    CHECK(fs::exists(out / "report.svg"));
    const auto report = serialize::load_json_file((out / "report.json").string());
    CHECK(report["kind"].get<std::string>() == "detection_report");
    const auto svg = slurp(out / "report.svg");
    CHECK(svg.find("<svg ") != std::string::npos);
}

TEST_CASE("classify on malformed json exits with the config code") {
    const auto dir = fresh_dir("classify_bad");
    {
        std::ofstream f(dir / "broken.json");
        f << "{ not json";
    }
    CHECK(cli::cmd_classify({"--profile", (dir / "broken.json").string(), "--out",
                             dir.string()}) == cli::kExitConfig);
}

TEST_CASE("classify on a missing file exits with the io code") {
    CHECK(cli::cmd_classify({"--profile", "/nonexistent/profile.json"}) == cli::kExitIo);
}

TEST_CASE("sweep emits a profile and report per bound plus the combined csv") {
    const auto traces = fresh_dir("sweep_in");
    CHECK(cli::cmd_synth(with(kSmallScenario, {"--out", traces.string()})) == cli::kExitOk);
    const auto out = fresh_dir("sweep_out");
    const std::vector<std::string> args = {
        "--in",        traces.string(), "--windows", "64,128", "--batch", "4",
        "--n-init",    "2",             "--seed",    "5",      "--out",   out.string(),
        "--k-max-list", "3,4",
    };
    CHECK(cli::cmd_sweep(args) == cli::kExitOk);
    CHECK(fs::exists(out / "profile_k3.json"));
    CHECK(fs::exists(out / "profile_k4.json"));
    CHECK(fs::exists(out / "report_k3.json"));
    CHECK(fs::exists(out / "report_k4.json"));
    const auto combined = slurp(out / "sweep_saturation.csv");
    CHECK(count_lines(combined) == 1 + 2 * 2);  // header + windows x bounds
}

TEST_CASE("single-element sweep matches analyze output") {
    const auto traces = fresh_dir("sweep_solo_in");
    CHECK(cli::cmd_synth(with(kSmallScenario, {"--out", traces.string()})) == cli::kExitOk);
    const auto out_s = fresh_dir("sweep_solo_s");
    const auto out_a = fresh_dir("sweep_solo_a");
    std::vector<std::string> base = {"--in",    traces.string(), "--windows", "64,128",
                                     "--batch", "4",             "--n-init",  "2",
                                     "--seed",  "5"};
    CHECK(cli::cmd_sweep(with(base, {"--k-max-list", "4", "--out", out_s.string()})) ==
          cli::kExitOk);
    CHECK(cli::cmd_analyze(with(base, {"--k-max", "4", "--out", out_a.string()})) ==
          cli::kExitOk);
    const auto sweep_profile = slurp(out_s / "profile_k4.json");
    const auto solo_profile = slurp(out_a / "profile.json");
    CHECK(sweep_profile == solo_profile);
}

TEST_CASE("run_cli dispatches and rejects unknown commands") {
    CHECK(cli::run_cli({"no-such-command"}) == cli::kExitConfig);
    CHECK(cli::run_cli({"help"}) == cli::kExitOk);
}

TEST_SUITE_END();
