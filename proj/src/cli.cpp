#include "emscale/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "emscale/config.hpp"
#include "emscale/detect.hpp"
#include "emscale/error.hpp"
#include "emscale/parallel.hpp"
#include "emscale/persistence.hpp"
#include "emscale/serialize.hpp"
#include "emscale/stability.hpp"
#include "emscale/synthgen.hpp"
#include "emscale/trace.hpp"

namespace emscale::cli {

namespace fs = std::filesystem;
using serialize::json;

namespace {

constexpr const char* kSidecarName = "traceset.json";

int map_exception(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const InsufficientDataError*>(&e)) return kExitInsufficientData;
    if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
    return kExitUnexpected;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

void apply_thread_env_and_flag(int threads_flag) {
    int bound = 0;
    const std::string env = env_or("EMSCALE_THREADS", "");
    if (!env.empty()) bound = std::atoi(env.c_str());
    if (threads_flag > 0) bound = threads_flag;  // flag wins
    set_max_threads(bound);
}

fs::path resolve_out_dir(const std::string& flag_value) {
    std::string dir = flag_value;
    if (dir.empty()) dir = env_or("EMSCALE_OUT_DIR", "");
    if (dir.empty()) dir = ".";
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return p;
}

std::string trace_file_name(int execution_id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace_%04d.csv", execution_id);
    return buf;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::atoi(item.c_str()));
    }
    return out;
}

// ---- shared input plumbing -------------------------------------------------

struct InputOptions {
    std::string in_dir;
    std::string scenario_name;
    std::string scenario_config_path;
    int n_executions = -1;
    int trace_length = -1;
    double noise_sigma = -1.0;
    uint64_t scenario_seed = 0;
    bool scenario_seed_set = false;
};

void add_input_options(CLI::App& app, InputOptions& in) {
    app.add_option("--in", in.in_dir, "Trace directory containing " + std::string(kSidecarName));
    app.add_option("--scenario", in.scenario_name, "Synthesize in memory: baseline|li_ht|ro_ht");
    app.add_option("--scenario-config", in.scenario_config_path,
                   "Synthesize in memory from a scenario config file");
    app.add_option("--n", in.n_executions, "Synthetic executions (scenario input only)");
    app.add_option("--length", in.trace_length, "Synthetic trace length in samples");
    app.add_option("--noise", in.noise_sigma, "Synthetic noise sigma");
    auto* seed_opt = app.add_option("--scenario-seed", in.scenario_seed,
                                    "Master seed for in-memory synthesis");
    seed_opt->each([&in](const std::string&) { in.scenario_seed_set = true; });
}

synthgen::ScenarioConfig scenario_from_options(const InputOptions& in) {
    synthgen::ScenarioConfig cfg;
    if (!in.scenario_config_path.empty()) {
        const auto kv = config::KvConfig::parse_file(in.scenario_config_path);
        cfg = config::scenario_from_kv(kv);
        kv.reject_unknown();
    } else {
        cfg.scenario = synthgen::scenario_from_string(in.scenario_name);
        cfg.apply_defaults();
    }
    if (in.n_executions > 0) cfg.n_executions = in.n_executions;
    if (in.trace_length > 0) cfg.trace_length = in.trace_length;
    if (in.noise_sigma >= 0.0) cfg.noise_sigma = in.noise_sigma;
    if (in.scenario_seed_set) cfg.master_seed = in.scenario_seed;
    cfg.apply_defaults();
    return cfg;
}

// Loads from directory input or synthesizes in memory; fills the echo object.
trace::TraceSet load_input(const InputOptions& in, json& input_echo) {
    const bool have_dir = !in.in_dir.empty();
    const bool have_scenario = !in.scenario_name.empty() || !in.scenario_config_path.empty();
    if (have_dir == have_scenario) {
        throw ConfigError("exactly one input source required: --in or --scenario[-config]");
    }
    if (have_dir) {
        const fs::path dir(in.in_dir);
        const auto meta = serialize::read_sidecar((dir / kSidecarName).string());
        trace::CsvFormat fmt;
        fmt.amplitude_column = meta.amplitude_column;
        fmt.time_column = meta.time_column;
        fmt.header_rows = meta.header_rows;
        fmt.amplitude_scale = meta.amplitude_scale;
        fmt.sampling_rate = meta.sampling_rate;
        std::vector<std::string> manifest;
        manifest.reserve(meta.files.size());
        for (const auto& f : meta.files) manifest.push_back((dir / f).string());
        input_echo = {{"type", "directory"}, {"path", in.in_dir},
                      {"n_files", static_cast<int>(manifest.size())}};
        return trace::load_trace_set(manifest, fmt);
    }
    const auto cfg = scenario_from_options(in);
    input_echo = {{"type", "scenario"}, {"scenario", serialize::scenario_to_json(cfg)}};
    return synthgen::generate(cfg);
}

// ---- analysis option plumbing ----------------------------------------------

struct AnalyzeOptions {
    InputOptions input;
    std::string analysis_config_path;
    std::string windows_csv;
    int batch_size = -1;
    int k_max = -1;
    int n_init = -1;
    double tol = -1.0;
    int max_iter = -1;
    double reg = -1.0;
    double epsilon = -1.0;
    bool no_log1p = false;
    bool no_standardize = false;
    std::string window_fn;
    int hop = -1;
    int max_fit_points = -1;
    std::string normalize = "zscore";
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::string out_dir;
    std::string emit = "json,csv";
};

void add_analyze_options(CLI::App& app, AnalyzeOptions& opt) {
    add_input_options(app, opt.input);
    app.add_option("--analysis-config", opt.analysis_config_path,
                   "Analysis config file (key = value)");
    app.add_option("--windows", opt.windows_csv, "Comma list of STFT window sizes");
    app.add_option("--batch", opt.batch_size, "Executions per stability batch");
    app.add_option("--k-max", opt.k_max, "Mixture capacity bound");
    app.add_option("--n-init", opt.n_init, "EM restarts per order");
    app.add_option("--tol", opt.tol, "EM relative log-likelihood tolerance");
    app.add_option("--max-iter", opt.max_iter, "EM iteration cap");
    app.add_option("--reg", opt.reg, "EM covariance regularization");
    app.add_option("--epsilon", opt.epsilon, "Stability variance floor");
    app.add_flag("--no-log1p", opt.no_log1p, "Disable log1p stability transform");
    app.add_flag("--no-standardize", opt.no_standardize, "Disable feature standardization");
    app.add_option("--window-fn", opt.window_fn, "hann|rectangular");
    app.add_option("--hop", opt.hop, "STFT hop (0 = window/2)");
    app.add_option("--max-fit-points", opt.max_fit_points,
                   "Point cap per mixture fit (0 = fit every bin)");
    app.add_option("--normalize", opt.normalize, "Trace normalization: zscore|none");
    auto* seed_opt = app.add_option("--seed", opt.seed, "Analysis master seed");
    seed_opt->each([&opt](const std::string&) { opt.seed_set = true; });
    app.add_option("--threads", opt.threads, "Worker bound (0 = runtime default)");
    app.add_option("--out", opt.out_dir, "Output directory (or EMSCALE_OUT_DIR)");
    app.add_option("--emit", opt.emit, "Comma list of json,csv,dumps");
}

persistence::AnalysisConfig analysis_from_options(const AnalyzeOptions& opt) {
    persistence::AnalysisConfig cfg;
    if (!opt.analysis_config_path.empty()) {
        const auto kv = config::KvConfig::parse_file(opt.analysis_config_path);
        cfg = config::analysis_from_kv(kv);
        kv.reject_unknown();
    }
    if (!opt.windows_csv.empty()) cfg.window_sizes = parse_int_list(opt.windows_csv);
    if (opt.batch_size > 0) cfg.batch_size = opt.batch_size;
    if (opt.k_max > 0) cfg.k_max = opt.k_max;
    if (opt.n_init > 0) cfg.n_init = opt.n_init;
    if (opt.tol > 0.0) cfg.em.tol = opt.tol;
    if (opt.max_iter > 0) cfg.em.max_iter = opt.max_iter;
    if (opt.reg > 0.0) cfg.em.reg = opt.reg;
    if (opt.epsilon > 0.0) cfg.epsilon = opt.epsilon;
    if (opt.no_log1p) cfg.transform.log1p_stability = false;
    if (opt.no_standardize) cfg.transform.standardize = false;
    if (!opt.window_fn.empty()) {
        cfg.window_function = spectral::window_fn_from_string(opt.window_fn);
    }
    if (opt.hop >= 0) cfg.hop = opt.hop;
    if (opt.max_fit_points >= 0) cfg.max_fit_points = opt.max_fit_points;
    if (opt.seed_set) cfg.master_seed = opt.seed;
    return cfg;
}

bool emit_has(const std::string& emit, const std::string& what) {
    std::stringstream ss(emit);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == what) return true;
    }
    return false;
}

json run_config_echo(const persistence::AnalysisConfig& cfg, const std::string& normalize,
                     const json& input_echo) {
    return {
        {"analysis", serialize::analysis_to_json(cfg)},
        {"normalize", normalize},
        {"input", input_echo},
    };
}

// Stability/spectrogram dumps for inspection plots: first batch per window.
void write_dumps(const fs::path& out, const trace::TraceSet& normalized,
                 const persistence::AnalysisConfig& cfg) {
    const auto batches = persistence::batch_partition(normalized.n_executions, cfg.batch_size);
    for (int w : cfg.window_sizes) {
        spectral::StftConfig stft;
        stft.window_size = w;
        stft.hop = cfg.hop;
        stft.window_function = cfg.window_function;
        std::vector<spectral::Spectrogram> specs;
        for (int id : batches.front()) {
            specs.push_back(
                spectral::stft_magnitude(normalized.traces[static_cast<std::size_t>(id)], stft));
        }
        {
            std::ofstream f(out / ("spectrogram_w" + std::to_string(w) + "_exec0.csv"));
            spectral::dump_spectrogram_csv(f, specs.front(), stft.resolved_hop(),
                                           normalized.sampling_rate);
        }
        const auto map = stability::stability_map(specs, cfg.epsilon);
        std::ofstream f(out / ("stability_w" + std::to_string(w) + "_batch0.csv"));
        stability::dump_stability_csv(f, map);
    }
}

void print_profile_summary(const persistence::PersistenceProfile& profile) {
    std::printf("window  saturation  variance  median\n");
    for (const auto& sp : profile.scales) {
        std::printf("%6d  %10.3f  %8.3f  %6.1f\n", sp.window_size, sp.saturation_ratio,
                    sp.within_window_variance, sp.median_complexity);
    }
}

int wrap_command(const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        return map_exception(e);
    }
}

}  // namespace

int cmd_synth(const std::vector<std::string>& args) {
    CLI::App app{"Generate a synthetic EM trace set"};
    std::string scenario = "baseline";
    std::string config_path;
    int n = -1;
    int length = -1;
    double noise = -1.0;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    app.add_option("--scenario", scenario, "baseline|li_ht|ro_ht");
    app.add_option("--config", config_path, "Scenario config file (key = value)");
    app.add_option("--n", n, "Number of executions");
    app.add_option("--length", length, "Trace length in samples");
    app.add_option("--noise", noise, "White noise sigma");
    auto* seed_opt = app.add_option("--seed", seed, "Master seed");
    seed_opt->each([&seed_set](const std::string&) { seed_set = true; });
    app.add_option("--out", out_dir, "Output directory")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    return wrap_command([&]() {
        InputOptions in;
        in.scenario_name = scenario;
        in.scenario_config_path = config_path;
        in.n_executions = n;
        in.trace_length = length;
        in.noise_sigma = noise;
        in.scenario_seed = seed;
        in.scenario_seed_set = seed_set;
        const auto cfg = scenario_from_options(in);
        const auto set = synthgen::generate(cfg);

        const fs::path out = resolve_out_dir(out_dir);
        serialize::TraceSetMeta meta;
        meta.sampling_rate = set.sampling_rate;
        meta.n_executions = set.n_executions;
        meta.trace_length = set.trace_length;
        meta.scenario_echo = serialize::scenario_to_json(cfg);
        for (const auto& t : set.traces) {
            const std::string name = trace_file_name(t.execution_id);
            trace::save_trace_csv_file((out / name).string(), t);
            meta.files.push_back(name);
        }
        serialize::write_sidecar((out / kSidecarName).string(), meta);
        std::printf("synth: scenario=%s n=%d length=%d seed=%llu -> %s\n",
                    synthgen::to_string(cfg.scenario).c_str(), set.n_executions,
                    set.trace_length, static_cast<unsigned long long>(cfg.master_seed),
                    out.string().c_str());
        return kExitOk;
    });
}

int cmd_analyze(const std::vector<std::string>& args) {
    CLI::App app{"Run the multi-scale persistence analysis"};
    AnalyzeOptions opt;
    add_analyze_options(app, opt);
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    return wrap_command([&]() {
        apply_thread_env_and_flag(opt.threads);
        json input_echo;
        const auto raw = load_input(opt.input, input_echo);
        const auto mode = trace::normalize_mode_from_string(opt.normalize);
        const auto normalized = trace::normalize_traces(raw, mode);
        const auto cfg = analysis_from_options(opt);
        const auto profile = persistence::run_analysis(normalized, cfg);

        const fs::path out = resolve_out_dir(opt.out_dir);
        const json echo = run_config_echo(cfg, opt.normalize, input_echo);
        if (emit_has(opt.emit, "json")) {
            serialize::write_text_file((out / "profile.json").string(),
                                       serialize::profile_to_json(profile, echo).dump(2) + "\n");
        }
        if (emit_has(opt.emit, "csv")) {
            serialize::write_text_file((out / "profile.csv").string(),
                                       serialize::profile_to_csv(profile));
        }
        if (emit_has(opt.emit, "dumps")) write_dumps(out, normalized, cfg);
        print_profile_summary(profile);
        return kExitOk;
    });
}

int cmd_classify(const std::vector<std::string>& args) {
    CLI::App app{"Classify a persistence profile"};
    std::string profile_path;
    std::string out_dir;
    std::string formats = "json";
    std::string thresholds_path;
    detect::DetectionThresholds defaults;
    double sat_high = defaults.sat_high, sat_low = defaults.sat_low, var_low = defaults.var_low;
    double decay_min = defaults.decay_min, tau_max = defaults.trend_tau_max;
    app.add_option("--profile", profile_path, "profile.json from analyze")->required();
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--format", formats, "Comma list of json,csv,svg");
    app.add_option("--thresholds-config", thresholds_path, "Threshold config file");
    app.add_option("--sat-high", sat_high, "High-saturation threshold");
    app.add_option("--sat-low", sat_low, "Low-saturation threshold");
    app.add_option("--var-low", var_low, "Low-variance threshold");
    app.add_option("--decay-min", decay_min, "Required saturation drop for decay rule");
    app.add_option("--tau-max", tau_max, "Rank-correlation ceiling for decay rule");
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    return wrap_command([&]() {
        const auto profile = serialize::profile_from_json(serialize::load_json_file(profile_path));
        detect::DetectionThresholds thresholds;
        if (!thresholds_path.empty()) {
            const auto kv = config::KvConfig::parse_file(thresholds_path);
            thresholds = config::thresholds_from_kv(kv);
            kv.reject_unknown();
        }
        // explicit flags override the config file
        if (sat_high != defaults.sat_high) thresholds.sat_high = sat_high;
        if (sat_low != defaults.sat_low) thresholds.sat_low = sat_low;
        if (var_low != defaults.var_low) thresholds.var_low = var_low;
        if (decay_min != defaults.decay_min) thresholds.decay_min = decay_min;
        if (tau_max != defaults.trend_tau_max) thresholds.trend_tau_max = tau_max;

        const auto report = detect::classify(profile, thresholds);
        const fs::path out = resolve_out_dir(out_dir);
        if (emit_has(formats, "json")) {
            serialize::write_text_file(
                (out / "report.json").string(),
                detect::render_report(report, profile, detect::ReportFormat::json));
        }
        if (emit_has(formats, "csv")) {
            serialize::write_text_file(
                (out / "report.csv").string(),
                detect::render_report(report, profile, detect::ReportFormat::csv));
        }
        if (emit_has(formats, "svg")) {
            serialize::write_text_file(
                (out / "report.svg").string(),
                detect::render_report(report, profile, detect::ReportFormat::svg));
        }
        std::printf("%s\n", detect::to_string(report.verdict).c_str());
        return kExitOk;
    });
}

int cmd_sweep(const std::vector<std::string>& args) {
    CLI::App app{"Sensitivity sweep over mixture capacity bounds"};
    AnalyzeOptions opt;
    std::string k_max_list = "8,10,12";
    add_analyze_options(app, opt);
    app.add_option("--k-max-list", k_max_list, "Comma list of capacity bounds");
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    return wrap_command([&]() {
        apply_thread_env_and_flag(opt.threads);
        const auto k_values = parse_int_list(k_max_list);
        if (k_values.empty()) throw ConfigError("--k-max-list is empty");
        json input_echo;
        const auto raw = load_input(opt.input, input_echo);
        const auto mode = trace::normalize_mode_from_string(opt.normalize);
        const auto normalized = trace::normalize_traces(raw, mode);
        const auto cfg = analysis_from_options(opt);
        const auto profiles = persistence::sensitivity_sweep(normalized, k_values, cfg);

        const fs::path out = resolve_out_dir(opt.out_dir);
        std::string combined =
            "k_max,window_size,saturation_ratio,within_window_variance,median_complexity\n";
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            const auto& profile = profiles[i];
            persistence::AnalysisConfig cfg_k = cfg;
            cfg_k.k_max = k_values[i];
            const json echo = run_config_echo(cfg_k, opt.normalize, input_echo);
            const std::string tag = "k" + std::to_string(k_values[i]);
            serialize::write_text_file((out / ("profile_" + tag + ".json")).string(),
                                       serialize::profile_to_json(profile, echo).dump(2) + "\n");
            serialize::write_text_file((out / ("profile_" + tag + ".csv")).string(),
                                       serialize::profile_to_csv(profile));
            const auto report = detect::classify(profile, detect::DetectionThresholds{});
            serialize::write_text_file(
                (out / ("report_" + tag + ".json")).string(),
                detect::render_report(report, profile, detect::ReportFormat::json));
            char buf[192];
            for (const auto& sp : profile.scales) {
                std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", k_values[i],
                              sp.window_size, sp.saturation_ratio, sp.within_window_variance,
                              sp.median_complexity);
                combined += buf;
            }
            std::printf("k_max=%d: %s\n", k_values[i],
                        detect::to_string(report.verdict).c_str());
        }
        serialize::write_text_file((out / "sweep_saturation.csv").string(), combined);
        return kExitOk;
    });
}

int run_cli(const std::vector<std::string>& args) {
    if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
        std::printf("usage: emscale <synth|analyze|classify|sweep> [options]\n"
                    "  synth     generate a synthetic EM trace set\n"
                    "  analyze   run the multi-scale persistence analysis\n"
                    "  classify  classify a persistence profile\n"
                    "  sweep     sensitivity sweep over capacity bounds\n"
                    "run 'emscale <command> --help' for command options\n");
        return args.empty() ? kExitConfig : kExitOk;
    }
    const std::string cmd = args[0];
    const std::vector<std::string> rest(args.begin() + 1, args.end());
    if (cmd == "synth") return cmd_synth(rest);
    if (cmd == "analyze") return cmd_analyze(rest);
    if (cmd == "classify") return cmd_classify(rest);
    if (cmd == "sweep") return cmd_sweep(rest);
    std::cerr << "error: unknown command '" << cmd << "'\n";
    return kExitConfig;
}

}  // namespace emscale::cli
