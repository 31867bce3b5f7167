#include "emscale/serialize.hpp"

#include <cstdio>
#include <fstream>

#include "emscale/error.hpp"

namespace emscale::serialize {

namespace {

uint64_t parse_fingerprint(const std::string& s) {
    return std::stoull(s, nullptr, 16);
}

std::string fingerprint_hex(uint64_t fp) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
    return buf;
}

}  // namespace

json profile_to_json(const persistence::PersistenceProfile& profile, const json& config_echo) {
    json scales = json::array();
    for (const auto& sp : profile.scales) {
        scales.push_back({
            {"window_size", sp.window_size},
            {"selected_orders", sp.selected_orders},
            {"saturation_ratio", sp.saturation_ratio},
            {"within_window_variance", sp.within_window_variance},
            {"median_complexity", sp.median_complexity},
            {"n_batches_dropped", sp.n_batches_dropped},
        });
    }
    json j = {
        {"schema_version", kSchemaVersion},
        {"kind", "persistence_profile"},
        {"k_max", profile.k_max},
        {"fingerprint", fingerprint_hex(profile.config_fingerprint)},
        {"scales", scales},
    };
    if (!config_echo.is_null()) j["config"] = config_echo;
    return j;
}

persistence::PersistenceProfile profile_from_json(const json& j) {
    try {
        if (j.at("kind").get<std::string>() != "persistence_profile") {
            throw ConfigError("not a persistence profile");
        }
        persistence::PersistenceProfile profile;
        profile.k_max = j.at("k_max").get<int>();
        profile.config_fingerprint = parse_fingerprint(j.at("fingerprint").get<std::string>());
        for (const auto& s : j.at("scales")) {
            persistence::ScaleProfile sp;
            sp.window_size = s.at("window_size").get<int>();
            sp.selected_orders = s.at("selected_orders").get<std::vector<int>>();
            sp.saturation_ratio = s.at("saturation_ratio").get<double>();
            sp.within_window_variance = s.at("within_window_variance").get<double>();
            sp.median_complexity = s.at("median_complexity").get<double>();
            sp.n_batches_dropped = s.value("n_batches_dropped", 0);
            profile.scales.push_back(std::move(sp));
        }
        return profile;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed profile JSON: ") + e.what());
    }
}

std::string profile_to_csv(const persistence::PersistenceProfile& profile) {
    std::string out = "window_size,saturation_ratio,within_window_variance,median_complexity\n";
    char buf[160];
    for (const auto& sp : profile.scales) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", sp.window_size,
                      sp.saturation_ratio, sp.within_window_variance, sp.median_complexity);
        out += buf;
    }
    return out;
}

json report_to_json(const detect::DetectionReport& report,
                    const persistence::PersistenceProfile& profile) {
    const auto& ev = report.evidence;
    json j = {
        {"schema_version", kSchemaVersion},
        {"kind", "detection_report"},
        {"verdict", detect::to_string(report.verdict)},
        {"degenerate", report.degenerate},
        {"profile_fingerprint", fingerprint_hex(report.profile_fingerprint)},
        {"thresholds",
         {
             {"sat_high", report.thresholds.sat_high},
             {"sat_low", report.thresholds.sat_low},
             {"var_low", report.thresholds.var_low},
             {"decay_min", report.thresholds.decay_min},
             {"trend_tau_max", report.thresholds.trend_tau_max},
         }},
        {"evidence",
         {
             {"window_sizes", ev.window_sizes},
             {"saturation_curve", ev.saturation_curve},
             {"variance_curve", ev.variance_curve},
             {"median_curve", ev.median_curve},
             {"mean_saturation", ev.mean_saturation},
             {"min_saturation", ev.min_saturation},
             {"max_saturation", ev.max_saturation},
             {"saturation_at_smallest_window", ev.saturation_at_smallest_window},
             {"kendall_tau", ev.kendall_tau},
             {"tau_defined", ev.tau_defined},
             {"mean_variance", ev.mean_variance},
         }},
    };
    (void)profile;  // k_max lives in the profile artifact; fingerprint links them
    return j;
}

detect::DetectionReport report_from_json(const json& j) {
    try {
        if (j.at("kind").get<std::string>() != "detection_report") {
            throw ConfigError("not a detection report");
        }
        detect::DetectionReport report;
        report.verdict = detect::verdict_from_string(j.at("verdict").get<std::string>());
        report.degenerate = j.at("degenerate").get<bool>();
        report.profile_fingerprint =
            parse_fingerprint(j.at("profile_fingerprint").get<std::string>());
        const auto& t = j.at("thresholds");
        report.thresholds.sat_high = t.at("sat_high").get<double>();
        report.thresholds.sat_low = t.at("sat_low").get<double>();
        report.thresholds.var_low = t.at("var_low").get<double>();
        report.thresholds.decay_min = t.at("decay_min").get<double>();
        report.thresholds.trend_tau_max = t.at("trend_tau_max").get<double>();
        const auto& e = j.at("evidence");
        auto& ev = report.evidence;
        ev.window_sizes = e.at("window_sizes").get<std::vector<int>>();
        ev.saturation_curve = e.at("saturation_curve").get<std::vector<double>>();
        ev.variance_curve = e.at("variance_curve").get<std::vector<double>>();
        ev.median_curve = e.at("median_curve").get<std::vector<double>>();
        ev.mean_saturation = e.at("mean_saturation").get<double>();
        ev.min_saturation = e.at("min_saturation").get<double>();
        ev.max_saturation = e.at("max_saturation").get<double>();
        ev.saturation_at_smallest_window = e.at("saturation_at_smallest_window").get<double>();
        ev.kendall_tau = e.at("kendall_tau").get<double>();
        ev.tau_defined = e.at("tau_defined").get<bool>();
        ev.mean_variance = e.at("mean_variance").get<double>();
        return report;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed report JSON: ") + e.what());
    }
}

json scenario_to_json(const synthgen::ScenarioConfig& config) {
    json j = {
        {"scenario", synthgen::to_string(config.scenario)},
        {"n_executions", config.n_executions},
        {"trace_length", config.trace_length},
        {"sampling_rate", config.sampling_rate},
        {"master_seed", config.master_seed},
        {"noise_sigma", config.noise_sigma},
        {"baseline",
         {
             {"n_rounds", config.baseline_params.n_rounds},
             {"round_center_freqs", config.baseline_params.round_center_freqs},
             {"round_amplitudes", config.baseline_params.round_amplitudes},
             {"round_bandwidth", config.baseline_params.round_bandwidth},
             {"clock_freq", config.baseline_params.clock_freq},
             {"clock_amplitude", config.baseline_params.clock_amplitude},
             {"round_amplitude_jitter", config.baseline_params.round_amplitude_jitter},
             {"phase_jitter", config.baseline_params.phase_jitter},
         }},
    };
    if (config.li_params) {
        j["li"] = {
            {"carrier_center_freq", config.li_params->carrier_center_freq},
            {"carrier_bandwidth", config.li_params->carrier_bandwidth},
            {"modulation_chip_length", config.li_params->modulation_chip_length},
            {"modulation_depth", config.li_params->modulation_depth},
            {"prng_seed_offset", config.li_params->prng_seed_offset},
        };
    }
    if (config.ro_params) {
        j["ro"] = {
            {"ro_freq", config.ro_params->ro_freq},
            {"ro_amplitude", config.ro_params->ro_amplitude},
            {"freq_jitter", config.ro_params->freq_jitter},
        };
    }
    return j;
}

synthgen::ScenarioConfig scenario_from_json(const json& j) {
    try {
        synthgen::ScenarioConfig config;
        config.scenario = synthgen::scenario_from_string(j.at("scenario").get<std::string>());
        config.n_executions = j.at("n_executions").get<int>();
        config.trace_length = j.at("trace_length").get<int>();
        config.sampling_rate = j.at("sampling_rate").get<double>();
        config.master_seed = j.at("master_seed").get<uint64_t>();
        config.noise_sigma = j.at("noise_sigma").get<double>();
        const auto& b = j.at("baseline");
        auto& bp = config.baseline_params;
        bp.n_rounds = b.at("n_rounds").get<int>();
        bp.round_center_freqs = b.at("round_center_freqs").get<std::vector<double>>();
        bp.round_amplitudes = b.at("round_amplitudes").get<std::vector<double>>();
        bp.round_bandwidth = b.at("round_bandwidth").get<double>();
        bp.clock_freq = b.at("clock_freq").get<double>();
        bp.clock_amplitude = b.at("clock_amplitude").get<double>();
        bp.round_amplitude_jitter = b.at("round_amplitude_jitter").get<double>();
        bp.phase_jitter = b.at("phase_jitter").get<bool>();
        if (j.contains("li")) {
            synthgen::LiParams li;
            li.carrier_center_freq = j["li"].at("carrier_center_freq").get<double>();
            li.carrier_bandwidth = j["li"].at("carrier_bandwidth").get<double>();
            li.modulation_chip_length = j["li"].at("modulation_chip_length").get<int>();
            li.modulation_depth = j["li"].at("modulation_depth").get<double>();
            li.prng_seed_offset = j["li"].at("prng_seed_offset").get<int>();
            config.li_params = li;
        }
        if (j.contains("ro")) {
            synthgen::RoParams ro;
            ro.ro_freq = j["ro"].at("ro_freq").get<double>();
            ro.ro_amplitude = j["ro"].at("ro_amplitude").get<double>();
            ro.freq_jitter = j["ro"].at("freq_jitter").get<double>();
            config.ro_params = ro;
        }
        return config;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed scenario JSON: ") + e.what());
    }
}

json analysis_to_json(const persistence::AnalysisConfig& cfg) {
    return {
        {"window_sizes", cfg.window_sizes},
        {"batch_size", cfg.batch_size},
        {"k_max", cfg.k_max},
        {"n_init", cfg.n_init},
        {"tol", cfg.em.tol},
        {"max_iter", cfg.em.max_iter},
        {"reg", cfg.em.reg},
        {"epsilon", cfg.epsilon},
        {"log1p_stability", cfg.transform.log1p_stability},
        {"standardize", cfg.transform.standardize},
        {"window_function", spectral::to_string(cfg.window_function)},
        {"hop", cfg.hop},
        {"max_fit_points", cfg.max_fit_points},
        {"master_seed", cfg.master_seed},
    };
}

json sidecar_to_json(const TraceSetMeta& meta) {
    json j = {
        {"schema_version", kSchemaVersion},
        {"kind", "traceset_meta"},
        {"sampling_rate", meta.sampling_rate},
        {"n_executions", meta.n_executions},
        {"trace_length", meta.trace_length},
        {"amplitude_scale", meta.amplitude_scale},
        {"header_rows", meta.header_rows},
        {"time_column", meta.time_column},
        {"amplitude_column", meta.amplitude_column},
        {"files", meta.files},
    };
    if (!meta.scenario_echo.is_null()) j["scenario"] = meta.scenario_echo;
    return j;
}

TraceSetMeta sidecar_from_json(const json& j) {
    try {
        TraceSetMeta meta;
        meta.sampling_rate = j.at("sampling_rate").get<double>();
        meta.n_executions = j.at("n_executions").get<int>();
        meta.trace_length = j.at("trace_length").get<int>();
        meta.amplitude_scale = j.value("amplitude_scale", 1.0);
        meta.header_rows = j.value("header_rows", 0);
        meta.time_column = j.value("time_column", -1);
        meta.amplitude_column = j.value("amplitude_column", 0);
        meta.files = j.at("files").get<std::vector<std::string>>();
        if (j.contains("scenario")) meta.scenario_echo = j["scenario"];
        return meta;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed sidecar JSON: ") + e.what());
    }
}

void write_sidecar(const std::string& path, const TraceSetMeta& meta) {
    write_text_file(path, sidecar_to_json(meta).dump(2) + "\n");
}

TraceSetMeta read_sidecar(const std::string& path) {
    return sidecar_from_json(load_json_file(path));
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace emscale::serialize
