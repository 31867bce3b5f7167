#include "emscale/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "emscale/error.hpp"

namespace emscale::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    const char* begin = v.c_str();
    char* end = nullptr;
    const double x = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    }
    return x;
}

}  // namespace

KvConfig KvConfig::parse(std::istream& in) {
    KvConfig kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        if (kv.values_.count(key)) {
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                              key + "'");
        }
        kv.values_[key] = value;
    }
    return kv;
}

KvConfig KvConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse(in);
}

bool KvConfig::has(const std::string& key) const { return values_.count(key) != 0; }

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
}

int KvConfig::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    return static_cast<int>(v);
}

uint64_t KvConfig::get_u64(const std::string& key, uint64_t fallback) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an unsigned integer: '" + it->second +
                          "'");
    }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ConfigError("config key '" + key + "': not a boolean: '" + it->second + "'");
}

std::vector<double> KvConfig::get_double_list(const std::string& key,
                                              const std::vector<double>& fallback) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

std::vector<int> KvConfig::get_int_list(const std::string& key,
                                        const std::vector<int>& fallback) const {
    std::vector<double> dflt(fallback.begin(), fallback.end());
    const auto ds = get_double_list(key, dflt);
    std::vector<int> out;
    out.reserve(ds.size());
    for (double d : ds) out.push_back(static_cast<int>(d));
    return out;
}

void KvConfig::reject_unknown() const {
    for (const auto& [key, value] : values_) {
        if (!consumed_.count(key)) {
            throw ConfigError("unknown config key: '" + key + "'");
        }
    }
}

synthgen::ScenarioConfig scenario_from_kv(const KvConfig& kv) {
    synthgen::ScenarioConfig cfg;
    cfg.scenario = synthgen::scenario_from_string(kv.get_string("scenario", "baseline"));
    cfg.n_executions = kv.get_int("n_executions", cfg.n_executions);
    cfg.trace_length = kv.get_int("trace_length", cfg.trace_length);
    cfg.sampling_rate = kv.get_double("sampling_rate", cfg.sampling_rate);
    cfg.master_seed = kv.get_u64("master_seed", cfg.master_seed);
    cfg.noise_sigma = kv.get_double("noise_sigma", cfg.noise_sigma);

    auto& b = cfg.baseline_params;
    b.n_rounds = kv.get_int("baseline.n_rounds", b.n_rounds);
    b.round_center_freqs = kv.get_double_list("baseline.center_freqs", {});
    b.round_amplitudes = kv.get_double_list("baseline.round_amplitudes", {});
    b.round_bandwidth = kv.get_double("baseline.bandwidth", b.round_bandwidth);
    b.clock_freq = kv.get_double("baseline.clock_freq", b.clock_freq);
    b.clock_amplitude = kv.get_double("baseline.clock_amplitude", b.clock_amplitude);
    b.round_amplitude_jitter = kv.get_double("baseline.amplitude_jitter", b.round_amplitude_jitter);
    b.phase_jitter = kv.get_bool("baseline.phase_jitter", b.phase_jitter);

    const synthgen::LiParams li_defaults;
    if (cfg.scenario == synthgen::Scenario::li_ht) {
        synthgen::LiParams li;
        li.carrier_center_freq = kv.get_double("li.center_freq", li_defaults.carrier_center_freq);
        li.carrier_bandwidth = kv.get_double("li.bandwidth", li_defaults.carrier_bandwidth);
        li.modulation_chip_length =
            kv.get_int("li.chip_length", li_defaults.modulation_chip_length);
        li.modulation_depth = kv.get_double("li.depth", li_defaults.modulation_depth);
        li.prng_seed_offset = kv.get_int("li.seed_offset", li_defaults.prng_seed_offset);
        cfg.li_params = li;
    }
    const synthgen::RoParams ro_defaults;
    if (cfg.scenario == synthgen::Scenario::ro_ht) {
        synthgen::RoParams ro;
        ro.ro_freq = kv.get_double("ro.freq", ro_defaults.ro_freq);
        ro.ro_amplitude = kv.get_double("ro.amplitude", ro_defaults.ro_amplitude);
        ro.freq_jitter = kv.get_double("ro.freq_jitter", ro_defaults.freq_jitter);
        cfg.ro_params = ro;
    }
    cfg.apply_defaults();
    return cfg;
}

persistence::AnalysisConfig analysis_from_kv(const KvConfig& kv) {
    persistence::AnalysisConfig cfg;
    cfg.window_sizes = kv.get_int_list("windows", cfg.window_sizes);
    cfg.batch_size = kv.get_int("batch_size", cfg.batch_size);
    cfg.k_max = kv.get_int("k_max", cfg.k_max);
    cfg.n_init = kv.get_int("n_init", cfg.n_init);
    cfg.em.tol = kv.get_double("tol", cfg.em.tol);
    cfg.em.max_iter = kv.get_int("max_iter", cfg.em.max_iter);
    cfg.em.reg = kv.get_double("reg", cfg.em.reg);
    cfg.epsilon = kv.get_double("epsilon", cfg.epsilon);
    cfg.transform.log1p_stability = kv.get_bool("log1p", cfg.transform.log1p_stability);
    cfg.transform.standardize = kv.get_bool("standardize", cfg.transform.standardize);
    cfg.window_function =
        spectral::window_fn_from_string(kv.get_string("window_function", "hann"));
    cfg.hop = kv.get_int("hop", cfg.hop);
    cfg.max_fit_points = kv.get_int("max_fit_points", cfg.max_fit_points);
    cfg.master_seed = kv.get_u64("seed", cfg.master_seed);
    return cfg;
}

detect::DetectionThresholds thresholds_from_kv(const KvConfig& kv) {
    detect::DetectionThresholds t;
    t.sat_high = kv.get_double("sat_high", t.sat_high);
    t.sat_low = kv.get_double("sat_low", t.sat_low);
    t.var_low = kv.get_double("var_low", t.var_low);
    t.decay_min = kv.get_double("decay_min", t.decay_min);
    t.trend_tau_max = kv.get_double("trend_tau_max", t.trend_tau_max);
    return t;
}

}  // namespace emscale::config
