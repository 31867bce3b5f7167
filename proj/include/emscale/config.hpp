#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "emscale/detect.hpp"
#include "emscale/persistence.hpp"
#include "emscale/synthgen.hpp"

namespace emscale::config {

// Human-editable key/value text: one `key = value` per line, `#` comments,
// comma-separated lists. Unknown keys are rejected so typos surface early.
class KvConfig {
public:
    static KvConfig parse(std::istream& in);
    static KvConfig parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

    // Throws ConfigError naming any key never read by a getter.
    void reject_unknown() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

// Reads the documented scenario schema (scenario, n_executions, baseline.*,
// li.*, ro.*) and fills defaults for everything absent.
synthgen::ScenarioConfig scenario_from_kv(const KvConfig& kv);

// Reads the documented analysis schema (windows, batch_size, k_max, ...).
persistence::AnalysisConfig analysis_from_kv(const KvConfig& kv);

// Reads the detection threshold keys (sat_high, sat_low, ...).
detect::DetectionThresholds thresholds_from_kv(const KvConfig& kv);

}  // namespace emscale::config
