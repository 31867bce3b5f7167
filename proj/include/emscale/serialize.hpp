#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "emscale/detect.hpp"
#include "emscale/persistence.hpp"
#include "emscale/synthgen.hpp"
#include "emscale/trace.hpp"

namespace emscale::serialize {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---- persistence profile -------------------------------------------------

// config_echo carries the full effective run configuration so the artifact is
// reproducible from the JSON alone.
json profile_to_json(const persistence::PersistenceProfile& profile, const json& config_echo);

persistence::PersistenceProfile profile_from_json(const json& j);

// window_size,saturation_ratio,within_window_variance,median_complexity rows.
std::string profile_to_csv(const persistence::PersistenceProfile& profile);

// ---- detection report ----------------------------------------------------

json report_to_json(const detect::DetectionReport& report,
                    const persistence::PersistenceProfile& profile);

detect::DetectionReport report_from_json(const json& j);

// ---- scenario / analysis config echoes ------------------------------------

json scenario_to_json(const synthgen::ScenarioConfig& config);
synthgen::ScenarioConfig scenario_from_json(const json& j);

json analysis_to_json(const persistence::AnalysisConfig& cfg);

// ---- trace-set metadata sidecar -------------------------------------------

struct TraceSetMeta {
    double sampling_rate = 1.0;
    int n_executions = 0;
    int trace_length = 0;
    double amplitude_scale = 1.0;
    int header_rows = 0;
    int time_column = -1;    // -1 = single amplitude column
    int amplitude_column = 0;
    std::vector<std::string> files;  // relative to the sidecar directory
    json scenario_echo;              // present for synthesized sets
};

json sidecar_to_json(const TraceSetMeta& meta);
TraceSetMeta sidecar_from_json(const json& j);

void write_sidecar(const std::string& path, const TraceSetMeta& meta);
TraceSetMeta read_sidecar(const std::string& path);

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace emscale::serialize
