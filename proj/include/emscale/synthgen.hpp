#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emscale/trace.hpp"

namespace emscale::synthgen {

enum class Scenario { baseline, li_ht, ro_ht };

// Round-structured workload emission: one band-limited noise burst per round
// plus a global clock tone. Band noise is a sum of equally spaced random-phase
// tones, so every realization is exactly reproducible.
struct BaselineParams {
    int n_rounds = 10;
    std::vector<double> round_center_freqs;  // Hz; distinct, < rate/2
    std::vector<double> round_amplitudes;    // per-round scale; defaults to 1.0
    double round_bandwidth = 0.055;
    double clock_freq = 0.04;
    double clock_amplitude = 0.5;
    double round_amplitude_jitter = 0.35;  // relative, per execution and round
    bool phase_jitter = true;              // redraw band phases per execution
};

// Workload-correlated leakage component: a fixed broadband carrier multiplied
// by a per-execution two-level chip sequence. Chips derive from
// (prng_seed_offset + execution_id), mimicking plaintext-seeded spreading.
struct LiParams {
    double carrier_center_freq = 0.31;
    double carrier_bandwidth = 0.30;
    int modulation_chip_length = 32;  // samples per chip
    double modulation_depth = 0.002; // chip multipliers are 1 +/- depth
    int prng_seed_offset = 1000;
};

// Workload-independent stationary tone with small per-execution frequency
// jitter and random phase (free-running oscillator, asynchronous to trigger).
struct RoParams {
    double ro_freq = 0.38125;
    double ro_amplitude = 35.0;
    double freq_jitter = 1.2e-5;  // relative, per execution
};

struct ScenarioConfig {
    Scenario scenario = Scenario::baseline;
    int n_executions = 100;
    int trace_length = 16384;
    double sampling_rate = 1.0;  // frequencies below are fractions of this
    uint64_t master_seed = 1;
    double noise_sigma = 0.1;   // white noise std, relative amplitude
    BaselineParams baseline_params;
    std::optional<LiParams> li_params;
    std::optional<RoParams> ro_params;

    void validate() const;
    // Fills round_center_freqs/round_amplitudes defaults and attaches the
    // scenario component params when absent.
    void apply_defaults();
};

// Deterministic: identical config yields a bit-identical TraceSet regardless
// of generation order or thread count.
trace::TraceSet generate(const ScenarioConfig& config);

// Individual component builders (exposed for targeted tests).
std::vector<double> baseline_trace(const BaselineParams& params, int length, double rate,
                                   uint64_t master_seed, int execution_id);
void add_li_component(std::vector<double>& samples, const LiParams& params, int execution_id,
                      uint64_t master_seed, double rate);
void add_ro_component(std::vector<double>& samples, const RoParams& params, int execution_id,
                      uint64_t master_seed, double rate);

// The chip multipliers for one execution (test hook for determinism checks).
std::vector<double> li_chip_multipliers(const LiParams& params, int execution_id,
                                        uint64_t master_seed, int n_chips);

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

}  // namespace emscale::synthgen
