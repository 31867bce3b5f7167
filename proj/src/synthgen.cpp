#include "emscale/synthgen.hpp"

#include <cmath>
#include <numbers>

#include "emscale/error.hpp"
#include "emscale/parallel.hpp"
#include "emscale/rng.hpp"

namespace emscale::synthgen {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kBandTones = 32;      // tones per round-activity noise burst
constexpr int kCarrierLines = 20;      // coherent leakage-circuit emission lines
constexpr int kCarrierTiers = 10;      // amplitude tiers; two lines per tier
constexpr double kCarrierTierStep = 0.65;  // log-amplitude spacing between tiers
constexpr double kCarrierDoubletSplit = 1.5e-3;  // half-spacing of each line doublet
constexpr double kCarrierRms = 12.5;   // whole-carrier drive
constexpr int kCarrierFillTones = 96;  // low broadband fill across the band
constexpr double kCarrierFillRms = 0.4;

// Component stream tags; streams are isolated so changing one component's
// parameters never shifts another component's randomness.
const uint64_t kTagBandPhase = tag_hash("baseline.band_phase");
const uint64_t kTagRoundAmp = tag_hash("baseline.round_amp");
const uint64_t kTagClock = tag_hash("baseline.clock");
const uint64_t kTagLiCarrier = tag_hash("li.carrier");
const uint64_t kTagLiChips = tag_hash("li.chips");
const uint64_t kTagRo = tag_hash("ro");
const uint64_t kTagNoise = tag_hash("noise");

// Adds a sum of n_tones equally spaced random-phase tones spanning
// [center - bw/2, center + bw/2], scaled so the burst RMS is ~amplitude.
void add_band_tones(std::vector<double>& samples, std::size_t begin, std::size_t end,
                    double center, double bandwidth, double amplitude, double rate, int n_tones,
                    Rng& rng) {
    if (amplitude == 0.0) {
        // keep the stream position stable so other rounds are unaffected
        for (int j = 0; j < n_tones; ++j) rng.uniform();
        return;
    }
    std::vector<double> phases(static_cast<std::size_t>(n_tones));
    std::vector<double> omegas(static_cast<std::size_t>(n_tones));
    for (int j = 0; j < n_tones; ++j) {
        const double f = center - 0.5 * bandwidth +
                         bandwidth * (static_cast<double>(j) + 0.5) / n_tones;
        omegas[static_cast<std::size_t>(j)] = kTwoPi * f / rate;
        phases[static_cast<std::size_t>(j)] = rng.uniform(0.0, kTwoPi);
    }
    // sum of N unit tones has RMS sqrt(N/2); scale to make burst RMS = amplitude
    const double scale = amplitude * std::sqrt(2.0 / n_tones);
    for (std::size_t i = begin; i < end; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n_tones; ++j) {
            acc += std::sin(omegas[static_cast<std::size_t>(j)] * static_cast<double>(i) +
                            phases[static_cast<std::size_t>(j)]);
        }
        samples[i] += scale * acc;
    }
}

}  // namespace

void ScenarioConfig::validate() const {
    if (n_executions < 2) throw ConfigError("scenario needs n_executions >= 2");
    if (trace_length < 4) throw ConfigError("trace_length too small");
    if (!(sampling_rate > 0.0)) throw ConfigError("sampling_rate must be > 0");
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");

    const auto& b = baseline_params;
    if (b.n_rounds < 1) throw ConfigError("n_rounds must be >= 1");
    if (static_cast<int>(b.round_center_freqs.size()) != b.n_rounds) {
        throw ConfigError("round_center_freqs must have one entry per round");
    }
    if (static_cast<int>(b.round_amplitudes.size()) != b.n_rounds) {
        throw ConfigError("round_amplitudes must have one entry per round");
    }
    for (int i = 0; i < b.n_rounds; ++i) {
        const double f = b.round_center_freqs[static_cast<std::size_t>(i)];
        if (!(f < sampling_rate / 2.0)) throw ConfigError("round center frequency above Nyquist");
        for (int j = i + 1; j < b.n_rounds; ++j) {
            if (f == b.round_center_freqs[static_cast<std::size_t>(j)]) {
                throw ConfigError("round center frequencies must be distinct");
            }
        }
    }

    if ((scenario == Scenario::li_ht) != li_params.has_value()) {
        throw ConfigError("li_params present iff scenario = li_ht");
    }
    if ((scenario == Scenario::ro_ht) != ro_params.has_value()) {
        throw ConfigError("ro_params present iff scenario = ro_ht");
    }
    if (li_params) {
        const auto& li = *li_params;
        if (!(li.carrier_center_freq + li.carrier_bandwidth / 2.0 < sampling_rate / 2.0)) {
            throw ConfigError("LI carrier band exceeds Nyquist");
        }
        if (li.modulation_chip_length < 1) throw ConfigError("chip length must be >= 1");
    }
    if (ro_params) {
        const auto& ro = *ro_params;
        if (!(ro.ro_freq < sampling_rate / 2.0)) throw ConfigError("ro_freq above Nyquist");
        if (!(ro.ro_amplitude > 0.0)) throw ConfigError("ro_amplitude must be > 0");
    }
}

void ScenarioConfig::apply_defaults() {
    auto& b = baseline_params;
    if (b.round_center_freqs.empty()) {
        // rounds span a low-frequency arc; neighbours overlap via bandwidth
        b.round_center_freqs.resize(static_cast<std::size_t>(b.n_rounds));
        for (int r = 0; r < b.n_rounds; ++r) {
            const double frac = b.n_rounds == 1 ? 0.0
                                                : static_cast<double>(r) / (b.n_rounds - 1);
            b.round_center_freqs[static_cast<std::size_t>(r)] =
                (0.06 + 0.18 * frac) * sampling_rate;
        }
    }
    b.n_rounds = static_cast<int>(b.round_center_freqs.size());
    if (b.round_amplitudes.empty()) {
        b.round_amplitudes.assign(static_cast<std::size_t>(b.n_rounds), 1.0);
    }
    if (scenario == Scenario::li_ht && !li_params) li_params = LiParams{};
    if (scenario == Scenario::ro_ht && !ro_params) ro_params = RoParams{};
}

std::vector<double> baseline_trace(const BaselineParams& params, int length, double rate,
                                   uint64_t master_seed, int execution_id) {
    std::vector<double> samples(static_cast<std::size_t>(length), 0.0);
    const std::size_t len = samples.size();
    const int rounds = params.n_rounds;
    const std::size_t seg = len / static_cast<std::size_t>(rounds);

    // Band phases: shared across executions unless phase_jitter redraws them.
    const uint64_t phase_exec = params.phase_jitter ? static_cast<uint64_t>(execution_id)
                                                    : UINT64_MAX;
    Rng phase_rng(derive_seed(master_seed, kTagBandPhase, phase_exec));
    Rng amp_rng(derive_seed(master_seed, kTagRoundAmp, static_cast<uint64_t>(execution_id)));

    for (int r = 0; r < rounds; ++r) {
        const std::size_t begin = static_cast<std::size_t>(r) * seg;
        const std::size_t end = (r == rounds - 1) ? len : begin + seg;
        const double jitter_u = amp_rng.uniform(-1.0, 1.0);
        const double amp = params.round_amplitudes[static_cast<std::size_t>(r)] *
                           (1.0 + params.round_amplitude_jitter * jitter_u);
        add_band_tones(samples, begin, end, params.round_center_freqs[static_cast<std::size_t>(r)],
                       params.round_bandwidth, amp, rate, kBandTones, phase_rng);
    }

    if (params.clock_amplitude != 0.0) {
        Rng clock_rng(derive_seed(master_seed, kTagClock, static_cast<uint64_t>(execution_id)));
        const double phi = clock_rng.uniform(0.0, kTwoPi);
        // clock emission strength tracks overall switching activity, so it
        // inherits the per-execution amplitude jitter
        const double amp = params.clock_amplitude *
                           (1.0 + params.round_amplitude_jitter * clock_rng.uniform(-1.0, 1.0));
        const double omega = kTwoPi * params.clock_freq / rate;
        for (std::size_t i = 0; i < len; ++i) {
            samples[i] += amp * std::sin(omega * static_cast<double>(i) + phi);
        }
    }
    return samples;
}

std::vector<double> li_chip_multipliers(const LiParams& params, int execution_id,
                                        uint64_t master_seed, int n_chips) {
    Rng chip_rng(derive_seed(master_seed, kTagLiChips,
                             static_cast<uint64_t>(params.prng_seed_offset + execution_id)));
    std::vector<double> chips(static_cast<std::size_t>(n_chips));
    for (auto& c : chips) {
        const double b = chip_rng.next_bit() ? 1.0 : 0.0;
        c = (1.0 - params.modulation_depth) + 2.0 * params.modulation_depth * b;
    }
    return chips;
}

void add_li_component(std::vector<double>& samples, const LiParams& params, int execution_id,
                      uint64_t master_seed, double rate) {
    const std::size_t len = samples.size();
    // Carrier realization fixed across executions: seeded by master alone.
    // The leakage circuit's frequency response is ragged: the band splits into
    // kCarrierChunks contiguous sub-bands, each at its own frozen power level
    // spanning ~two decades, densely filled with random-phase tones.
    Rng carrier_rng(derive_seed(master_seed, kTagLiCarrier));
    std::vector<double> carrier(len, 0.0);
    {
        const double f_lo = params.carrier_center_freq - 0.5 * params.carrier_bandwidth;
        // tier assignment shuffled so neighbouring lines sit on distant tiers
        int tier_of[kCarrierLines];
        for (int l = 0; l < kCarrierLines; ++l) tier_of[l] = l % kCarrierTiers;
        for (int l = kCarrierLines - 1; l > 0; --l) {
            const int j = static_cast<int>(carrier_rng.uniform_index(static_cast<uint64_t>(l + 1)));
            std::swap(tier_of[l], tier_of[j]);
        }
        double amps[kCarrierLines];
        double power = 0.0;
        for (int l = 0; l < kCarrierLines; ++l) {
            amps[l] = std::exp(kCarrierTierStep * tier_of[l]);
            power += amps[l] * amps[l];
        }
        const double norm = kCarrierRms / std::sqrt(0.5 * power);
        for (int l = 0; l < kCarrierLines; ++l) {
            const double slot = params.carrier_bandwidth / kCarrierLines;
            const double f = f_lo + (l + 0.5) * slot + carrier_rng.uniform(-0.25, 0.25) * slot;
            // each emission line is a close doublet: unresolved at fine
            // windows, a few bins wide at coarse ones
            const double a = norm * amps[l] / std::sqrt(2.0);
            for (int half = 0; half < 2; ++half) {
                const double fd = f + (half == 0 ? -kCarrierDoubletSplit : kCarrierDoubletSplit);
                const double omega = kTwoPi * fd / rate;
                const double phi = carrier_rng.uniform(0.0, kTwoPi);
                for (std::size_t i = 0; i < len; ++i) {
                    carrier[i] += a * std::sin(omega * static_cast<double>(i) + phi);
                }
            }
        }
        add_band_tones(carrier, 0, len, params.carrier_center_freq, params.carrier_bandwidth,
                       kCarrierFillRms, rate, kCarrierFillTones, carrier_rng);
    }
    const int chip_len = params.modulation_chip_length;
    const int n_chips = static_cast<int>((len + static_cast<std::size_t>(chip_len) - 1) /
                                         static_cast<std::size_t>(chip_len));
    const auto chips = li_chip_multipliers(params, execution_id, master_seed, n_chips);
    for (std::size_t i = 0; i < len; ++i) {
        samples[i] += chips[i / static_cast<std::size_t>(chip_len)] * carrier[i];
    }
}

void add_ro_component(std::vector<double>& samples, const RoParams& params, int execution_id,
                      uint64_t master_seed, double rate) {
    if (params.ro_amplitude == 0.0) return;
    Rng ro_rng(derive_seed(master_seed, kTagRo, static_cast<uint64_t>(execution_id)));
    const double jitter = params.freq_jitter * ro_rng.uniform(-1.0, 1.0);
    const double phi = ro_rng.uniform(0.0, kTwoPi);
    const double omega = kTwoPi * params.ro_freq * (1.0 + jitter) / rate;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] += params.ro_amplitude * std::sin(omega * static_cast<double>(i) + phi);
    }
}

trace::TraceSet generate(const ScenarioConfig& input) {
    ScenarioConfig config = input;
    config.apply_defaults();
    config.validate();

    std::vector<trace::Trace> traces(static_cast<std::size_t>(config.n_executions));
    parallel_for(traces.size(), [&](std::size_t e) {
        const int id = static_cast<int>(e);
        std::vector<double> samples =
            baseline_trace(config.baseline_params, config.trace_length, config.sampling_rate,
                           config.master_seed, id);
        if (config.scenario == Scenario::li_ht) {
            add_li_component(samples, *config.li_params, id, config.master_seed,
                             config.sampling_rate);
        } else if (config.scenario == Scenario::ro_ht) {
            add_ro_component(samples, *config.ro_params, id, config.master_seed,
                             config.sampling_rate);
        }
        if (config.noise_sigma > 0.0) {
            Rng noise_rng(derive_seed(config.master_seed, kTagNoise, static_cast<uint64_t>(id)));
            for (double& v : samples) v += config.noise_sigma * noise_rng.normal();
        }
        traces[e].samples = std::move(samples);
        traces[e].sampling_rate = config.sampling_rate;
        traces[e].execution_id = id;
        traces[e].source_label = to_string(config.scenario);
    });

    trace::TraceSet set;
    set.traces = std::move(traces);
    set.n_executions = config.n_executions;
    set.trace_length = config.trace_length;
    set.sampling_rate = config.sampling_rate;
    return set;
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "baseline") return Scenario::baseline;
    if (s == "li_ht") return Scenario::li_ht;
    if (s == "ro_ht") return Scenario::ro_ht;
    throw ConfigError("unknown scenario: " + s + " (expected baseline|li_ht|ro_ht)");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::baseline: return "baseline";
        case Scenario::li_ht: return "li_ht";
        case Scenario::ro_ht: return "ro_ht";
    }
    return "baseline";
}

}  // namespace emscale::synthgen
