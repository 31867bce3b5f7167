#include "emscale/spectral.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "emscale/error.hpp"
#include "emscale/parallel.hpp"

namespace emscale::spectral {

std::size_t frame_count(std::size_t trace_length, int window_size, int hop) {
    if (window_size <= 0 || hop <= 0) throw ConfigError("window_size and hop must be positive");
    if (trace_length < static_cast<std::size_t>(window_size)) return 0;
    return (trace_length - static_cast<std::size_t>(window_size)) /
               static_cast<std::size_t>(hop) +
           1;
}

std::vector<double> make_window(WindowFn fn, int size) {
    std::vector<double> w(static_cast<std::size_t>(size), 1.0);
    if (fn == WindowFn::hann) {
        for (int i = 0; i < size; ++i) {
            w[static_cast<std::size_t>(i)] =
                0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(size));
        }
    }
    return w;
}

namespace {

void validate_stft_config(const trace::Trace& t, const StftConfig& cfg) {
    if (cfg.window_size < 1) throw ConfigError("window_size must be >= 1");
    if (static_cast<std::size_t>(cfg.window_size) > t.samples.size()) {
        throw ConfigError("window_size " + std::to_string(cfg.window_size) +
                          " exceeds trace length " + std::to_string(t.samples.size()));
    }
    const int hop = cfg.resolved_hop();
    if (hop < 1 || hop > cfg.window_size) throw ConfigError("hop must satisfy 1 <= hop <= window_size");
}

Spectrogram make_axes(const trace::Trace& t, const StftConfig& cfg) {
    Spectrogram s;
    s.window_size = cfg.window_size;
    s.execution_id = t.execution_id;
    const int w = cfg.window_size;
    const std::size_t bins =
        cfg.one_sided ? static_cast<std::size_t>(w / 2 + 1) : static_cast<std::size_t>(w);
    s.freq_axis.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        s.freq_axis[k] = static_cast<double>(k) * t.sampling_rate / static_cast<double>(w);
    }
    const int hop = cfg.resolved_hop();
    const std::size_t frames = frame_count(t.samples.size(), w, hop);
    s.time_axis.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        s.time_axis[i] = (static_cast<double>(i) * hop + 0.5 * w) / t.sampling_rate;
    }
    s.magnitudes = Matrix(frames, bins);
    return s;
}

}  // namespace

Spectrogram stft_magnitude(const trace::Trace& t, const StftConfig& cfg, const DftPlan& plan) {
    validate_stft_config(t, cfg);
    if (plan.size() != static_cast<std::size_t>(cfg.window_size)) {
        throw ConfigError("DFT plan size does not match window size");
    }
    Spectrogram s = make_axes(t, cfg);
    const int w = cfg.window_size;
    const int hop = cfg.resolved_hop();
    const std::vector<double> window = make_window(cfg.window_function, w);
    const std::size_t bins = s.n_bins();

    std::vector<double> frame(static_cast<std::size_t>(w));
    std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(w));
    for (std::size_t fi = 0; fi < s.n_frames(); ++fi) {
        const double* src = t.samples.data() + fi * static_cast<std::size_t>(hop);
        for (int i = 0; i < w; ++i) {
            frame[static_cast<std::size_t>(i)] = src[i] * window[static_cast<std::size_t>(i)];
        }
        plan.forward(frame.data(), spectrum.data());
        double* row = s.magnitudes.row(fi);
        for (std::size_t k = 0; k < bins; ++k) row[k] = std::abs(spectrum[k]);
    }
    return s;
}

Spectrogram stft_magnitude(const trace::Trace& t, const StftConfig& cfg) {
    validate_stft_config(t, cfg);
    DftPlan plan(static_cast<std::size_t>(cfg.window_size));
    return stft_magnitude(t, cfg, plan);
}

std::vector<Spectrogram> spectrograms(const trace::TraceSet& set, const StftConfig& cfg) {
    const DftPlan plan(static_cast<std::size_t>(cfg.window_size));
    std::vector<Spectrogram> out(set.traces.size());
    parallel_for(set.traces.size(), [&](std::size_t i) {
        out[i] = stft_magnitude(set.traces[i], cfg, plan);
    });
    return out;
}

void dump_spectrogram_csv(std::ostream& out, const Spectrogram& s, int hop, double rate) {
    out << "# window_size=" << s.window_size << " hop=" << hop << " rate_hz=" << rate
        << " rows=frames cols=bins\n";
    for (std::size_t r = 0; r < s.n_frames(); ++r) {
        const double* row = s.magnitudes.row(r);
        for (std::size_t c = 0; c < s.n_bins(); ++c) {
            if (c) out << ',';
            out << row[c];
        }
        out << '\n';
    }
}

WindowFn window_fn_from_string(const std::string& s) {
    if (s == "hann") return WindowFn::hann;
    if (s == "rectangular" || s == "rect") return WindowFn::rectangular;
    throw ConfigError("unknown window function: " + s);
}

std::string to_string(WindowFn fn) {
    return fn == WindowFn::hann ? "hann" : "rectangular";
}

namespace ref {

Spectrogram stft_magnitude(const trace::Trace& t, const StftConfig& cfg) {
    validate_stft_config(t, cfg);
    Spectrogram s = make_axes(t, cfg);
    const int w = cfg.window_size;
    const int hop = cfg.resolved_hop();
    const std::vector<double> window = make_window(cfg.window_function, w);
    std::vector<double> frame(static_cast<std::size_t>(w));
    for (std::size_t fi = 0; fi < s.n_frames(); ++fi) {
        const double* src = t.samples.data() + fi * static_cast<std::size_t>(hop);
        for (int i = 0; i < w; ++i) {
            frame[static_cast<std::size_t>(i)] = src[i] * window[static_cast<std::size_t>(i)];
        }
        const auto spectrum = dft_oracle(frame);
        double* row = s.magnitudes.row(fi);
        for (std::size_t k = 0; k < s.n_bins(); ++k) row[k] = std::abs(spectrum[k]);
    }
    return s;
}

std::vector<Spectrogram> spectrograms(const trace::TraceSet& set, const StftConfig& cfg) {
    std::vector<Spectrogram> out;
    out.reserve(set.traces.size());
    for (const auto& t : set.traces) out.push_back(emscale::spectral::stft_magnitude(t, cfg));
    return out;
}

}  // namespace ref

}  // namespace emscale::spectral
