#pragma once

#include <string>
#include <vector>

#include "emscale/fft.hpp"
#include "emscale/matrix.hpp"
#include "emscale/trace.hpp"

namespace emscale::spectral {

enum class WindowFn { hann, rectangular };

struct StftConfig {
    int window_size = 138;
    int hop = 0;  // 0 resolves to window_size / 2 (min 1)
    WindowFn window_function = WindowFn::hann;
    bool one_sided = true;

    int resolved_hop() const {
        if (hop > 0) return hop;
        return window_size >= 2 ? window_size / 2 : 1;
    }
};

// Magnitude time-frequency matrix for one trace at one window size.
struct Spectrogram {
    Matrix magnitudes;             // [n_frames x n_bins], |X|, not power
    std::vector<double> freq_axis; // Hz (or normalized when rate = 1)
    std::vector<double> time_axis; // frame centers, seconds
    int window_size = 0;
    int execution_id = 0;

    std::size_t n_frames() const { return magnitudes.rows(); }
    std::size_t n_bins() const { return magnitudes.cols(); }
};

// Frames that would overrun the trace end are dropped; no zero padding.
// frame count = floor((len - window) / hop) + 1.
std::size_t frame_count(std::size_t trace_length, int window_size, int hop);

std::vector<double> make_window(WindowFn fn, int size);

Spectrogram stft_magnitude(const trace::Trace& t, const StftConfig& cfg);

// Shared plan variant for hot loops (plan size must match cfg.window_size).
Spectrogram stft_magnitude(const trace::Trace& t, const StftConfig& cfg, const DftPlan& plan);

// Spectrograms for every execution in the set; OpenMP across executions.
std::vector<Spectrogram> spectrograms(const trace::TraceSet& set, const StftConfig& cfg);

// CSV dump with a one-line header naming window size, hop, and axis units.
void dump_spectrogram_csv(std::ostream& out, const Spectrogram& s, int hop, double rate);

WindowFn window_fn_from_string(const std::string& s);
std::string to_string(WindowFn fn);

namespace ref {

// Serial reference: per-frame brute-force DFT, no FFT plan, no threading.
Spectrogram stft_magnitude(const trace::Trace& t, const StftConfig& cfg);

std::vector<Spectrogram> spectrograms(const trace::TraceSet& set, const StftConfig& cfg);

}  // namespace ref

}  // namespace emscale::spectral
