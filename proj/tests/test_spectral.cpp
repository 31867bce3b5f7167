#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "emscale/error.hpp"
#include "emscale/parallel.hpp"
#include "emscale/rng.hpp"
#include "emscale/spectral.hpp"

using namespace emscale;
using namespace emscale::spectral;

TEST_SUITE_BEGIN("spectral");

namespace {

trace::Trace random_trace(int length, uint64_t seed) {
    trace::Trace t;
    t.sampling_rate = 1.0;
    Rng rng(seed);
    for (int i = 0; i < length; ++i) t.samples.push_back(rng.normal());
    return t;
}

double frobenius_rel_error(const Matrix& a, const Matrix& b) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        num += d * d;
        den += b.data()[i] * b.data()[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

TEST_CASE("oracle: impulse has flat unit spectrum") {
    const auto spec = dft_oracle({1.0, 0.0, 0.0, 0.0});
    for (const auto& v : spec) CHECK(std::abs(v - std::complex<double>{1.0, 0.0}) < 1e-12);
}

TEST_CASE("oracle: constant frame is DC only") {
    const auto spec = dft_oracle({1.0, 1.0, 1.0, 1.0});
    CHECK(std::abs(spec[0] - std::complex<double>{4.0, 0.0}) < 1e-12);
    for (std::size_t k = 1; k < 4; ++k) CHECK(std::abs(spec[k]) < 1e-12);
}

TEST_CASE("oracle: Parseval on a random length-7 frame") {
    Rng rng(21);
    std::vector<double> frame(7);
    for (auto& v : frame) v = rng.normal();
    const auto spec = dft_oracle(frame);
    double time_energy = 0.0;
    for (double v : frame) time_energy += v * v;
    double freq_energy = 0.0;
    for (const auto& v : spec) freq_energy += std::norm(v);
    freq_energy /= 7.0;
    CHECK(time_energy == doctest::Approx(freq_energy).epsilon(1e-12));
}

TEST_CASE("plan matches oracle on assorted lengths") {
    for (int n : {2, 4, 7, 15, 64, 138, 250}) {
        Rng rng(static_cast<uint64_t>(n));
        std::vector<double> frame(static_cast<std::size_t>(n));
        for (auto& v : frame) v = rng.normal();
        DftPlan plan(static_cast<std::size_t>(n));
        std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
        plan.forward(frame.data(), out.data());
        const auto expect = dft_oracle(frame);
        for (int k = 0; k < n; ++k) {
            CHECK(std::abs(out[static_cast<std::size_t>(k)] -
                           expect[static_cast<std::size_t>(k)]) < 1e-9);
        }
    }
}

TEST_CASE("all-zero trace gives all-zero magnitudes") {
    trace::Trace t;
    t.sampling_rate = 1.0;
    t.samples.assign(512, 0.0);
    StftConfig cfg;
    cfg.window_size = 64;
    const auto s = stft_magnitude(t, cfg);
    for (double v : s.magnitudes.data()) CHECK(v == 0.0);
}

TEST_CASE("bin-centered sinusoid with rectangular window hits one bin") {
    // window 64, frequency exactly at bin 8: every frame sees N/2 at that bin
    const int w = 64;
    const int bin = 8;
    trace::Trace t;
    t.sampling_rate = 1.0;
    const double f = static_cast<double>(bin) / w;
    for (int i = 0; i < 640; ++i) {
        t.samples.push_back(std::sin(2.0 * std::numbers::pi * f * i));
    }
    StftConfig cfg;
    cfg.window_size = w;
    cfg.window_function = WindowFn::rectangular;
    const auto s = stft_magnitude(t, cfg);
    for (std::size_t frame = 0; frame < s.n_frames(); ++frame) {
        for (std::size_t k = 0; k < s.n_bins(); ++k) {
            const double expect = k == bin ? w / 2.0 : 0.0;
            CHECK(std::abs(s.magnitudes(frame, k) - expect) < 1e-9 * (w / 2.0));
        }
    }
}

TEST_CASE("window 138 equals the per-frame oracle") {
    const auto t = random_trace(1000, 77);
    StftConfig cfg;
    cfg.window_size = 138;
    const auto fast = stft_magnitude(t, cfg);
    const auto slow = ref::stft_magnitude(t, cfg);
    CHECK(frobenius_rel_error(fast.magnitudes, slow.magnitudes) < 1e-9);
}

TEST_CASE("frame count formula holds across lengths, windows, hops") {
    for (int len : {64, 65, 130, 1000}) {
        for (int w : {7, 64}) {
            for (int hop : {1, 3, w / 2, w}) {
                if (hop < 1) continue;
                const auto t = random_trace(len, 5);
                StftConfig cfg;
                cfg.window_size = w;
                cfg.hop = hop;
                const auto s = stft_magnitude(t, cfg);
                CHECK(s.n_frames() == static_cast<std::size_t>((len - w) / hop + 1));
            }
        }
    }
}

TEST_CASE("axes: one-sided bins with Nyquist at the top") {
    const auto t = random_trace(300, 9);
    StftConfig cfg;
    cfg.window_size = 64;
    const auto s = stft_magnitude(t, cfg);
    CHECK(s.n_bins() == 33);
    CHECK(s.freq_axis.front() == 0.0);
    CHECK(s.freq_axis.back() == doctest::Approx(0.5));
    for (std::size_t k = 1; k < s.n_bins(); ++k) CHECK(s.freq_axis[k] > s.freq_axis[k - 1]);
}

TEST_CASE("Parseval per frame with rectangular window and one-sided doubling") {
    const auto t = random_trace(256, 13);
    StftConfig cfg;
    cfg.window_size = 64;
    cfg.window_function = WindowFn::rectangular;
    const auto s = stft_magnitude(t, cfg);
    const int hop = cfg.resolved_hop();
    for (std::size_t frame = 0; frame < s.n_frames(); ++frame) {
        double time_energy = 0.0;
        for (int i = 0; i < 64; ++i) {
            const double v = t.samples[frame * static_cast<std::size_t>(hop) +
                                       static_cast<std::size_t>(i)];
            time_energy += v * v;
        }
        double freq_energy = s.magnitudes(frame, 0) * s.magnitudes(frame, 0);
        const std::size_t nyq = s.n_bins() - 1;
        freq_energy += s.magnitudes(frame, nyq) * s.magnitudes(frame, nyq);
        for (std::size_t k = 1; k < nyq; ++k) {
            freq_energy += 2.0 * s.magnitudes(frame, k) * s.magnitudes(frame, k);
        }
        freq_energy /= 64.0;
        CHECK(time_energy == doctest::Approx(freq_energy).epsilon(1e-9));
    }
}

TEST_CASE("window larger than trace is a config error") {
    const auto t = random_trace(100, 3);
    StftConfig cfg;
    cfg.window_size = 128;
    CHECK_THROWS_AS(stft_magnitude(t, cfg), ConfigError);
}

TEST_CASE("parallel batch equals serial batch bit-exactly") {
    trace::TraceSet set;
    set.n_executions = 6;
    set.trace_length = 400;
    set.sampling_rate = 1.0;
    for (int e = 0; e < 6; ++e) {
        auto t = random_trace(400, static_cast<uint64_t>(100 + e));
        t.execution_id = e;
        set.traces.push_back(std::move(t));
    }
    StftConfig cfg;
    cfg.window_size = 138;
    set_max_threads(0);
    const auto par = spectrograms(set, cfg);
    const auto ser = ref::spectrograms(set, cfg);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(par[i].magnitudes == ser[i].magnitudes);
    }
}

TEST_SUITE_END();
