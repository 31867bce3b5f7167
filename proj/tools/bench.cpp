// Benchmark: OpenMP kernels against their serial reference twins on a
// desk-scale workload, verifying bit-identical output along the way.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>

#include "emscale/parallel.hpp"
#include "emscale/persistence.hpp"
#include "emscale/spectral.hpp"
#include "emscale/synthgen.hpp"
#include "emscale/trace.hpp"

using namespace emscale;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool profiles_equal(const persistence::PersistenceProfile& a,
                    const persistence::PersistenceProfile& b) {
    if (a.k_max != b.k_max || a.scales.size() != b.scales.size()) return false;
    for (std::size_t i = 0; i < a.scales.size(); ++i) {
        const auto& x = a.scales[i];
        const auto& y = b.scales[i];
        if (x.window_size != y.window_size || x.selected_orders != y.selected_orders ||
            x.saturation_ratio != y.saturation_ratio ||
            x.within_window_variance != y.within_window_variance ||
            x.median_complexity != y.median_complexity) {
            return false;
        }
    }
    return true;
}

bool spectrograms_equal(const std::vector<spectral::Spectrogram>& a,
                        const std::vector<spectral::Spectrogram>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i].magnitudes == b[i].magnitudes)) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) quick = true;
    }

    synthgen::ScenarioConfig scen;
    scen.scenario = synthgen::Scenario::ro_ht;
    scen.n_executions = quick ? 20 : 40;
    scen.trace_length = quick ? 4096 : 8192;
    scen.master_seed = 99;
    scen.apply_defaults();
    const auto set = trace::normalize_traces(synthgen::generate(scen),
                                             trace::NormalizeMode::per_trace_zscore);

    persistence::AnalysisConfig cfg;
    cfg.window_sizes = quick ? std::vector<int>{64, 138} : std::vector<int>{64, 138, 256};
    cfg.batch_size = quick ? 5 : 10;
    cfg.k_max = quick ? 6 : 10;
    cfg.n_init = quick ? 2 : 3;
    cfg.master_seed = 7;

    std::printf("bench config: n=%d length=%d windows=%zu batch=%d k_max=%d n_init=%d\n",
                scen.n_executions, scen.trace_length, cfg.window_sizes.size(), cfg.batch_size,
                cfg.k_max, cfg.n_init);

    spectral::StftConfig stft;
    stft.window_size = 138;

    set_max_threads(1);
    auto t0 = std::chrono::steady_clock::now();
    const auto specs_serial = spectral::ref::spectrograms(set, stft);
    const double stft_serial = seconds_since(t0);

    set_max_threads(0);
    t0 = std::chrono::steady_clock::now();
    const auto specs_parallel = spectral::spectrograms(set, stft);
    const double stft_parallel = seconds_since(t0);

    if (!spectrograms_equal(specs_serial, specs_parallel)) {
        std::printf("FAIL: spectrogram batch differs between serial and OpenMP paths\n");
        return 1;
    }

    t0 = std::chrono::steady_clock::now();
    const auto profile_serial = persistence::ref::run_analysis(set, cfg);
    const double analysis_serial = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto profile_parallel = persistence::run_analysis(set, cfg);
    const double analysis_parallel = seconds_since(t0);

    if (!profiles_equal(profile_serial, profile_parallel)) {
        std::printf("FAIL: analysis profile differs between serial and OpenMP paths\n");
        return 1;
    }

    std::printf("\n%-28s %10s %10s %8s\n", "kernel", "serial(s)", "openmp(s)", "speedup");
    std::printf("%-28s %10.3f %10.3f %7.2fx\n", "stft batch (w=138)", stft_serial, stft_parallel,
                stft_serial / std::max(stft_parallel, 1e-9));
    std::printf("%-28s %10.3f %10.3f %7.2fx\n", "multi-scale analysis", analysis_serial,
                analysis_parallel, analysis_serial / std::max(analysis_parallel, 1e-9));
    std::printf("\nserial and OpenMP outputs are bit-identical\n");
    return 0;
}
