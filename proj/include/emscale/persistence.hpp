#pragma once

#include <cstdint>
#include <vector>

#include "emscale/mixture.hpp"
#include "emscale/spectral.hpp"
#include "emscale/stability.hpp"
#include "emscale/trace.hpp"

namespace emscale::persistence {

struct AnalysisConfig {
    std::vector<int> window_sizes = {64, 128, 138, 256, 512, 1024};
    int batch_size = 10;
    int k_max = 10;
    int n_init = 8;
    mixture::EmParams em;
    double epsilon = 5e-3;
    stability::TransformConfig transform;
    spectral::WindowFn window_function = spectral::WindowFn::hann;
    int hop = 0;  // 0 = window/2
    // Cap on points per mixture fit (0 = no cap). Full maps have one point per
    // time-frequency bin, which at desk scale is ~16k points; BIC order
    // selection needs the penalty term to stay comparable to the likelihood
    // gains, so fits run on a deterministic stride decimation of the cloud.
    int max_fit_points = 3600;
    uint64_t master_seed = 1;

    void validate(int trace_length, int n_executions) const;
    uint64_t fingerprint() const;
};

// Every max(1, n/limit)-th point of the standardized cloud, where the limit
// is the cap joined with a per-frequency-column bound (36 points per bin);
// identity when already satisfied. cap 0 disables the global cap.
stability::FeatureSet decimate_features(const stability::FeatureSet& features, int cap,
                                        std::size_t n_bins = 0);

// Per window size: the BIC-selected order of every batch plus the three
// cross-scale metrics derived from that order distribution.
struct ScaleProfile {
    int window_size = 0;
    std::vector<int> selected_orders;  // one per retained batch
    double saturation_ratio = 0.0;
    double within_window_variance = 0.0;
    double median_complexity = 0.0;
    int n_batches_dropped = 0;
};

struct PersistenceProfile {
    std::vector<ScaleProfile> scales;  // strictly increasing window sizes
    int k_max = 0;
    uint64_t config_fingerprint = 0;
};

// Disjoint in-order batches of exactly batch_size executions; the remainder is
// dropped. Requires at least 2 batches.
std::vector<std::vector<int>> batch_partition(int n_executions, int batch_size);

// Fraction of batches whose selected order reached k_max.
double saturation_ratio(const std::vector<int>& orders, int k_max);

// Sample variance (B - 1) of the selected orders.
double within_window_variance(const std::vector<int>& orders);

// Middle value; mean of the two middle values for even counts.
double median_complexity(const std::vector<int>& orders);

ScaleProfile analyze_scale(const trace::TraceSet& set, int window_size,
                           const AnalysisConfig& cfg);

// Full multi-scale sweep; the (window x batch) grid runs under OpenMP with
// per-cell seeds, so schedules cannot change the profile.
PersistenceProfile run_analysis(const trace::TraceSet& set, const AnalysisConfig& cfg);

// One profile per capacity bound, identical seeds otherwise. Fits are shared
// across bounds; each profile equals an independent run at that bound.
std::vector<PersistenceProfile> sensitivity_sweep(const trace::TraceSet& set,
                                                  const std::vector<int>& k_max_values,
                                                  const AnalysisConfig& cfg);

namespace ref {

// Serial twin of run_analysis: plain nested loops over windows and batches.
PersistenceProfile run_analysis(const trace::TraceSet& set, const AnalysisConfig& cfg);

}  // namespace ref

}  // namespace emscale::persistence
