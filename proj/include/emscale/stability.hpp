#pragma once

#include <vector>

#include "emscale/matrix.hpp"
#include "emscale/spectral.hpp"

namespace emscale::stability {

// Cross-execution spectral stability: per time-frequency bin, the ratio of the
// mean magnitude to its variance across the batch. High values mark spectral
// structure that persists over repeated executions.
struct StabilityMap {
    Matrix stability;          // mean / (variance + epsilon)
    Matrix mean_spectrum;
    Matrix variance_spectrum;  // sample variance (m - 1)
    std::vector<double> freq_axis;
    int window_size = 0;
    std::vector<int> batch_ids;
    double epsilon = 0.0;

    std::size_t n_frames() const { return stability.rows(); }
    std::size_t n_bins() const { return stability.cols(); }
};

struct TransformConfig {
    bool log1p_stability = true;
    bool standardize = true;
};

struct TransformInfo {
    bool log1p_applied = false;
    double mean[2] = {0.0, 0.0};   // per dimension: frequency, stability
    double scale[2] = {1.0, 1.0};
};

// One point per (frame, bin): (frequency, transformed stability). The time
// index is discarded. Stored SoA for the mixture fit.
struct FeatureSet {
    std::vector<double> freq;
    std::vector<double> stab;
    int window_size = 0;
    TransformInfo transform;
    bool degenerate = false;  // a dimension was constant under standardization

    std::size_t n_points() const { return freq.size(); }
};

StabilityMap stability_map(const std::vector<spectral::Spectrogram>& spectrograms, double epsilon);

FeatureSet features_from_map(const StabilityMap& map, const TransformConfig& cfg);

void dump_stability_csv(std::ostream& out, const StabilityMap& map);

}  // namespace emscale::stability
