#include "emscale/stability.hpp"

#include <cmath>
#include <ostream>

#include "emscale/error.hpp"

namespace emscale::stability {

StabilityMap stability_map(const std::vector<spectral::Spectrogram>& spectrograms,
                           double epsilon) {
    const std::size_t m = spectrograms.size();
    if (m < 2) throw InsufficientDataError("stability map needs >= 2 spectrograms");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    const auto& first = spectrograms.front();
    for (const auto& s : spectrograms) {
        if (!s.magnitudes.same_shape(first.magnitudes) || s.window_size != first.window_size ||
            s.freq_axis != first.freq_axis) {
            throw ConfigError("incompatible spectrograms in stability batch");
        }
    }

    StabilityMap map;
    map.window_size = first.window_size;
    map.freq_axis = first.freq_axis;
    map.epsilon = epsilon;
    map.mean_spectrum = Matrix(first.n_frames(), first.n_bins());
    map.variance_spectrum = Matrix(first.n_frames(), first.n_bins());
    map.stability = Matrix(first.n_frames(), first.n_bins());
    for (const auto& s : spectrograms) map.batch_ids.push_back(s.execution_id);

    const std::size_t cells = first.magnitudes.size();
    const double inv_m = 1.0 / static_cast<double>(m);
    const double inv_m1 = 1.0 / static_cast<double>(m - 1);
    auto& mean = map.mean_spectrum.data();
    auto& var = map.variance_spectrum.data();
    auto& stab = map.stability.data();
    // Per-bin sums run over sorted values so the result is exactly invariant
    // to the order of spectrograms in the batch.
    std::vector<double> buf(m);
    for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t e = 0; e < m; ++e) buf[e] = spectrograms[e].magnitudes.data()[i];
        std::sort(buf.begin(), buf.end());
        double acc = 0.0;
        for (double v : buf) acc += v;
        mean[i] = acc * inv_m;
        for (double& v : buf) {
            const double d = v - mean[i];
            v = d * d;
        }
        std::sort(buf.begin(), buf.end());
        acc = 0.0;
        for (double v : buf) acc += v;
        var[i] = acc * inv_m1;
        stab[i] = mean[i] / (var[i] + epsilon);
    }
    return map;
}

FeatureSet features_from_map(const StabilityMap& map, const TransformConfig& cfg) {
    FeatureSet fs;
    fs.window_size = map.window_size;
    const std::size_t frames = map.n_frames();
    const std::size_t bins = map.n_bins();
    fs.freq.reserve(frames * bins);
    fs.stab.reserve(frames * bins);
    for (std::size_t t = 0; t < frames; ++t) {
        const double* row = map.stability.row(t);
        for (std::size_t b = 0; b < bins; ++b) {
            fs.freq.push_back(map.freq_axis[b]);
            fs.stab.push_back(cfg.log1p_stability ? std::log1p(row[b]) : row[b]);
        }
    }
    fs.transform.log1p_applied = cfg.log1p_stability;

    if (cfg.standardize && fs.n_points() >= 2) {
        std::vector<double>* dims[2] = {&fs.freq, &fs.stab};
        for (int d = 0; d < 2; ++d) {
            auto& v = *dims[d];
            const double n = static_cast<double>(v.size());
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= n;
            double ss = 0.0;
            bool constant = true;
            for (double x : v) {
                ss += (x - mean) * (x - mean);
                if (x != v.front()) constant = false;
            }
            const double sd = std::sqrt(ss / (n - 1.0));
            fs.transform.mean[d] = mean;
            if (constant || !(sd > 0.0)) {
                fs.transform.scale[d] = 1.0;
                fs.degenerate = true;
                for (double& x : v) x -= mean;
            } else {
                fs.transform.scale[d] = sd;
                const double inv = 1.0 / sd;
                for (double& x : v) x = (x - mean) * inv;
            }
        }
    }
    return fs;
}

void dump_stability_csv(std::ostream& out, const StabilityMap& map) {
    out << "# window_size=" << map.window_size << " epsilon=" << map.epsilon
        << " batch_size=" << map.batch_ids.size() << " rows=frames cols=bins\n";
    for (std::size_t r = 0; r < map.n_frames(); ++r) {
        const double* row = map.stability.row(r);
        for (std::size_t c = 0; c < map.n_bins(); ++c) {
            if (c) out << ',';
            out << row[c];
        }
        out << '\n';
    }
}

}  // namespace emscale::stability
