#include "emscale/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "emscale/error.hpp"
#include "emscale/parallel.hpp"
#include "emscale/rng.hpp"

namespace emscale::persistence {

void AnalysisConfig::validate(int trace_length, int n_executions) const {
    if (window_sizes.empty()) throw ConfigError("no analysis window sizes configured");
    for (int w : window_sizes) {
        if (w < 2) throw ConfigError("window size must be >= 2");
        if (w > trace_length) {
            throw ConfigError("window size " + std::to_string(w) + " exceeds trace length " +
                              std::to_string(trace_length));
        }
    }
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
    if (n_executions < 2 * batch_size) {
        throw InsufficientDataError("need at least 2 batches: n_executions=" +
                                    std::to_string(n_executions) + " batch_size=" +
                                    std::to_string(batch_size));
    }
    if (k_max < 1) throw ConfigError("k_max must be >= 1");
    if (n_init < 1) throw ConfigError("n_init must be >= 1");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (max_fit_points < 0) throw ConfigError("max_fit_points must be >= 0");
}

namespace {
constexpr std::size_t kMaxPointsPerBin = 44;
}  // namespace

stability::FeatureSet decimate_features(const stability::FeatureSet& features, int cap,
                                        std::size_t n_bins) {
    const std::size_t n = features.n_points();
    std::size_t limit = cap > 0 ? static_cast<std::size_t>(cap) : n;
    // keep every frequency column thin enough that the mixture cannot spend
    // components on single-column collapses
    if (n_bins > 0) limit = std::min(limit, kMaxPointsPerBin * n_bins);
    if (n <= limit) return features;
    std::size_t stride = n / limit;
    // points are laid out frame-major, so a stride sharing a factor with the
    // bin count would sample only a few frequency columns
    while (n_bins > 0 && stride > 1 && std::gcd(stride, n_bins) != 1) ++stride;
    stability::FeatureSet out;
    out.window_size = features.window_size;
    out.transform = features.transform;
    out.degenerate = features.degenerate;
    out.freq.reserve(static_cast<std::size_t>(cap) + 1);
    out.stab.reserve(static_cast<std::size_t>(cap) + 1);
    for (std::size_t i = 0; i < n; i += stride) {
        out.freq.push_back(features.freq[i]);
        out.stab.push_back(features.stab[i]);
    }
    return out;
}

uint64_t AnalysisConfig::fingerprint() const {
    std::string repr = "windows=";
    for (int w : window_sizes) repr += std::to_string(w) + ",";
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  ";batch=%d;k_max=%d;n_init=%d;tol=%.17g;max_iter=%d;reg=%.17g;eps=%.17g;"
                  "log1p=%d;std=%d;win=%s;hop=%d;maxpts=%d;seed=%llu",
                  batch_size, k_max, n_init, em.tol, em.max_iter, em.reg, epsilon,
                  transform.log1p_stability ? 1 : 0, transform.standardize ? 1 : 0,
                  spectral::to_string(window_function).c_str(), hop, max_fit_points,
                  static_cast<unsigned long long>(master_seed));
    repr += buf;
    return tag_hash(repr);
}

std::vector<std::vector<int>> batch_partition(int n_executions, int batch_size) {
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
    const int n_batches = n_executions / batch_size;
    if (n_batches < 2) {
        throw InsufficientDataError("batch partition needs >= 2 full batches (n=" +
                                    std::to_string(n_executions) + ", m=" +
                                    std::to_string(batch_size) + ")");
    }
    std::vector<std::vector<int>> batches(static_cast<std::size_t>(n_batches));
    for (int b = 0; b < n_batches; ++b) {
        auto& ids = batches[static_cast<std::size_t>(b)];
        ids.resize(static_cast<std::size_t>(batch_size));
        for (int i = 0; i < batch_size; ++i) ids[static_cast<std::size_t>(i)] = b * batch_size + i;
    }
    return batches;
}

double saturation_ratio(const std::vector<int>& orders, int k_max) {
    if (orders.empty()) throw InsufficientDataError("saturation_ratio on empty order list");
    std::size_t hits = 0;
    for (int k : orders) {
        if (k < 1 || k > k_max) {
            throw Error("internal consistency: selected order " + std::to_string(k) +
                        " outside [1, " + std::to_string(k_max) + "]");
        }
        if (k == k_max) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(orders.size());
}

double within_window_variance(const std::vector<int>& orders) {
    if (orders.size() < 2) {
        throw InsufficientDataError("within_window_variance needs >= 2 orders");
    }
    // summation over sorted values keeps the metric exactly permutation-invariant
    std::vector<int> sorted = orders;
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (int k : sorted) mean += static_cast<double>(k);
    mean /= static_cast<double>(sorted.size());
    double acc = 0.0;
    for (int k : sorted) {
        const double d = static_cast<double>(k) - mean;
        acc += d * d;
    }
    return acc / static_cast<double>(sorted.size() - 1);
}

double median_complexity(const std::vector<int>& orders) {
    if (orders.empty()) throw InsufficientDataError("median_complexity on empty order list");
    std::vector<int> sorted = orders;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return static_cast<double>(sorted[n / 2]);
    return 0.5 * (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2]));
}

namespace {

std::vector<int> normalized_windows(const AnalysisConfig& cfg) {
    std::vector<int> windows = cfg.window_sizes;
    std::sort(windows.begin(), windows.end());
    windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
    return windows;
}

// Selected order per capacity bound for one (window, batch) cell;
// kOrderFailed marks a bound whose selection failed.
constexpr int kOrderFailed = -1;

std::vector<int> run_cell(const trace::TraceSet& set, const std::vector<int>& batch_ids,
                          int window_size, const spectral::DftPlan& plan,
                          const AnalysisConfig& cfg, const std::vector<int>& k_bounds,
                          uint64_t cell_seed) {
    spectral::StftConfig stft;
    stft.window_size = window_size;
    stft.hop = cfg.hop;
    stft.window_function = cfg.window_function;

    std::vector<spectral::Spectrogram> specs;
    specs.reserve(batch_ids.size());
    for (int id : batch_ids) {
        specs.push_back(
            spectral::stft_magnitude(set.traces[static_cast<std::size_t>(id)], stft, plan));
    }
    const auto map = stability::stability_map(specs, cfg.epsilon);
    const auto features = decimate_features(stability::features_from_map(map, cfg.transform),
                                            cfg.max_fit_points, map.n_bins());

    std::vector<int> orders(k_bounds.size(), kOrderFailed);
    try {
        const auto selections =
            mixture::select_order_sweep(features, k_bounds, cfg.n_init, cell_seed, cfg.em);
        for (std::size_t i = 0; i < k_bounds.size(); ++i) {
            orders[i] = selections[i].selected_k;
        }
    } catch (const NumericalError&) {
        // every order failed for at least one bound; per-bound retry below
        for (std::size_t i = 0; i < k_bounds.size(); ++i) {
            try {
                orders[i] = mixture::select_order(features, k_bounds[i], cfg.n_init, cell_seed,
                                                  cfg.em)
                                .selected_k;
            } catch (const NumericalError&) {
                orders[i] = kOrderFailed;
            }
        }
    }
    return orders;
}

uint64_t cell_seed_for(const AnalysisConfig& cfg, int window_size, int batch_idx) {
    return derive_seed(cfg.master_seed, tag_hash("analysis.cell"),
                       static_cast<uint64_t>(window_size), static_cast<uint64_t>(batch_idx));
}

// Shared grid driver for run_analysis / sensitivity_sweep and their serial
// reference twins.
std::vector<PersistenceProfile> grid_analysis(const trace::TraceSet& set,
                                              const AnalysisConfig& cfg,
                                              const std::vector<int>& k_bounds, bool parallel) {
    set.validate();
    cfg.validate(set.trace_length, set.n_executions);
    for (int kb : k_bounds) {
        if (kb < 1) throw ConfigError("k_max must be >= 1");
    }
    const std::vector<int> windows = normalized_windows(cfg);
    const auto batches = batch_partition(set.n_executions, cfg.batch_size);
    const std::size_t n_windows = windows.size();
    const std::size_t n_batches = batches.size();

    std::vector<spectral::DftPlan> plans;
    plans.reserve(n_windows);
    for (int w : windows) plans.emplace_back(static_cast<std::size_t>(w));

    // cell results: [window][batch][bound]
    std::vector<std::vector<std::vector<int>>> cells(
        n_windows, std::vector<std::vector<int>>(n_batches));
    auto run_one = [&](std::size_t idx) {
        const std::size_t wi = idx / n_batches;
        const std::size_t bi = idx % n_batches;
        cells[wi][bi] = run_cell(set, batches[bi], windows[wi], plans[wi], cfg, k_bounds,
                                 cell_seed_for(cfg, windows[wi], static_cast<int>(bi)));
    };
    if (parallel) {
        parallel_for(n_windows * n_batches, run_one);
    } else {
        for (std::size_t i = 0; i < n_windows * n_batches; ++i) run_one(i);
    }

    std::vector<PersistenceProfile> profiles;
    profiles.reserve(k_bounds.size());
    for (std::size_t ki = 0; ki < k_bounds.size(); ++ki) {
        PersistenceProfile profile;
        profile.k_max = k_bounds[ki];
        AnalysisConfig cfg_k = cfg;
        cfg_k.k_max = k_bounds[ki];
        cfg_k.window_sizes = windows;
        profile.config_fingerprint = cfg_k.fingerprint();
        for (std::size_t wi = 0; wi < n_windows; ++wi) {
            ScaleProfile sp;
            sp.window_size = windows[wi];
            for (std::size_t bi = 0; bi < n_batches; ++bi) {
                const int order = cells[wi][bi][ki];
                if (order == kOrderFailed) {
                    ++sp.n_batches_dropped;
                } else {
                    sp.selected_orders.push_back(order);
                }
            }
            if (sp.selected_orders.size() < 2) {
                throw NumericalError("window " + std::to_string(windows[wi]) +
                                     ": fewer than 2 batches produced a usable selection");
            }
            sp.saturation_ratio = saturation_ratio(sp.selected_orders, profile.k_max);
            sp.within_window_variance = within_window_variance(sp.selected_orders);
            sp.median_complexity = median_complexity(sp.selected_orders);
            profile.scales.push_back(std::move(sp));
        }
        profiles.push_back(std::move(profile));
    }
    return profiles;
}

}  // namespace

ScaleProfile analyze_scale(const trace::TraceSet& set, int window_size,
                           const AnalysisConfig& cfg) {
    AnalysisConfig one = cfg;
    one.window_sizes = {window_size};
    return grid_analysis(set, one, {cfg.k_max}, true).front().scales.front();
}

PersistenceProfile run_analysis(const trace::TraceSet& set, const AnalysisConfig& cfg) {
    return grid_analysis(set, cfg, {cfg.k_max}, true).front();
}

std::vector<PersistenceProfile> sensitivity_sweep(const trace::TraceSet& set,
                                                  const std::vector<int>& k_max_values,
                                                  const AnalysisConfig& cfg) {
    if (k_max_values.empty()) throw ConfigError("sensitivity sweep needs at least one k_max");
    return grid_analysis(set, cfg, k_max_values, true);
}

namespace ref {

PersistenceProfile run_analysis(const trace::TraceSet& set, const AnalysisConfig& cfg) {
    return grid_analysis(set, cfg, {cfg.k_max}, false).front();
}

}  // namespace ref

}  // namespace emscale::persistence
