#include "emscale/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "emscale/error.hpp"
#include "emscale/parallel.hpp"
#include "emscale/rng.hpp"

namespace emscale::mixture {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)
constexpr double kSkipLog = -36.0;  // exp(-36) ~ 2e-16: below double resolution

struct CompCache {
    double inv_xx, inv_xy, inv_yy;  // inverse covariance
    double mx, my;
    double logconst;  // log w - log(2pi) - 0.5 log det
};

void build_cache(const std::vector<GaussianComponent>& comps, CompCache* cache) {
    for (std::size_t j = 0; j < comps.size(); ++j) {
        const auto& c = comps[j];
        const double det = c.cov[0] * c.cov[2] - c.cov[1] * c.cov[1];
        if (!(det > 0.0) || !std::isfinite(det)) {
            throw NumericalError("singular covariance in EM");
        }
        const double inv_det = 1.0 / det;
        cache[j].inv_xx = c.cov[2] * inv_det;
        cache[j].inv_xy = -c.cov[1] * inv_det;
        cache[j].inv_yy = c.cov[0] * inv_det;
        cache[j].mx = c.mean[0];
        cache[j].my = c.mean[1];
        cache[j].logconst = std::log(c.weight) - kLogTwoPi - 0.5 * std::log(det);
    }
}

// Sample data covariance (+reg on the diagonal); the M-step reset target.
void data_covariance(const std::vector<double>& x, const std::vector<double>& y, double reg,
                     double out_mean[2], double out_cov[3]) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double denom = n > 1.0 ? n - 1.0 : 1.0;
    out_mean[0] = mx;
    out_mean[1] = my;
    out_cov[0] = sxx / denom + reg;
    out_cov[1] = sxy / denom;
    out_cov[2] = syy / denom + reg;
}

// Greedy probabilistic farthest-point seeding: first mean uniform, then each
// next mean sampled proportionally to squared distance from the chosen set.
std::vector<std::size_t> seed_means(const std::vector<double>& x, const std::vector<double>& y,
                                    int k, Rng& rng) {
    const std::size_t n = x.size();
    std::vector<std::size_t> picks;
    picks.reserve(static_cast<std::size_t>(k));
    picks.push_back(static_cast<std::size_t>(rng.uniform_index(n)));
    std::vector<double> min_d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - x[picks[0]];
        const double dy = y[i] - y[picks[0]];
        min_d2[i] = dx * dx + dy * dy;
    }
    for (int j = 1; j < k; ++j) {
        double total = 0.0;
        for (double d : min_d2) total += d;
        std::size_t pick;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(rng.uniform_index(n));
        }
        picks.push_back(pick);
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = x[i] - x[pick];
            const double dy = y[i] - y[pick];
            const double d2 = dx * dx + dy * dy;
            if (d2 < min_d2[i]) min_d2[i] = d2;
        }
    }
    return picks;
}

// Clamp the smallest eigenvalue of a symmetric 2x2 to at least reg.
void enforce_pd(double cov[3], double reg) {
    const double tr = cov[0] + cov[2];
    const double diff = cov[0] - cov[2];
    const double disc = std::sqrt(diff * diff + 4.0 * cov[1] * cov[1]);
    const double eig_min = 0.5 * (tr - disc);
    if (eig_min < reg) {
        const double bump = reg - eig_min;
        cov[0] += bump;
        cov[2] += bump;
    }
}

struct EStepResult {
    double log_likelihood = 0.0;
    // per-component accumulators: N, Sx, Sy, Sxx, Sxy, Syy
    std::vector<double> stats;
};

// Indices of the `count` points with the lowest log-likelihood under the
// model; ties resolve to the lower index.
std::vector<std::size_t> worst_points(const std::vector<double>& x, const std::vector<double>& y,
                                      const std::vector<GaussianComponent>& comps,
                                      std::size_t count) {
    const std::size_t n = x.size();
    CompCache cache[32];
    build_cache(comps, cache);
    std::vector<std::pair<double, std::size_t>> scored(n);
    double lp[32];
    for (std::size_t i = 0; i < n; ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < comps.size(); ++j) {
            const CompCache& c = cache[j];
            const double dx = x[i] - c.mx;
            const double dy = y[i] - c.my;
            lp[j] = c.logconst -
                    0.5 * (c.inv_xx * dx * dx + 2.0 * c.inv_xy * dx * dy + c.inv_yy * dy * dy);
            if (lp[j] > m) m = lp[j];
        }
        double s = 0.0;
        for (std::size_t j = 0; j < comps.size(); ++j) s += std::exp(lp[j] - m);
        scored[i] = {m + std::log(s), i};
    }
    count = std::min(count, n);
    std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(count), scored.end());
    std::vector<std::size_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = scored[i].second;
    return out;
}

EStepResult e_step(const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<GaussianComponent>& comps) {
    const std::size_t n = x.size();
    const int k = static_cast<int>(comps.size());
    CompCache cache[32];
    build_cache(comps, cache);

    EStepResult res;
    res.stats.assign(static_cast<std::size_t>(k) * 6, 0.0);
    double lp[32];
    double pe[32];
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        const double yi = y[i];
        double m = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            const CompCache& c = cache[j];
            const double dx = xi - c.mx;
            const double dy = yi - c.my;
            const double q = c.inv_xx * dx * dx + 2.0 * c.inv_xy * dx * dy + c.inv_yy * dy * dy;
            lp[j] = c.logconst - 0.5 * q;
            if (lp[j] > m) m = lp[j];
        }
        double s = 0.0;
        for (int j = 0; j < k; ++j) {
            const double d = lp[j] - m;
            pe[j] = d > kSkipLog ? std::exp(d) : 0.0;
            s += pe[j];
        }
        ll += m + std::log(s);
        const double inv_s = 1.0 / s;
        for (int j = 0; j < k; ++j) {
            if (pe[j] == 0.0) continue;
            const double r = pe[j] * inv_s;
            double* st = res.stats.data() + static_cast<std::size_t>(j) * 6;
            st[0] += r;
            st[1] += r * xi;
            st[2] += r * yi;
            st[3] += r * xi * xi;
            st[4] += r * xi * yi;
            st[5] += r * yi * yi;
        }
    }
    res.log_likelihood = ll;
    return res;
}

}  // namespace

double bic(double log_likelihood, int k, std::size_t n) {
    if (n < 1 || k < 1) throw ConfigError("bic needs n >= 1 and k >= 1");
    return -2.0 * log_likelihood +
           static_cast<double>(free_parameters(k)) * std::log(static_cast<double>(n));
}

GmmFit fit_gmm_em(const stability::FeatureSet& features, int k, uint64_t init_seed,
                  const EmParams& em) {
    const std::vector<double>& x = features.freq;
    const std::vector<double>& y = features.stab;
    const std::size_t n = x.size();
    if (k < 1 || k > 30) throw ConfigError("component count out of range");
    if (n < 5 * static_cast<std::size_t>(k)) {
        throw InsufficientDataError("EM needs at least 5k points: n=" + std::to_string(n) +
                                    " k=" + std::to_string(k));
    }

    double dmean[2];
    double dcov[3];
    data_covariance(x, y, em.reg, dmean, dcov);
    enforce_pd(dcov, em.reg);

    GmmFit fit;
    fit.k = k;
    fit.init_seed = init_seed;
    fit.components.resize(static_cast<std::size_t>(k));
    {
        Rng rng(init_seed);
        const auto picks = seed_means(x, y, k, rng);
        // Init covariance is the data covariance shrunk by 1/k: each component
        // is expected to own ~1/k of the spread. Seeding with the full data
        // covariance makes every component cover the whole cloud and EM then
        // settles into coarse region averages regardless of restart.
        const double shrink = 1.0 / static_cast<double>(k);
        for (int j = 0; j < k; ++j) {
            auto& c = fit.components[static_cast<std::size_t>(j)];
            c.weight = 1.0 / static_cast<double>(k);
            c.mean[0] = x[picks[static_cast<std::size_t>(j)]];
            c.mean[1] = y[picks[static_cast<std::size_t>(j)]];
            c.cov[0] = dcov[0] * shrink + em.reg;
            c.cov[1] = dcov[1] * shrink;
            c.cov[2] = dcov[2] * shrink + em.reg;
        }
    }

    double ll_prev = -std::numeric_limits<double>::infinity();
    bool reseeded_last = false;
    for (int iter = 0;; ++iter) {
        EStepResult e = e_step(x, y, fit.components);
        if (!std::isfinite(e.log_likelihood)) throw NumericalError("non-finite log-likelihood");
        fit.ll_history.push_back(e.log_likelihood);
        fit.log_likelihood = e.log_likelihood;

        if (iter > 0 && !reseeded_last &&
            e.log_likelihood - ll_prev < em.tol * (1.0 + std::abs(e.log_likelihood))) {
            fit.converged = true;
            break;
        }
        if (iter >= em.max_iter) break;
        ll_prev = e.log_likelihood;

        // M-step
        reseeded_last = false;
        std::vector<std::size_t> collapsed;
        for (int j = 0; j < k; ++j) {
            const double* st = e.stats.data() + static_cast<std::size_t>(j) * 6;
            auto& c = fit.components[static_cast<std::size_t>(j)];
            if (st[0] < 1.0) {  // effective weight below 1/n
                collapsed.push_back(static_cast<std::size_t>(j));
                continue;
            }
            const double nj = st[0];
            c.weight = nj / static_cast<double>(n);
            c.mean[0] = st[1] / nj;
            c.mean[1] = st[2] / nj;
            c.cov[0] = st[3] / nj - c.mean[0] * c.mean[0] + em.reg;
            c.cov[1] = st[4] / nj - c.mean[0] * c.mean[1];
            c.cov[2] = st[5] / nj - c.mean[1] * c.mean[1] + em.reg;
            enforce_pd(c.cov, 0.5 * em.reg);
        }
        if (!collapsed.empty()) {
            // Reseed collapsed components at the worst-explained points
            // (lowest per-point log-likelihood under the pre-update model).
            const auto anchors = worst_points(x, y, fit.components, collapsed.size());
            for (std::size_t idx = 0; idx < collapsed.size(); ++idx) {
                auto& c = fit.components[collapsed[idx]];
                c.mean[0] = x[anchors[idx]];
                c.mean[1] = y[anchors[idx]];
                c.cov[0] = dcov[0];
                c.cov[1] = dcov[1];
                c.cov[2] = dcov[2];
                c.weight = 1.0 / static_cast<double>(n);
            }
            double wsum = 0.0;
            for (const auto& c : fit.components) wsum += c.weight;
            for (auto& c : fit.components) c.weight /= wsum;
            fit.reseed_iterations.push_back(iter + 1);
            reseeded_last = true;
        } else {
            double wsum = 0.0;
            for (const auto& c : fit.components) wsum += c.weight;
            for (auto& c : fit.components) c.weight /= wsum;
        }
        fit.n_iterations = iter + 1;
    }

    fit.bic = bic(fit.log_likelihood, k, n);
    return fit;
}

Matrix responsibilities(const stability::FeatureSet& features, const GmmFit& fit) {
    const std::size_t n = features.n_points();
    const int k = fit.k;
    CompCache cache[32];
    build_cache(fit.components, cache);
    Matrix resp(n, static_cast<std::size_t>(k));
    double lp[32];
    for (std::size_t i = 0; i < n; ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            const CompCache& c = cache[j];
            const double dx = features.freq[i] - c.mx;
            const double dy = features.stab[i] - c.my;
            lp[j] = c.logconst -
                    0.5 * (c.inv_xx * dx * dx + 2.0 * c.inv_xy * dx * dy + c.inv_yy * dy * dy);
            if (lp[j] > m) m = lp[j];
        }
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += std::exp(lp[j] - m);
        for (int j = 0; j < k; ++j) {
            resp(i, static_cast<std::size_t>(j)) = std::exp(lp[j] - m) / s;
        }
    }
    return resp;
}

namespace {

std::optional<GmmFit> try_fit(const stability::FeatureSet& features, int k, uint64_t seed,
                              const EmParams& em) {
    try {
        return fit_gmm_em(features, k, seed, em);
    } catch (const Error&) {
        return std::nullopt;
    }
}

ModelSelection select_from(std::map<int, GmmFit> per_k_best, int k_max) {
    // restrict to k <= k_max
    for (auto it = per_k_best.begin(); it != per_k_best.end();) {
        if (it->first > k_max) {
            it = per_k_best.erase(it);
        } else {
            ++it;
        }
    }
    if (per_k_best.empty()) {
        throw NumericalError("model selection failed: no order produced a usable fit");
    }
    ModelSelection sel;
    sel.k_max = k_max;
    int best_k = 0;
    double best_bic = std::numeric_limits<double>::infinity();
    for (const auto& [k, fit] : per_k_best) {  // ascending k: ties keep smaller k
        if (fit.bic < best_bic - 1e-6) {
            best_bic = fit.bic;
            best_k = k;
        }
    }
    sel.selected_k = best_k;
    sel.per_k_best = std::move(per_k_best);
    return sel;
}

std::map<int, GmmFit> best_fits_up_to(const stability::FeatureSet& features, int k_top,
                                      int n_init, uint64_t master_seed, const EmParams& em,
                                      bool parallel) {
    if (k_top < 1 || n_init < 1) throw ConfigError("select_order needs k_max >= 1, n_init >= 1");
    const std::size_t cells = static_cast<std::size_t>(k_top) * static_cast<std::size_t>(n_init);
    std::vector<std::optional<GmmFit>> fits(cells);
    auto run_cell = [&](std::size_t idx) {
        const int k = 1 + static_cast<int>(idx) / n_init;
        const int r = static_cast<int>(idx) % n_init;
        const uint64_t seed = derive_seed(master_seed, tag_hash("gmm.restart"),
                                          static_cast<uint64_t>(k), static_cast<uint64_t>(r));
        fits[idx] = try_fit(features, k, seed, em);
    };
    if (parallel) {
        parallel_for(cells, run_cell);
    } else {
        for (std::size_t i = 0; i < cells; ++i) run_cell(i);
    }

    std::map<int, GmmFit> best;
    for (int k = 1; k <= k_top; ++k) {
        const GmmFit* best_fit = nullptr;
        for (int r = 0; r < n_init; ++r) {
            const auto& f = fits[static_cast<std::size_t>(k - 1) * n_init + r];
            if (f && (!best_fit || f->log_likelihood > best_fit->log_likelihood)) {
                best_fit = &*f;
            }
        }
        if (best_fit) best.emplace(k, *best_fit);
    }
    return best;
}

ModelSelection degenerate_selection(const stability::FeatureSet& features, int k_max,
                                    uint64_t master_seed, const EmParams& em) {
    // Constant feature dimension: minimum complexity by definition.
    const uint64_t seed =
        derive_seed(master_seed, tag_hash("gmm.restart"), uint64_t{1}, uint64_t{0});
    ModelSelection sel;
    sel.k_max = k_max;
    sel.selected_k = 1;
    sel.per_k_best.emplace(1, fit_gmm_em(features, 1, seed, em));
    return sel;
}

}  // namespace

ModelSelection select_order(const stability::FeatureSet& features, int k_max, int n_init,
                            uint64_t master_seed, const EmParams& em) {
    if (features.degenerate) return degenerate_selection(features, k_max, master_seed, em);
    return select_from(best_fits_up_to(features, k_max, n_init, master_seed, em, true), k_max);
}

std::vector<ModelSelection> select_order_sweep(const stability::FeatureSet& features,
                                               const std::vector<int>& k_max_values, int n_init,
                                               uint64_t master_seed, const EmParams& em) {
    if (k_max_values.empty()) throw ConfigError("empty k_max sweep");
    std::vector<ModelSelection> out;
    if (features.degenerate) {
        for (int k_max : k_max_values) {
            out.push_back(degenerate_selection(features, k_max, master_seed, em));
        }
        return out;
    }
    const int k_top = *std::max_element(k_max_values.begin(), k_max_values.end());
    const auto best = best_fits_up_to(features, k_top, n_init, master_seed, em, true);
    for (int k_max : k_max_values) out.push_back(select_from(best, k_max));
    return out;
}

namespace ref {

ModelSelection select_order(const stability::FeatureSet& features, int k_max, int n_init,
                            uint64_t master_seed, const EmParams& em) {
    if (features.degenerate) return degenerate_selection(features, k_max, master_seed, em);
    return select_from(best_fits_up_to(features, k_max, n_init, master_seed, em, false), k_max);
}

}  // namespace ref

}  // namespace emscale::mixture
