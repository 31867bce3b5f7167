#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "emscale/matrix.hpp"
#include "emscale/stability.hpp"

namespace emscale::mixture {

// One full-covariance 2-D Gaussian. Covariance stored as (xx, xy, yy).
struct GaussianComponent {
    double weight = 1.0;
    double mean[2] = {0.0, 0.0};
    double cov[3] = {1.0, 0.0, 1.0};
};

struct EmParams {
    double tol = 1e-6;    // relative log-likelihood improvement
    int max_iter = 200;
    double reg = 3e-3;    // added to covariance diagonals each M-step
};

struct GmmFit {
    std::vector<GaussianComponent> components;
    int k = 0;
    double log_likelihood = 0.0;
    double bic = 0.0;
    int n_iterations = 0;
    bool converged = false;
    uint64_t init_seed = 0;
    std::vector<double> ll_history;    // log-likelihood per E-step
    std::vector<int> reseed_iterations;  // M-steps that reseeded a collapsed component
};

// BIC-optimal order over k = 1..k_max, best-of-restarts per k.
struct ModelSelection {
    std::map<int, GmmFit> per_k_best;
    int selected_k = 0;
    int k_max = 0;
};

// 2-D full covariance: (k-1) weights + 2k means + 3k covariances.
inline int free_parameters(int k) { return 6 * k - 1; }

double bic(double log_likelihood, int k, std::size_t n);

// EM with distance-weighted data-point seeding of the means, log-domain
// responsibilities, and covariance regularization. Throws
// InsufficientDataError when n < 5k and NumericalError on non-finite
// likelihoods.
GmmFit fit_gmm_em(const stability::FeatureSet& features, int k, uint64_t init_seed,
                  const EmParams& em);

// Restarts seeded from (master_seed, k, restart index); the best restart per k
// is the highest log-likelihood. BIC ties within 1e-6 resolve to smaller k.
ModelSelection select_order(const stability::FeatureSet& features, int k_max, int n_init,
                            uint64_t master_seed, const EmParams& em);

// Shared-fit variant for capacity sweeps: fits k = 1..max(k_max_values) once,
// then selects within each bound. Each element equals an independent
// select_order run at that bound.
std::vector<ModelSelection> select_order_sweep(const stability::FeatureSet& features,
                                               const std::vector<int>& k_max_values, int n_init,
                                               uint64_t master_seed, const EmParams& em);

// Test helper: responsibility matrix [n x k] for a fitted model.
Matrix responsibilities(const stability::FeatureSet& features, const GmmFit& fit);

namespace ref {

// Serial twin of select_order: plain nested loops, no OpenMP.
ModelSelection select_order(const stability::FeatureSet& features, int k_max, int n_init,
                            uint64_t master_seed, const EmParams& em);

}  // namespace ref

}  // namespace emscale::mixture
