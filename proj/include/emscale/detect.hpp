#pragma once

#include <string>
#include <vector>

#include "emscale/persistence.hpp"

namespace emscale::detect {

// Decision boundaries for the rule-based verdicts. Calibrated on the synthetic
// scenarios; real captures need re-calibration.
struct DetectionThresholds {
    double sat_high = 0.45;
    double sat_low = 0.3;
    double var_low = 1.0;
    double decay_min = 0.3;       // required saturation drop, smallest to largest window
    double trend_tau_max = -0.3;  // rank-correlation ceiling for "decaying"

    void validate() const;
};

enum class Verdict {
    no_persistent_anomaly,
    persistent_correlated,
    stationary_periodic,
    inconclusive,
};

struct TrendEvidence {
    std::vector<int> window_sizes;
    std::vector<double> saturation_curve;
    std::vector<double> variance_curve;
    std::vector<double> median_curve;
    double mean_saturation = 0.0;
    double min_saturation = 0.0;
    double max_saturation = 0.0;
    double saturation_at_smallest_window = 0.0;
    double kendall_tau = 0.0;  // saturation vs window size
    bool tau_defined = false;  // needs >= 3 windows and untied saturations
    double mean_variance = 0.0;
};

struct DetectionReport {
    Verdict verdict = Verdict::inconclusive;
    bool degenerate = false;  // every batch at every scale selected k = 1
    TrendEvidence evidence;
    DetectionThresholds thresholds;
    uint64_t profile_fingerprint = 0;
};

// Kendall rank correlation (tau-b tie correction). Returns false when the
// correlation is undefined (fewer than 3 points or one sequence fully tied);
// tau is reported as 0 in that case.
bool kendall_tau(const std::vector<double>& x, const std::vector<double>& y, double& tau);

TrendEvidence trend_statistics(const persistence::PersistenceProfile& profile);

// Ordered rules: persistent-correlated, stationary-periodic, clean,
// inconclusive. Pure function of (profile, thresholds).
DetectionReport classify(const persistence::PersistenceProfile& profile,
                         const DetectionThresholds& thresholds);

enum class ReportFormat { json, csv, svg };

std::string render_report(const DetectionReport& report,
                          const persistence::PersistenceProfile& profile, ReportFormat format);

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

}  // namespace emscale::detect
