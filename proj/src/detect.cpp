#include "emscale/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "emscale/error.hpp"
#include "emscale/serialize.hpp"

namespace emscale::detect {

void DetectionThresholds::validate() const {
    if (!(0.0 <= sat_low && sat_low < sat_high && sat_high <= 1.0)) {
        throw ConfigError("thresholds must satisfy 0 <= sat_low < sat_high <= 1");
    }
    if (var_low < 0.0) throw ConfigError("var_low must be >= 0");
    if (decay_min < 0.0) throw ConfigError("decay_min must be >= 0");
}

bool kendall_tau(const std::vector<double>& x, const std::vector<double>& y, double& tau) {
    tau = 0.0;
    const std::size_t n = x.size();
    if (n != y.size() || n < 3) return false;
    long long concordant_minus_discordant = 0;
    long long ties_x = 0, ties_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[j] - x[i];
            const double dy = y[j] - y[i];
            if (dx == 0.0) ++ties_x;
            if (dy == 0.0) ++ties_y;
            if (dx != 0.0 && dy != 0.0) {
                concordant_minus_discordant += (dx * dy > 0.0) ? 1 : -1;
            }
        }
    }
    const double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    const double denom = std::sqrt((n0 - static_cast<double>(ties_x)) *
                                   (n0 - static_cast<double>(ties_y)));
    if (!(denom > 0.0)) return false;  // a sequence is fully tied: undefined-as-zero
    tau = static_cast<double>(concordant_minus_discordant) / denom;
    return true;
}

TrendEvidence trend_statistics(const persistence::PersistenceProfile& profile) {
    if (profile.scales.empty()) throw ConfigError("profile has no scales");
    TrendEvidence ev;
    for (const auto& sp : profile.scales) {
        ev.window_sizes.push_back(sp.window_size);
        ev.saturation_curve.push_back(sp.saturation_ratio);
        ev.variance_curve.push_back(sp.within_window_variance);
        ev.median_curve.push_back(sp.median_complexity);
    }
    const std::size_t n = ev.saturation_curve.size();
    ev.mean_saturation = 0.0;
    ev.mean_variance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ev.mean_saturation += ev.saturation_curve[i];
        ev.mean_variance += ev.variance_curve[i];
    }
    ev.mean_saturation /= static_cast<double>(n);
    ev.mean_variance /= static_cast<double>(n);
    ev.min_saturation = *std::min_element(ev.saturation_curve.begin(), ev.saturation_curve.end());
    ev.max_saturation = *std::max_element(ev.saturation_curve.begin(), ev.saturation_curve.end());
    ev.saturation_at_smallest_window = ev.saturation_curve.front();

    std::vector<double> wx(ev.window_sizes.begin(), ev.window_sizes.end());
    ev.tau_defined = kendall_tau(wx, ev.saturation_curve, ev.kendall_tau);
    return ev;
}

DetectionReport classify(const persistence::PersistenceProfile& profile,
                         const DetectionThresholds& thresholds) {
    thresholds.validate();
    DetectionReport report;
    report.thresholds = thresholds;
    report.profile_fingerprint = profile.config_fingerprint;
    report.evidence = trend_statistics(profile);
    const TrendEvidence& ev = report.evidence;

    bool all_k1 = true;
    for (const auto& sp : profile.scales) {
        for (int k : sp.selected_orders) {
            if (k != 1) {
                all_k1 = false;
                break;
            }
        }
    }
    if (all_k1) {
        // Degenerate feature sets pin every selection at minimum complexity.
        report.degenerate = true;
        report.verdict = Verdict::no_persistent_anomaly;
        return report;
    }

    const double sat_range = ev.max_saturation - ev.min_saturation;
    if (ev.min_saturation >= thresholds.sat_high && ev.mean_variance <= thresholds.var_low) {
        report.verdict = Verdict::persistent_correlated;
    } else if (ev.saturation_at_smallest_window >= thresholds.sat_high &&
               sat_range >= thresholds.decay_min && ev.tau_defined &&
               ev.kendall_tau <= thresholds.trend_tau_max) {
        report.verdict = Verdict::stationary_periodic;
    } else if (ev.mean_saturation <= thresholds.sat_low) {
        report.verdict = Verdict::no_persistent_anomaly;
    } else {
        report.verdict = Verdict::inconclusive;
    }
    return report;
}

namespace {

std::string report_csv(const DetectionReport& report) {
    std::ostringstream out;
    out << "window_size,saturation_ratio,within_window_variance,median_complexity\n";
    char buf[128];
    const auto& ev = report.evidence;
    for (std::size_t i = 0; i < ev.window_sizes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", ev.window_sizes[i],
                      ev.saturation_curve[i], ev.variance_curve[i], ev.median_curve[i]);
        out << buf;
    }
    return out.str();
}

struct PanelSpec {
    const char* title;
    const std::vector<double>* values;
};

void append_panel(std::ostringstream& svg, const PanelSpec& panel,
                  const std::vector<int>& windows, double x0, double y0, double w, double h) {
    double vmax = 0.0;
    for (double v : *panel.values) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;
    const double pad = 30.0;
    const double plot_w = w - 2 * pad;
    const double plot_h = h - 2 * pad;

    svg << "<g class=\"chart\">\n";
    svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"white\" stroke=\"#888\"/>\n";
    svg << "<text x=\"" << x0 + w / 2 << "\" y=\"" << y0 + 16
        << "\" text-anchor=\"middle\" font-size=\"12\">" << panel.title << "</text>\n";
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    const std::size_t n = windows.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double fx = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.5;
        const double px = x0 + pad + fx * plot_w;
        const double py = y0 + h - pad - ((*panel.values)[i] / vmax) * plot_h;
        svg << px << "," << py << " ";
    }
    svg << "\"/>\n";
    for (std::size_t i = 0; i < n; ++i) {
        const double fx = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.5;
        const double px = x0 + pad + fx * plot_w;
        svg << "<text x=\"" << px << "\" y=\"" << y0 + h - 8
            << "\" text-anchor=\"middle\" font-size=\"9\">" << windows[i] << "</text>\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", vmax);
    svg << "<text x=\"" << x0 + 4 << "\" y=\"" << y0 + pad
        << "\" font-size=\"9\">" << buf << "</text>\n";
    svg << "<text x=\"" << x0 + w / 2 << "\" y=\"" << y0 + h + 14
        << "\" text-anchor=\"middle\" font-size=\"10\">window size</text>\n";
    svg << "</g>\n";
}

std::string report_svg(const DetectionReport& report) {
    const double panel_w = 280.0, panel_h = 200.0, gap = 20.0, margin = 20.0;
    const double total_w = margin * 2 + panel_w * 3 + gap * 2;
    const double total_h = margin * 2 + panel_h + 60.0;
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total_w << "\" height=\""
        << total_h << "\" viewBox=\"0 0 " << total_w << " " << total_h << "\">\n";
    svg << "<text x=\"" << total_w / 2 << "\" y=\"" << margin
        << "\" text-anchor=\"middle\" font-size=\"14\">verdict: " << to_string(report.verdict)
        << "</text>\n";
    const PanelSpec panels[3] = {
        {"saturation ratio", &report.evidence.saturation_curve},
        {"within-window variance", &report.evidence.variance_curve},
        {"median complexity", &report.evidence.median_curve},
    };
    for (int p = 0; p < 3; ++p) {
        append_panel(svg, panels[p], report.evidence.window_sizes,
                     margin + p * (panel_w + gap), margin + 20.0, panel_w, panel_h);
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace

std::string render_report(const DetectionReport& report,
                          const persistence::PersistenceProfile& profile, ReportFormat format) {
    switch (format) {
        case ReportFormat::json:
            return serialize::report_to_json(report, profile).dump(2) + "\n";
        case ReportFormat::csv:
            return report_csv(report);
        case ReportFormat::svg:
            return report_svg(report);
    }
    throw ConfigError("unknown report format");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::no_persistent_anomaly: return "no_persistent_anomaly";
        case Verdict::persistent_correlated: return "persistent_correlated";
        case Verdict::stationary_periodic: return "stationary_periodic";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "no_persistent_anomaly") return Verdict::no_persistent_anomaly;
    if (s == "persistent_correlated") return Verdict::persistent_correlated;
    if (s == "stationary_periodic") return Verdict::stationary_periodic;
    if (s == "inconclusive") return Verdict::inconclusive;
    throw ConfigError("unknown verdict: " + s);
}

}  // namespace emscale::detect
