#include "emscale/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "emscale/error.hpp"

namespace emscale::trace {

void Trace::validate() const {
    if (samples.empty()) throw ConfigError("trace has no samples");
    if (!(sampling_rate > 0.0)) throw ConfigError("trace sampling_rate must be > 0");
    for (double v : samples) {
        if (!std::isfinite(v)) throw ConfigError("trace contains non-finite sample");
    }
}

void TraceSet::validate() const {
    if (n_executions < 2) {
        throw InsufficientDataError("trace set needs at least 2 executions");
    }
    if (static_cast<int>(traces.size()) != n_executions) {
        throw ConfigError("trace set execution count mismatch");
    }
    for (const Trace& t : traces) {
        t.validate();
        if (static_cast<int>(t.samples.size()) != trace_length) {
            throw ConfigError("trace set member length mismatch");
        }
        if (t.sampling_rate != sampling_rate) {
            throw ConfigError("trace set member sampling rate mismatch");
        }
    }
}

namespace {

bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0';
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Trace load_trace_csv(std::istream& in, const CsvFormat& fmt) {
    if (fmt.amplitude_column < 0) throw ConfigError("amplitude column must be >= 0");
    Trace t;
    std::vector<double> times;
    std::string line;
    int line_no = 0;
    int skipped = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skipped < fmt.header_rows) {
            ++skipped;
            continue;
        }
        if (blank(line)) continue;
        const auto fields = split_csv_row(line);
        const int needed = std::max(fmt.amplitude_column, fmt.time_column);
        if (static_cast<int>(fields.size()) <= needed) {
            throw ConfigError("csv parse error at line " + std::to_string(line_no) +
                              ": expected at least " + std::to_string(needed + 1) + " columns");
        }
        double amp = 0.0;
        if (!parse_double(fields[fmt.amplitude_column], amp)) {
            throw ConfigError("csv parse error at line " + std::to_string(line_no) +
                              ": non-numeric amplitude '" + fields[fmt.amplitude_column] + "'");
        }
        t.samples.push_back(amp * fmt.amplitude_scale);
        if (fmt.time_column >= 0) {
            double tv = 0.0;
            if (!parse_double(fields[fmt.time_column], tv)) {
                throw ConfigError("csv parse error at line " + std::to_string(line_no) +
                                  ": non-numeric time '" + fields[fmt.time_column] + "'");
            }
            times.push_back(tv);
        }
    }
    if (t.samples.empty()) throw ConfigError("csv input is empty");

    if (fmt.time_column >= 0 && times.size() >= 2) {
        std::vector<double> deltas(times.size() - 1);
        for (std::size_t i = 0; i + 1 < times.size(); ++i) deltas[i] = times[i + 1] - times[i];
        std::vector<double> sorted = deltas;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        const double median =
            (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
        if (!(median > 0.0)) throw ConfigError("csv time column is not increasing");
        for (double d : deltas) {
            if (std::abs(d - median) > 0.01 * median) {
                throw ConfigError("csv time deltas are non-uniform (> 1% of median step)");
            }
        }
        t.sampling_rate = 1.0 / median;
    } else {
        if (!(fmt.sampling_rate > 0.0)) {
            throw ConfigError("csv format needs a positive sampling_rate when no time column exists");
        }
        t.sampling_rate = fmt.sampling_rate;
    }
    t.validate();
    return t;
}

Trace load_trace_csv_file(const std::string& path, const CsvFormat& fmt) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file: " + path);
    try {
        Trace t = load_trace_csv(in, fmt);
        t.source_label = path;
        return t;
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

TraceSet make_trace_set(std::vector<Trace> traces) {
    if (traces.size() < 2) {
        throw InsufficientDataError("trace set needs at least 2 executions, got " +
                                    std::to_string(traces.size()));
    }
    std::size_t min_len = traces.front().samples.size();
    const double rate0 = traces.front().sampling_rate;
    for (const Trace& t : traces) {
        t.validate();
        min_len = std::min(min_len, t.samples.size());
        if (std::abs(t.sampling_rate - rate0) > 1e-4 * rate0) {
            throw ConfigError("incompatible trace set: sampling rates differ by more than 0.01%");
        }
    }
    TraceSet set;
    set.sampling_rate = rate0;
    set.trace_length = static_cast<int>(min_len);
    set.n_executions = static_cast<int>(traces.size());
    for (Trace& t : traces) {
        t.samples.resize(min_len);
        t.sampling_rate = rate0;
        set.traces.push_back(std::move(t));
    }
    set.validate();
    return set;
}

TraceSet load_trace_set(const std::vector<std::string>& manifest, const CsvFormat& fmt) {
    if (manifest.empty()) throw ConfigError("trace manifest is empty");
    std::vector<Trace> traces;
    traces.reserve(manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        Trace t = load_trace_csv_file(manifest[i], fmt);
        t.execution_id = static_cast<int>(i);
        traces.push_back(std::move(t));
    }
    return make_trace_set(std::move(traces));
}

TraceSet normalize_traces(const TraceSet& set, NormalizeMode mode) {
    if (mode == NormalizeMode::none) return set;
    TraceSet out = set;
    for (Trace& t : out.traces) {
        const std::size_t n = t.samples.size();
        double mean = 0.0;
        for (double v : t.samples) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : t.samples) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);  // population variance: normalization, not estimation
        if (!(var > 0.0)) {
            throw ConfigError("degenerate trace (zero variance) at execution_id " +
                              std::to_string(t.execution_id));
        }
        const double inv_sd = 1.0 / std::sqrt(var);
        for (double& v : t.samples) v = (v - mean) * inv_sd;
    }
    return out;
}

void save_trace_csv(std::ostream& out, const Trace& t) {
    char buf[40];
    for (double v : t.samples) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
}

void save_trace_csv_file(const std::string& path, const Trace& t) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace file: " + path);
    save_trace_csv(out, t);
    if (!out) throw IoError("write failed: " + path);
}

NormalizeMode normalize_mode_from_string(const std::string& s) {
    if (s == "none") return NormalizeMode::none;
    if (s == "zscore" || s == "per-trace-zscore") return NormalizeMode::per_trace_zscore;
    throw ConfigError("unknown normalize mode: " + s);
}

std::string to_string(NormalizeMode mode) {
    return mode == NormalizeMode::none ? "none" : "zscore";
}

}  // namespace emscale::trace
