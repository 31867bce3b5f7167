#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emscale::trace {

// One EM capture of a single execution. Immutable after construction.
struct Trace {
    std::vector<double> samples;  // volts (or unitless after normalization)
    double sampling_rate = 0.0;   // Hz, > 0
    int execution_id = 0;
    std::string source_label;     // provenance only, never used in analysis

    void validate() const;  // non-empty, finite samples, positive rate
};

// Repeated executions under a fixed workload. All traces share length & rate.
struct TraceSet {
    std::vector<Trace> traces;
    int n_executions = 0;
    int trace_length = 0;
    double sampling_rate = 0.0;

    void validate() const;
};

// Column/units descriptor for oscilloscope CSV exports.
// Dialect: comma separator, '.' decimal point, optional header lines.
struct CsvFormat {
    int amplitude_column = 1;     // 0-based
    int time_column = -1;         // -1 = no time column
    int header_rows = 0;
    double amplitude_scale = 1.0; // multiply amplitudes on ingest
    double sampling_rate = 0.0;   // used when no time column is present
};

enum class NormalizeMode { none, per_trace_zscore };

// Parses one trace from a CSV stream. When the format names a time column the
// sampling rate is the reciprocal of the median inter-row delta; deltas that
// deviate from the median by more than 1% are rejected as non-uniform.
Trace load_trace_csv(std::istream& in, const CsvFormat& fmt);

Trace load_trace_csv_file(const std::string& path, const CsvFormat& fmt);

// Loads every file in manifest order, truncates all traces to the minimum
// common length and checks rates agree within 0.01% relative.
TraceSet load_trace_set(const std::vector<std::string>& manifest, const CsvFormat& fmt);

TraceSet make_trace_set(std::vector<Trace> traces);

// per_trace_zscore subtracts each trace's mean and divides by its population
// standard deviation; `none` is the identity.
TraceSet normalize_traces(const TraceSet& set, NormalizeMode mode);

// Emits one amplitude per row at 17 significant digits so a load round-trips
// bit-exactly.
void save_trace_csv(std::ostream& out, const Trace& t);
void save_trace_csv_file(const std::string& path, const Trace& t);

NormalizeMode normalize_mode_from_string(const std::string& s);
std::string to_string(NormalizeMode mode);

}  // namespace emscale::trace
