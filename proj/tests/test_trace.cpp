#include <doctest.h>

#include <cmath>
#include <sstream>

#include "emscale/error.hpp"
#include "emscale/rng.hpp"
#include "emscale/trace.hpp"

using namespace emscale;
using namespace emscale::trace;

TEST_SUITE_BEGIN("trace");

TEST_CASE("csv with time column derives rate from median step") {
    std::istringstream in("0,0.5\n1e-9,0.7\n2e-9,0.6\n");
    CsvFormat fmt;
    fmt.time_column = 0;
    fmt.amplitude_column = 1;
    const Trace t = load_trace_csv(in, fmt);
    REQUIRE(t.samples.size() == 3);
    CHECK(t.samples[0] == 0.5);
    CHECK(t.samples[1] == 0.7);
    CHECK(t.samples[2] == 0.6);
    CHECK(t.sampling_rate == doctest::Approx(1e9).epsilon(1e-12));
}

TEST_CASE("single amplitude column uses descriptor rate") {
    std::istringstream in("1.0\n-1.0\n");
    CsvFormat fmt;
    fmt.amplitude_column = 0;
    fmt.sampling_rate = 125e6;
    const Trace t = load_trace_csv(in, fmt);
    REQUIRE(t.samples.size() == 2);
    CHECK(t.samples[0] == 1.0);
    CHECK(t.samples[1] == -1.0);
    CHECK(t.sampling_rate == 125e6);
}

TEST_CASE("non-numeric amplitude names the line") {
    std::istringstream in("0,1.0\n1e-9,abc\n");
    CsvFormat fmt;
    fmt.time_column = 0;
    fmt.amplitude_column = 1;
    try {
        load_trace_csv(in, fmt);
        FAIL("expected parse error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("non-uniform time deltas are rejected") {
    std::istringstream in("0,1\n1e-9,1\n2.5e-9,1\n3.5e-9,1\n");
    CsvFormat fmt;
    fmt.time_column = 0;
    fmt.amplitude_column = 1;
    CHECK_THROWS_AS(load_trace_csv(in, fmt), ConfigError);
}

TEST_CASE("empty payload is an error") {
    std::istringstream in("");
    CsvFormat fmt;
    fmt.amplitude_column = 0;
    fmt.sampling_rate = 1.0;
    CHECK_THROWS_AS(load_trace_csv(in, fmt), ConfigError);
}

TEST_CASE("header rows are skipped and amplitude scale applies") {
    std::istringstream in("Time,CH1\nunits,V\n0.5\n");
    CsvFormat fmt;
    fmt.amplitude_column = 0;
    fmt.header_rows = 2;
    fmt.amplitude_scale = 2.0;
    fmt.sampling_rate = 1.0;
    const Trace t = load_trace_csv(in, fmt);
    REQUIRE(t.samples.size() == 1);
    CHECK(t.samples[0] == 1.0);
}

TEST_CASE("set construction truncates to the minimum length") {
    Trace a{{1, 2, 3, 4, 5}, 1.0, 0, ""};
    Trace b{{1, 2, 3, 4, 5}, 1.0, 1, ""};
    Trace c{{1, 2, 3}, 1.0, 2, ""};
    const TraceSet set = make_trace_set({a, b, c});
    CHECK(set.trace_length == 3);
    CHECK(set.n_executions == 3);
    for (const auto& t : set.traces) CHECK(t.samples.size() == 3);
}

TEST_CASE("fewer than two traces is insufficient") {
    Trace a{{1, 2, 3}, 1.0, 0, ""};
    CHECK_THROWS_AS(make_trace_set({a}), InsufficientDataError);
}

TEST_CASE("mismatched sampling rates are incompatible") {
    Trace a{{1, 2, 3}, 1.0, 0, ""};
    Trace b{{1, 2, 3}, 1.001, 1, ""};
    CHECK_THROWS_AS(make_trace_set({a, b}), ConfigError);
}

TEST_CASE("two-point zscore is the sign pair") {
    Trace a{{1, 3}, 1.0, 0, ""};
    Trace b{{5, 9}, 1.0, 1, ""};
    const TraceSet set = make_trace_set({a, b});
    const TraceSet z = normalize_traces(set, NormalizeMode::per_trace_zscore);
    CHECK(z.traces[0].samples[0] == doctest::Approx(-1.0));
    CHECK(z.traces[0].samples[1] == doctest::Approx(1.0));
    CHECK(z.traces[1].samples[0] == doctest::Approx(-1.0));
    CHECK(z.traces[1].samples[1] == doctest::Approx(1.0));
}

TEST_CASE("normalize none is the identity") {
    Trace a{{1, 3, 7}, 1.0, 0, ""};
    Trace b{{2, 2, 4}, 1.0, 1, ""};
    const TraceSet set = make_trace_set({a, b});
    const TraceSet same = normalize_traces(set, NormalizeMode::none);
    CHECK(same.traces[0].samples == set.traces[0].samples);
    CHECK(same.traces[1].samples == set.traces[1].samples);
}

TEST_CASE("constant trace under zscore names the execution") {
    Trace a{{2, 2, 2}, 1.0, 7, ""};
    Trace b{{1, 2, 3}, 1.0, 8, ""};
    TraceSet set;
    set.traces = {a, b};
    set.n_executions = 2;
    set.trace_length = 3;
    set.sampling_rate = 1.0;
    try {
        normalize_traces(set, NormalizeMode::per_trace_zscore);
        FAIL("expected degenerate-trace error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("7") != std::string::npos);
    }
}

TEST_CASE("zscore output has mean 0 and sd 1 per trace") {
    Rng rng(5);
    std::vector<Trace> traces;
    for (int e = 0; e < 4; ++e) {
        Trace t;
        t.execution_id = e;
        t.sampling_rate = 2.0;
        for (int i = 0; i < 500; ++i) t.samples.push_back(rng.normal() * 3.0 + 1.5);
        traces.push_back(std::move(t));
    }
    const TraceSet z =
        normalize_traces(make_trace_set(std::move(traces)), NormalizeMode::per_trace_zscore);
    for (const auto& t : z.traces) {
        double mean = 0.0;
        for (double v : t.samples) mean += v;
        mean /= static_cast<double>(t.samples.size());
        double var = 0.0;
        for (double v : t.samples) var += (v - mean) * (v - mean);
        var /= static_cast<double>(t.samples.size());
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-12);
    }
}

TEST_CASE("save then load round-trips samples bit-exactly") {
    Rng rng(17);
    Trace t;
    t.execution_id = 0;
    t.sampling_rate = 1.0;
    for (int i = 0; i < 200; ++i) t.samples.push_back(rng.normal() * 1e-3);
    std::ostringstream out;
    save_trace_csv(out, t);
    std::istringstream in(out.str());
    CsvFormat fmt;
    fmt.amplitude_column = 0;
    fmt.sampling_rate = 1.0;
    const Trace back = load_trace_csv(in, fmt);
    REQUIRE(back.samples.size() == t.samples.size());
    for (std::size_t i = 0; i < t.samples.size(); ++i) CHECK(back.samples[i] == t.samples[i]);
}

TEST_SUITE_END();
