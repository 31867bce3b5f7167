#include <doctest.h>

#include <cmath>
#include <set>

#include "emscale/rng.hpp"

using namespace emscale;

TEST_SUITE_BEGIN("rng");

TEST_CASE("derived seeds are stable and key-sensitive") {
    const uint64_t a = derive_seed(uint64_t{42}, tag_hash("noise"), uint64_t{0});
    const uint64_t b = derive_seed(uint64_t{42}, tag_hash("noise"), uint64_t{0});
    CHECK(a == b);
    CHECK(a != derive_seed(uint64_t{42}, tag_hash("noise"), uint64_t{1}));
    CHECK(a != derive_seed(uint64_t{42}, tag_hash("ro"), uint64_t{0}));
    CHECK(a != derive_seed(uint64_t{43}, tag_hash("noise"), uint64_t{0}));
}

TEST_CASE("streams replay bit-exactly") {
    Rng r1(123), r2(123);
    for (int i = 0; i < 1000; ++i) CHECK(r1.next_u64() == r2.next_u64());
}

TEST_CASE("uniform stays in [0,1) and fills the range") {
    Rng rng(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("normal deviates have roughly standard moments") {
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("uniform_index covers all buckets without bias") {
    Rng rng(3);
    int counts[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 50000; ++i) ++counts[rng.uniform_index(5)];
    for (int c : counts) CHECK(c > 9000);
}

TEST_SUITE_END();
