#pragma once

#include <cstdint>
#include <string_view>

namespace emscale {

// Deterministic, platform-independent random streams. Every consumer derives
// its own stream seed from (master seed, integer keys, component tag), so
// generation order and thread schedule never change the output.
uint64_t splitmix64(uint64_t& state);

// Order-sensitive combine of a seed with one more word.
uint64_t seed_mix(uint64_t seed, uint64_t word);

// FNV-1a over the tag bytes; used to turn component names into key words.
uint64_t tag_hash(std::string_view tag);

template <typename... Words>
uint64_t derive_seed(uint64_t master, Words... words) {
    uint64_t s = master;
    ((s = seed_mix(s, static_cast<uint64_t>(words))), ...);
    uint64_t state = s;
    return splitmix64(state);
}

// xoshiro256++ seeded via splitmix64 expansion. Distributions are hand-rolled
// (std::normal_distribution is implementation-defined and would break
// bit-reproducibility of generated trace sets).
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // Uniform in [0, 1).
    double uniform();

    // Uniform in [lo, hi).
    double uniform(double lo, double hi);

    // Uniform integer in [0, n); n > 0.
    uint64_t uniform_index(uint64_t n);

    // Standard normal via Box-Muller; caches the spare deviate.
    double normal();

    bool next_bit();

private:
    uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace emscale
