#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mks {

// Seed derivation and sampling helpers. Everything seeded goes through this
// header so that results do not depend on the standard library's
// implementation-defined distributions.

// SplitMix64 step; used to derive independent child seeds from one master seed.
std::uint64_t splitmix64(std::uint64_t& state);

// Child seed for a named stage ("gen", "pca", ...) or an indexed task.
// Stable across runs and platforms.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Uniform in [0, 1).
    double uniform();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi);
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    // Standard normal via Box-Muller (pair cached).
    double normal();

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace mks
