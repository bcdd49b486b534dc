#pragma once

#include <cstdint>
#include <string_view>

namespace relaudit {

/// Counter-based deterministic generator. Every random decision in the
/// project is drawn from one root seed through named splits, so runs are
/// reproducible and independent streams never interleave.
///
/// Output for a stream is splitmix64 applied to (key + counter); splitting
/// derives a child key by hashing the parent key with a label.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent child stream identified by a label.
    Rng split(std::string_view label) const;
    /// Independent child stream identified by an integer salt (e.g. sample index).
    Rng split(std::uint64_t salt) const;

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n); n must be positive.
    int next_int(int n);
    /// Standard normal via Box-Muller (no rejection, fixed draw count).
    double gaussian();

private:
    Rng(std::uint64_t key, int);  // internal: key is already mixed
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace relaudit
