#include "relaudit/rng.hpp"

#include <cmath>

#include "relaudit/error.hpp"

namespace relaudit {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : key_(mix64(seed + kGolden)) {}

Rng::Rng(std::uint64_t key, int) : key_(key) {}

Rng Rng::split(std::string_view label) const {
    return Rng(mix64(key_ ^ fnv1a(label)), 0);
}

Rng Rng::split(std::uint64_t salt) const {
    return Rng(mix64(key_ ^ mix64(salt + kGolden)), 0);
}

std::uint64_t Rng::next_u64() {
    return mix64(key_ + counter_++ * kGolden);
}

double Rng::uniform() {
    // 53 high bits -> double in [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

int Rng::next_int(int n) {
    if (n <= 0) throw Error("Rng::next_int: n must be positive");
    // Modulo bias is < 2^-32 for the n used here.
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

double Rng::gaussian() {
    // Box-Muller, cosine branch; u1 nudged away from 0.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace relaudit
