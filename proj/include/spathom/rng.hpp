// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace spathom {

/// Counter-based random stream: every value is a pure function of (seed, counter),
/// so serial and parallel consumers produce bit-identical results.
///
/// The generator is SplitMix64 evaluated in counter mode: state(k) = seed + (k+1)·γ
/// pushed through the usual xor-multiply finalizer. Gaussian variates come in
/// Box-Muller pairs, one pair per counter.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t counter) const {
        std::uint64_t z = seed_ + (counter + 1) * kGamma;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Two independent standard normals for one counter value.
    std::pair<double, double> normal_pair(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    /// Standard normal draw number k (k-th member of the pair stream).
    double normal(std::uint64_t k) const {
        const auto [g0, g1] = normal_pair(k / 2);
        return (k % 2 == 0) ? g0 : g1;
    }

    std::uint64_t seed() const { return seed_; }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    std::uint64_t seed_ = 0;
};

} // namespace spathom
