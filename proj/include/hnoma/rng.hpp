// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace hnoma {

namespace detail {

/// SplitMix64 finalizer; bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

} // namespace detail

/// Counter-based random stream. The generator state is a pure function of
/// (seed, stream coordinates, draw index), so draws are reproducible and
/// order-independent across parallel trials: any (trial, cluster, user)
/// tuple addresses the same sequence no matter which thread asks first.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t s0, std::uint64_t s1 = 0,
              std::uint64_t s2 = 0, std::uint64_t s3 = 0) {
        std::uint64_t k = detail::mix64(seed + detail::kGolden);
        k = detail::mix64(k ^ (s0 + detail::kGolden));
        k = detail::mix64(k ^ (s1 + detail::kGolden));
        k = detail::mix64(k ^ (s2 + detail::kGolden));
        k = detail::mix64(k ^ (s3 + detail::kGolden));
        key_ = k;
    }

    std::uint64_t next_u64() {
        return detail::mix64(key_ + (++counter_) * detail::kGolden);
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    /// Standard normal via Box-Muller; deterministic, no library dependence
    /// on implementation-defined distributions.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_unit(); // (0, 1], keeps log finite
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex normal CN(0, 1).
    std::complex<double> next_cnormal() {
        const double re = next_normal();
        const double im = next_normal();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

    /// Unit-mean exponential variate.
    double next_exponential() {
        return -std::log(1.0 - next_unit());
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace hnoma
