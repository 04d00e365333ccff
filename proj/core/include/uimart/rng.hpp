#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "uimart/paths.hpp"

namespace uimart {

/*!
 * Per-path random stream: xoshiro256++ seeded by expanding a 64-bit seed
 * through SplitMix64.
 *
 * Uniforms and normals are derived from the raw bits with fixed arithmetic
 * (53-bit uniforms, Marsaglia polar normals) rather than std distributions,
 * whose algorithms are implementation-defined. A seed therefore reproduces
 * the same stream on every platform with IEEE doubles and a correctly
 * rounded sqrt; log may differ in the last ulp between libms.
 *
 * See https://prng.di.unimi.it for the generator.
 */
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t z = seed;
        for (auto& word : state_) {
            z += 0x9e3779b97f4a7c15ULL;
            word = detail::mix64(z);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept { return bits(); }

    std::uint64_t bits() noexcept {
        auto& s = state_;
        std::uint64_t const result = rotl(s[0] + s[3], 23) + s[0];
        std::uint64_t const t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform_open() noexcept {
        return (static_cast<double>(bits() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double x, y, r2;
        do {
            x = static_cast<double>(bits() >> 11) * 0x1.0p-52 - 1.0;
            y = static_cast<double>(bits() >> 11) * 0x1.0p-52 - 1.0;
            r2 = x * x + y * y;
        } while (r2 >= 1.0 || r2 == 0.0);
        double const f = std::sqrt(-2.0 * std::log(r2) / r2);
        spare_ = y * f;
        has_spare_ = true;
        return x * f;
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace uimart
