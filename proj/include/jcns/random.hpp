#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace jcns {

// SplitMix64 finalizer (Steele, Lea & Flood). Used for seeding and stream derivation.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Derives an independent 64-bit seed from a key and a list of stream labels:
//   h = key; for each label v: h = splitmix64(h ^ splitmix64(v + 0x9E3779B97F4A7C15))
std::uint64_t derive_seed(std::uint64_t key, std::initializer_list<std::uint64_t> labels) noexcept;

/// xoshiro256** 1.0 (Blackman & Vigna). The state is expanded from a 64-bit seed
/// with four successive SplitMix64 outputs, as recommended by the authors.
///
/// Gaussian variates are produced by inversion of the standard normal CDF so that
/// a sequence is fully determined by the integer stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    std::uint64_t next_u64() noexcept;

    // Uniform on the open interval (0, 1): ((x >> 11) + 0.5) * 2^-53.
    double uniform() noexcept;

    // Standard normal by inverse CDF of one uniform() draw.
    double normal();

    const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

    bool operator==(const Rng&) const = default;

private:
    std::array<std::uint64_t, 4> s_{};
};

// Standard normal CDF and its complement, accurate in both tails.
double normal_cdf(double x) noexcept;
double normal_ccdf(double x) noexcept;

// Inverse of normal_cdf for p in (0, 1).
double normal_quantile(double p);
// Inverse of normal_ccdf for q in (0, 1).
double normal_cquantile(double q);

}  // namespace jcns
