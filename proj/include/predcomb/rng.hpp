#pragma once

#include <cstdint>

namespace predcomb {

// SplitMix64, used for seeding and for deriving independent sub-streams.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// xoshiro256** with portable uniform and Gaussian sampling. Every draw is a
// fixed function of the seed, so generated data is identical on all
// platforms. Gaussians use the Box-Muller transform (both variates are
// consumed in order), never <random>'s distributions.
//
// Stream splitting: Rng(seed, stream) seeds SplitMix64 with
// seed ^ (stream * 0xD1342543DE82EF95), giving one independent generator per
// (seed, stream) pair.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() noexcept;
  // Uniform integer in [0, n). n > 0. Uses rejection to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) noexcept;
  double normal() noexcept;

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace predcomb
