#pragma once

#include <cstdint>

namespace dyncover {

/// Deterministic per-run random stream.
///
/// Streams are keyed by (master seed, run index) so a run draws the same
/// numbers whatever thread executes it and whatever runs precede it. The
/// generator is xoshiro256** with its state filled by SplitMix64.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t run_index);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Exponential with the given rate (mean 1/rate); rate must be > 0.
  double exponential(double rate);

  /// Uniform on {0, ..., n-1}, unbiased; n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

}  // namespace dyncover
