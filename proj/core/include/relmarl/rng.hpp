#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace relmarl {

/// Seeded random stream that counts its draws.
///
/// All variates are built from the raw mt19937_64 output instead of the
/// std:: distributions, whose algorithms are implementation-defined, so a
/// seed yields the same sequence on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer on [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
};

/// Derives an independent child seed (splitmix64 finalizer over base+stream).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace relmarl
