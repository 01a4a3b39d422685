#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace offrl {

/// Engine plus draw helpers whose output depends only on the engine, so
/// datasets are identical across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(eng_()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn proportionally to nonnegative weights (linear scan).
  int categorical(std::span<const double> weights);

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// Child seed for stream `k` of a parent seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t k);

}  // namespace offrl
