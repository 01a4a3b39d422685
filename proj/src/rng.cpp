#include "offrl/rng.hpp"

namespace offrl {

int Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform() * total;
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t k) {
  std::uint64_t z = parent + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace offrl
