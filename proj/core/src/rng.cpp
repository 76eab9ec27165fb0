#include "tripem/rng.hpp"

#include <cmath>

#include "tripem/errors.hpp"

namespace tripem {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw UsageError("Rng::below: n must be positive");
  const std::uint64_t rem = (0 - n) % n;  // 2^64 mod n
  std::uint64_t x = next_u64();
  if (rem != 0) {
    const std::uint64_t bound = 0 - rem;
    while (x >= bound) x = next_u64();
  }
  return x % n;
}

std::size_t Rng::weighted_index(std::span<const double> weights) {
  if (weights.empty()) throw UsageError("weighted_index: empty weight list");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw UsageError("weighted_index: weights must be finite and non-negative");
    }
    total += w;
  }
  if (total <= 0.0) throw UsageError("weighted_index: weights sum to zero");

  const double r = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc) return i;
  }
  // r landed past the accumulated sum through rounding; take the last
  // index that carries any weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

std::uint64_t Rng::mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace tripem
