#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tripem {

// Deterministic random source used by every sampler and initializer.
// All draws are produced by our own fixed algorithms on top of
// std::mt19937_64 so that a seed pins the exact stream; the standard
// library distributions are implementation-defined and would not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n); rejects draws from the partial top block.
  std::uint64_t below(std::uint64_t n);

  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(below(static_cast<std::uint64_t>(n)));
  }

  // Index i with probability weights[i] / sum(weights).
  std::size_t weighted_index(std::span<const double> weights);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

  // Derives an independent substream seed (splitmix64 finalizer), so that
  // e.g. per-run or per-image streams never overlap the parent stream.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace tripem
