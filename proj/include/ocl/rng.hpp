#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace ocl {

/// Counter-based deterministic generator (splitmix64 over a stream counter).
/// Identical seed => identical sequence of draws, on every platform; runs
/// with distinct seeds never share state. Distributions are implemented
/// here instead of <random> because the standard leaves their algorithms
/// implementation-defined.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double next_double();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (second value cached).
  double normal();

  /// Uniform index in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Independent generator derived from (seed, tag). Children with distinct
  /// tags have decorrelated streams and never touch this generator's state.
  Rng child(std::uint64_t tag) const;

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  /// First k entries of a random permutation of {0, ..., n-1}.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace ocl
