// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "lunet/tensor.hpp"

namespace lunet {

/// Deterministic random source.
///
/// The engine is the 64-bit Mersenne Twister (`std::mt19937_64`), whose output
/// sequence is fixed by the C++ standard. Everything layered on top of it is
/// implemented here rather than taken from `<random>` distributions, whose
/// algorithms differ between standard libraries:
///  - uniform():  top 53 bits of one draw, scaled to [0, 1)
///  - below(n):   rejection sampling on the full 64-bit draw
///  - normal():   Box-Muller over two uniforms, both outputs used in order
///  - shuffle():  Fisher-Yates from the back, swapping i with below(i + 1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  std::uint64_t below(std::uint64_t n);
  double normal();

  template <typename T> void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// Tensor of Gaussian draws. Throws ShapeError on a negative `stddev`.
Tensor rng_normal(Rng &rng, const Shape &shape, double mean, double stddev);

} // namespace lunet
