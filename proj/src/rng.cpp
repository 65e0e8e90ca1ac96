// SPDX-License-Identifier: Apache-2.0
#include "lunet/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "lunet/error.hpp"

namespace lunet {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1)
    return 0;
  // Largest multiple of n that fits; draws above it are rejected.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

Tensor rng_normal(Rng &rng, const Shape &shape, double mean, double stddev) {
  if (!(stddev >= 0.0))
    throw ShapeError("rng_normal: standard deviation must be >= 0");
  Tensor out(shape, mean);
  if (stddev == 0.0)
    return out;
  for (auto &v : out.values())
    v = mean + stddev * rng.normal();
  return out;
}

} // namespace lunet
