// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "obx/geometry.hpp"

namespace obx::test {

// Fixed-algorithm generator so every suite sees the same sequence for the
// same seed, independent of the standard library.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

  // Boxes with comparable scale and nearby centers; most pairs drawn from
  // this overlap, which is the regime IoU tests care about.
  OrientedBox box(double scale = 30.0) {
    const double w = uniform(0.4, 1.0) * 2.0 * scale;
    const double h = uniform(0.25, 1.0) * w;
    return OrientedBox::make(uniform(-0.5, 0.5) * scale, uniform(-0.5, 0.5) * scale,
                             w, h, uniform(0.0, kPi));
  }
};

}  // namespace obx::test
