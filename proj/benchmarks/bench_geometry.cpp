// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <vector>

#include "obx/evaluation.hpp"
#include "obx/geometry.hpp"
#include "obx/matching.hpp"

namespace {

using namespace obx;

// Mixed overlapping/disjoint pairs, deterministic.
std::vector<std::pair<OrientedBox, OrientedBox>> make_pairs(std::size_t n) {
  std::vector<std::pair<OrientedBox, OrientedBox>> pairs;
  pairs.reserve(n);
  std::uint64_t s = 0xbe9c4;
  auto uniform = [&](double lo, double hi) {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return lo + (hi - lo) * static_cast<double>(z >> 11) * 0x1.0p-53;
  };
  auto box = [&] {
    const double w = uniform(8.0, 60.0);
    return OrientedBox::make(uniform(-20, 20), uniform(-20, 20), w,
                             w * uniform(0.25, 1.0), uniform(0.0, kPi));
  };
  for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(box(), box());
  return pairs;
}

void BM_RotatedIou(benchmark::State& state) {
  const auto pairs = make_pairs(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 1023];
    benchmark::DoNotOptimize(rotated_iou(a, b));
  }
}
BENCHMARK(BM_RotatedIou);

void BM_Liiou(benchmark::State& state) {
  const auto pairs = make_pairs(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 1023];
    benchmark::DoNotOptimize(liiou(a, b));
  }
}
BENCHMARK(BM_Liiou);

void BM_RasterIouOracle(benchmark::State& state) {
  const auto pairs = make_pairs(64);
  std::size_t i = 0;
  const int resolution = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 63];
    benchmark::DoNotOptimize(raster_iou_oracle(a, b, resolution));
  }
}
BENCHMARK(BM_RasterIouOracle)->Arg(128)->Arg(512);

void BM_QuadToBox(benchmark::State& state) {
  const auto pairs = make_pairs(1024);
  std::vector<Quad> quads;
  for (const auto& [a, b] : pairs) quads.push_back(box_to_quad(a));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(quad_to_box(quads[i++ & 1023]));
  }
}
BENCHMARK(BM_QuadToBox);

void BM_RotatedNms(benchmark::State& state) {
  const auto pairs = make_pairs(static_cast<std::size_t>(state.range(0)));
  std::vector<Detection> dets;
  double score = 1.0;
  for (const auto& [a, b] : pairs) {
    dets.push_back(Detection{"img", 0, score *= 0.999, box_to_quad(a)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(rotated_nms(dets, 0.5));
  }
}
BENCHMARK(BM_RotatedNms)->Arg(100)->Arg(1000);

}  // namespace
