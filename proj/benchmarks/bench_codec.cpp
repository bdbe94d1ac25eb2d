// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <vector>

#include "obx/target_codec.hpp"

namespace {

using namespace obx;

std::vector<LabeledBox> make_annotations(std::size_t n) {
  std::vector<LabeledBox> anns;
  std::uint64_t s = 0xc0dec;
  auto uniform = [&](double lo, double hi) {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return lo + (hi - lo) * static_cast<double>(z >> 11) * 0x1.0p-53;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double h = uniform(24.0, 300.0);
    const double w = h * uniform(1.1, 3.0);
    anns.push_back(LabeledBox{
        OrientedBox::make(uniform(250, 774), uniform(250, 774), w, h, uniform(0.0, kPi)),
        static_cast<int>(i % 15)});
  }
  return anns;
}

void BM_EncodeRpnGrids(benchmark::State& state) {
  const auto anns = make_annotations(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_rpn_grids(anns, ImageSize{1024, 1024}));
  }
}
BENCHMARK(BM_EncodeRpnGrids)->Arg(4)->Arg(32);

void BM_DecodeRpnGrids(benchmark::State& state) {
  const auto anns = make_annotations(16);
  const PredictionGridSet preds = to_predictions(encode_rpn_grids(anns, ImageSize{1024, 1024}));
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_rpn_grids(preds, 0.5));
  }
}
BENCHMARK(BM_DecodeRpnGrids);

void BM_RotatedCrop(benchmark::State& state) {
  Grid3 feature = Grid3::zeros(256, 64, 64);
  for (std::size_t i = 0; i < feature.data.size(); ++i) {
    feature.data[i] = static_cast<double>(i % 97);
  }
  const OrientedBox box = OrientedBox::make(32, 32, 40, 18, 0.6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rotated_crop(feature, box, 7, 7));
  }
}
BENCHMARK(BM_RotatedCrop);

}  // namespace
