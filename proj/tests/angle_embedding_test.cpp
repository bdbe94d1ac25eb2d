// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "obx/angle_embedding.hpp"
#include "support/random_boxes.hpp"

using namespace obx;

namespace {

double angle_gap_mod(double a, double b, double period) {
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

}  // namespace

TEST_SUITE("angle_embedding") {

TEST_CASE("encode worked cases") {
  const ApeEmbedding saturated = ape_encode(0.0, 10.0, 2.0, {});
  CHECK(saturated.u1.x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(saturated.u1.y == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(saturated.u2.x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(saturated.u2.y == doctest::Approx(0.0).epsilon(1e-15));

  const ApeEmbedding square = ape_encode(kPi / 6, 4.0, 4.0, {});
  CHECK(square.u1.x == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(square.u1.y == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
  CHECK(square.u2.x == 0.0);
  CHECK(square.u2.y == 0.0);

  // partial aspect factor: (4.4 - 4) / (0.5 * 4) = 0.2
  const ApeEmbedding partial = ape_encode(0.0, 4.4, 4.0, {});
  CHECK(partial.u2.x == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(partial.u2.y == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(ape_encode(0.0, 2.0, 4.0, {}), InputError);   // w < h
  CHECK_THROWS_AS(ape_encode(0.0, 4.0, 0.0, {}), InputError);   // h = 0
  CHECK_THROWS_AS(ape_encode(std::nan(""), 4.0, 2.0, {}), InputError);
}

TEST_CASE("encode invariants") {
  test::Rng rng(0xa9e1);
  for (int i = 0; i < 20000; ++i) {
    const double h = rng.uniform(1.0, 50.0);
    const double w = h * rng.uniform(1.0, 5.0);
    const double theta = rng.uniform(0.0, kPi);
    const ApeEmbedding e = ape_encode(theta, w, h, {});
    REQUIRE(norm(e.u1) == doctest::Approx(1.0).epsilon(1e-12));
    const double expected_norm = std::min((w - h) / (0.5 * h), 1.0);
    REQUIRE(norm(e.u2) == doctest::Approx(expected_norm).epsilon(1e-9));
    for (double c : {e.u1.x, e.u1.y, e.u2.x, e.u2.y}) {
      REQUIRE(c >= -1.0 - 1e-12);
      REQUIRE(c <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("aspect factor is monotone in w/h and clamps at 1") {
  const double theta = 0.9, h = 8.0;
  double prev = -1.0;
  for (double ratio = 1.0; ratio <= 3.0; ratio += 0.01) {
    const double n = norm(ape_encode(theta, ratio * h, h, {}).u2);
    CHECK(n >= prev - 1e-12);
    CHECK(n <= 1.0 + 1e-12);
    prev = n;
  }
  CHECK(norm(ape_encode(theta, 1.5 * h, h, {}).u2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decode worked cases") {
  CHECK(ape_decode({{1, 0}, {1, 0}}, {}) == doctest::Approx(0.0).epsilon(1e-15));

  // period-90 angle says 0 or 90; the period-180 vector points the other way
  CHECK(ape_decode({{1, 0}, {-1, 0}}, {}) == doctest::Approx(kPi / 2).epsilon(1e-12));

  // square branch: only the angle mod 90 degrees exists
  CHECK(ape_decode({{0, 1}, {0, 0}}, {}) == doctest::Approx(kPi / 8).epsilon(1e-12));

  CHECK_THROWS_AS(ape_decode({{0, 0}, {1, 0}}, {}), UndecodableEmbedding);
  CHECK_THROWS_AS(ape_decode({{1, 0}, {1, 0}}, ApeConfig{-1.0, 1e-3}), InputError);
}

TEST_CASE("decode clamps out-of-range components") {
  // raw network heads may overshoot slightly; decoding must still work
  CHECK(ape_decode({{1.4, 0}, {1.2, 0}}, {}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("roundtrip: saturated aspect") {
  test::Rng rng(0xab5);
  for (int i = 0; i < 10000; ++i) {
    const double h = rng.uniform(1.0, 40.0);
    const double w = h * rng.uniform(1.6, 6.0);  // (w-h) >= lambda*h
    const double theta = rng.uniform(0.0, kPi);
    const double back = ape_decode(ape_encode(theta, w, h, {}), {});
    REQUIRE(angle_gap_mod(back, theta, kPi) < 1e-6);
  }
}

TEST_CASE("roundtrip: exact squares recover mod a quarter turn") {
  test::Rng rng(0x54a);
  for (int i = 0; i < 10000; ++i) {
    const double side = rng.uniform(1.0, 40.0);
    const double theta = rng.uniform(0.0, kPi);
    const double back = ape_decode(ape_encode(theta, side, side, {}), {});
    REQUIRE(angle_gap_mod(back, theta, kPi / 2) < 1e-6);
  }
}

TEST_CASE("seam continuity: theta and theta + pi embed identically") {
  test::Rng rng(0x5ea);
  for (int i = 0; i < 10000; ++i) {
    const double theta = rng.uniform(0.0, kPi);
    const ApeEmbedding a = ape_encode(theta, 12.0, 3.0, {});
    const ApeEmbedding b = ape_encode(theta + kPi, 12.0, 3.0, {});
    REQUIRE(std::abs(a.u1.x - b.u1.x) < 1e-12);
    REQUIRE(std::abs(a.u1.y - b.u1.y) < 1e-12);
    REQUIRE(std::abs(a.u2.x - b.u2.x) < 1e-12);
    REQUIRE(std::abs(a.u2.y - b.u2.y) < 1e-12);
  }
}

TEST_CASE("decode is robust to bounded component noise") {
  // saturated-aspect embeddings perturbed by up to 0.05 per component stay
  // within 2 degrees after decoding
  test::Rng rng(0x2015e);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double theta = rng.uniform(0.0, kPi);
    ApeEmbedding e = ape_encode(theta, 20.0, 5.0, {});
    e.u1.x += rng.uniform(-0.05, 0.05);
    e.u1.y += rng.uniform(-0.05, 0.05);
    e.u2.x += rng.uniform(-0.05, 0.05);
    e.u2.y += rng.uniform(-0.05, 0.05);
    const double back = ape_decode(e, {});
    worst = std::max(worst, angle_gap_mod(back, theta, kPi));
  }
  CHECK(worst < 2.0 * kPi / 180.0);
  MESSAGE("worst decoded angle error under noise: ", worst * 180.0 / kPi, " deg");
}

TEST_CASE("smooth L1") {
  CHECK(smooth_l1(3.0, 3.0) == 0.0);
  CHECK(smooth_l1(0.5, 0.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(smooth_l1(2.0, 0.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(smooth_l1(-2.0, 0.0) == doctest::Approx(1.5).epsilon(1e-15));

  // continuous with continuous slope at |d| = 1
  const double eps = 1e-7;
  CHECK(smooth_l1(1.0 - eps, 0.0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(smooth_l1(1.0 + eps, 0.0) == doctest::Approx(0.5).epsilon(1e-6));
  const double slope_below = (smooth_l1(1.0, 0.0) - smooth_l1(1.0 - eps, 0.0)) / eps;
  const double slope_above = (smooth_l1(1.0 + eps, 0.0) - smooth_l1(1.0, 0.0)) / eps;
  CHECK(slope_below == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(slope_above == doctest::Approx(1.0).epsilon(1e-5));

  CHECK_THROWS_AS(smooth_l1(std::nan(""), 0.0), InputError);
}

}  // TEST_SUITE
