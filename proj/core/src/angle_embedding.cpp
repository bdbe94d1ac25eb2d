// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include "obx/angle_embedding.hpp"

#include <algorithm>
#include <cmath>

namespace obx {

namespace {

constexpr double kZeroNorm = 1e-9;

void validate(const ApeConfig& cfg) {
  if (!(cfg.lambda > 0.0) || !(cfg.degenerate_norm_eps > 0.0)) {
    throw InputError("ApeConfig: lambda and degenerate_norm_eps must be positive");
  }
}

}  // namespace

ApeEmbedding ape_encode(double theta, double w, double h, const ApeConfig& cfg) {
  validate(cfg);
  if (!std::isfinite(theta) || !std::isfinite(w) || !std::isfinite(h)) {
    throw InputError("ape_encode: non-finite input");
  }
  if (!(w >= h) || !(h > 0.0)) {
    throw InputError("ape_encode: requires w >= h > 0");
  }
  const double factor = std::min((w - h) / (cfg.lambda * h), 1.0);
  return ApeEmbedding{
      {std::cos(4.0 * theta), std::sin(4.0 * theta)},
      {std::cos(2.0 * theta) * factor, std::sin(2.0 * theta) * factor},
  };
}

double ape_decode(const ApeEmbedding& emb, const ApeConfig& cfg) {
  validate(cfg);
  auto clamped = [](Point2 v) -> Point2 {
    return {std::clamp(v.x, -1.0, 1.0), std::clamp(v.y, -1.0, 1.0)};
  };
  const Point2 u1 = clamped(emb.u1);
  const Point2 u2 = clamped(emb.u2);
  if (norm(u1) < kZeroNorm) {
    throw UndecodableEmbedding("ape_decode: period-90 vector is zero");
  }
  const double theta90 = std::atan2(u1.y, u1.x) / 4.0;
  if (norm(u2) < cfg.degenerate_norm_eps) {
    // Near-square box: only the angle mod 90 degrees exists.
    return wrap_half_turn(theta90);
  }
  const double theta180 = std::atan2(u2.y, u2.x) / 2.0;
  double d = std::fmod(2.0 * theta90 - 2.0 * theta180 + kPi, 2.0 * kPi);
  if (d < 0.0) d += 2.0 * kPi;
  const double dis = std::abs(d - kPi);
  const double theta = dis < kPi / 2.0 ? theta90 : theta90 + kPi / 2.0;
  return wrap_half_turn(theta);
}

double smooth_l1(double z, double z_star) {
  if (!std::isfinite(z) || !std::isfinite(z_star)) {
    throw InputError("smooth_l1: non-finite input");
  }
  const double d = std::abs(z - z_star);
  return d < 1.0 ? 0.5 * d * d : d - 0.5;
}

}  // namespace obx
