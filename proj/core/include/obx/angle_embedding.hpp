// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "obx/geometry.hpp"

namespace obx {

struct ApeConfig {
  /// Aspect-factor scale in the period-180 vector; the factor saturates at 1
  /// once w - h >= lambda * h.
  double lambda = 0.5;
  /// Below this norm of u2 the period-180 direction is numerically
  /// meaningless and the decoder trusts the period-90 angle alone.
  double degenerate_norm_eps = 1e-3;
};

/// Angle of a box's long side, embedded as two periodic 2-D vectors:
/// u1 has period 90 degrees and unit norm; u2 has period 180 degrees and is
/// scaled by the aspect factor, so squares carry no long-side direction.
struct ApeEmbedding {
  Point2 u1;
  Point2 u2;
};

/// Embeds the long-side angle of a (w, h) box. Requires w >= h > 0; theta may
/// be any real angle (the embedding is periodic by construction).
ApeEmbedding ape_encode(double theta, double w, double h, const ApeConfig& cfg = {});

/// Recovers the long-side angle in [0, pi). Components are clamped to [-1, 1]
/// before use, so raw network outputs are acceptable.
/// Throws UndecodableEmbedding when u1 is numerically zero.
double ape_decode(const ApeEmbedding& emb, const ApeConfig& cfg = {});

/// Piecewise regression loss: 0.5 d^2 for |d| < 1, |d| - 0.5 otherwise.
double smooth_l1(double z, double z_star);

}  // namespace obx
