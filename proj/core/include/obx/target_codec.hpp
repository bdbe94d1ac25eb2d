// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "obx/angle_embedding.hpp"
#include "obx/geometry.hpp"

namespace obx {

struct ImageSize {
  int width = 0;
  int height = 0;
};

struct CodecConfig {
  /// Shrink ratio of the ignore ring.
  double r1 = 0.1;
  /// Shrink ratio of the positive core; must satisfy 0 <= r1 < r2 < 0.5.
  double r2 = 0.25;
  /// Pyramid level that receives objects with short side in [128, 256).
  int k0 = 4;
  /// Normalization constant for the center/size regression targets.
  double n_norm = 6.0;
  int level_min = 2;
  int level_max = 6;
  /// Decoding keeps at most this many proposals per level, by score.
  int max_per_level = 2000;

  void validate() const;
};

/// Pyramid level for an object with the given short side:
/// floor(k0 + log2(h / 128)), clamped into [level_min, level_max].
int assign_level(double h_short, const CodecConfig& cfg = {});

/// Feature stride of a pyramid level: 2 * 2^k.
double stride_of(int level, const CodecConfig& cfg = {});

/// Shrinks a rectangle the EAST way, specialized to rectangles: both
/// adjacent reference lengths of every vertex equal the short side, so the
/// result keeps center and angle with sides (w - 2 r h, h - 2 r h), each
/// clamped below at one pixel.
OrientedBox shrink_box(const OrientedBox& box, double r);

enum class PixelState : std::uint8_t {
  kNegative = 0,
  kIgnore = 1,
  kPositive = 2,
};

/// Regression channel order: tx, ty, tw, th, u1x, u1y, u2x, u2y.
inline constexpr int kRegressionChannels = 8;

struct LabeledBox {
  OrientedBox box;
  int class_id = 0;
};

struct LabelLevel {
  int level = 0;
  int width = 0;
  int height = 0;
  std::vector<PixelState> state;         // height * width
  std::vector<double> regression;        // kRegressionChannels * height * width, planar
  std::vector<std::int32_t> gt_index;    // height * width, -1 when unclaimed

  std::size_t cell(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
  double reg(int channel, int x, int y) const {
    return regression[static_cast<std::size_t>(channel) * static_cast<std::size_t>(width) *
                          static_cast<std::size_t>(height) +
                      cell(x, y)];
  }
};

struct LabelGridSet {
  ImageSize image_size;
  std::vector<LabelLevel> levels;  // level_min .. level_max, in order

  const LabelLevel* find_level(int level) const;
};

/// Rasterizes annotations into per-level classification states and dense
/// regression targets. Pixels whose cell center falls in the r2-shrunk box
/// are positive; the r1-shrunk ring is ignored; everything else negative.
/// Overlaps resolve positive > ignore > negative, and competing positive
/// claims go to the smaller-area object (equal areas: lower index).
LabelGridSet encode_rpn_grids(std::span<const LabeledBox> annotations, ImageSize image_size,
                              const CodecConfig& cfg = {}, const ApeConfig& ape_cfg = {});

struct PredictionLevel {
  int level = 0;
  int width = 0;
  int height = 0;
  std::vector<double> score;       // height * width
  std::vector<double> regression;  // kRegressionChannels * height * width, planar
};

struct PredictionGridSet {
  ImageSize image_size;
  std::vector<PredictionLevel> levels;
};

/// Label grids viewed as predictions: positive pixels score 1, all others 0.
PredictionGridSet to_predictions(const LabelGridSet& labels);

struct DecodedProposal {
  OrientedBox box;
  double score = 0.0;
  int level = 0;
  int x = 0;
  int y = 0;
};

/// Inverts the grid encoding at every pixel scoring above `score_threshold`,
/// keeping at most cfg.max_per_level proposals per level. Pixels that decode
/// to an invalid box (non-finite or zero-information embedding) are skipped.
std::vector<DecodedProposal> decode_rpn_grids(const PredictionGridSet& grids,
                                              double score_threshold,
                                              const CodecConfig& cfg = {},
                                              const ApeConfig& ape_cfg = {});

/// Row-major 3x3 homogeneous transform.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  Point2 apply(Point2 p) const {
    return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
  }
  Mat3 operator*(const Mat3& o) const;
};

/// Transform into the axis-aligned frame of a box rotated by `theta` about
/// `center`: image coordinates in, rotated-frame coordinates out. The
/// inverse is rotated_affine(center, -theta).
Mat3 rotated_affine(Point2 center, double theta);

struct RcnnBoxTargets {
  double tx = 0.0;
  double ty = 0.0;
  double tw = 0.0;
  double th = 0.0;
};

/// First-stage targets: gt center expressed in the proposal's rotated frame,
/// offset-normalized by the proposal sides, plus log size ratios. The gt
/// angle is not part of the encoding; the decoded box keeps the proposal's.
RcnnBoxTargets encode_rcnn_stage1(const OrientedBox& proposal, const OrientedBox& gt);
OrientedBox decode_rcnn_stage1(const RcnnBoxTargets& t, const OrientedBox& proposal);

/// Second-stage targets: the four gt vertices in the proposal's rotated
/// frame, normalized by (w, h). Order follows the Quad normalization:
/// (x1, y1, ..., x4, y4).
using RcnnVertexTargets = std::array<double, 8>;
RcnnVertexTargets encode_rcnn_stage2(const OrientedBox& proposal, const Quad& gt);
Quad decode_rcnn_stage2(const RcnnVertexTargets& t, const OrientedBox& proposal);

/// Dense multi-channel plane, planar channel-major layout.
struct Grid3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  static Grid3 zeros(int channels, int height, int width);
  double at(int c, int y, int x) const { return data[index(c, y, x)]; }
  double& at(int c, int y, int x) { return data[index(c, y, x)]; }
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * static_cast<std::size_t>(height) +
            static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
};

/// Bilinear crop over a rotated box: samples an out_h x out_w grid of cell
/// centers covering the box and interpolates among the four surrounding
/// lattice values. Feature values live at integer lattice coordinates;
/// samples outside the feature read zero.
Grid3 rotated_crop(const Grid3& feature, const OrientedBox& box, int out_h, int out_w);

}  // namespace obx
