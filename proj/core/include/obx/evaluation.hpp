// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "obx/geometry.hpp"

namespace obx {

struct Detection {
  std::string image_id;
  int class_id = 0;
  double score = 0.0;
  Quad quad;
};

struct Annotation {
  std::string image_id;
  int class_id = 0;
  Quad quad;
  bool difficult = false;
};

enum class ApMetric {
  kVoc07ElevenPoint,
  kContinuous,
};

enum class QuadOverlapMethod {
  /// Convert both quads to min-area rectangles and use rotated_iou.
  kMinAreaRect,
  /// Clip the convex quads against each other directly.
  kExactPolygon,
};

struct EvalConfig {
  double iou_threshold = 0.5;
  ApMetric metric = ApMetric::kVoc07ElevenPoint;
  QuadOverlapMethod overlap = QuadOverlapMethod::kMinAreaRect;
};

struct PrCurve {
  std::vector<double> recall;
  std::vector<double> precision;
};

struct ClassEval {
  double ap = 0.0;
  int num_gt = 0;  // non-difficult ground truths
  int num_detections = 0;
  PrCurve curve;
};

struct EvalReport {
  double map = 0.0;
  std::map<int, ClassEval> per_class;
  /// Detections whose class has no ground truth at all; they are excluded
  /// from every per-class tally.
  int unknown_class_detections = 0;
  /// Classes skipped because all their ground truths are difficult.
  std::vector<int> skipped_classes;
  EvalConfig config;
};

/// Greedy same-class, same-image suppression: detections are visited in
/// descending score order (ties broken on image id, class, then vertex
/// coordinates) and dropped when their rotated IoU with an already kept
/// detection exceeds the threshold. Idempotent; output sorted by the same
/// order. threshold must lie in (0, 1).
std::vector<Detection> rotated_nms(std::vector<Detection> dets, double iou_threshold);

/// VOC-style average precision over rotated overlaps: per class, detections
/// match the unmatched ground truth of highest overlap >= threshold.
/// Difficult ground truths absorb detections without counting either way.
EvalReport evaluate(std::span<const Detection> dets, std::span<const Annotation> annotations,
                    const EvalConfig& cfg = {});

/// Tile placement for stitching per-tile detections back onto the source
/// image before cross-tile suppression.
struct TileOrigin {
  std::string tile_image_id;
  std::string merged_image_id;
  Point2 offset;
};

/// Offsets every detection by its tile origin, retags it with the merged
/// image id, and runs rotated_nms across tiles. Detections from unknown
/// tiles are dropped.
std::vector<Detection> merge_tiles(std::span<const Detection> dets,
                                   std::span<const TileOrigin> tiles, double iou_threshold);

}  // namespace obx
