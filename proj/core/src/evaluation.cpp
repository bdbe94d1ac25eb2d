// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include "obx/evaluation.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace obx {

namespace {

// Total order on detections: score descending, then image id, class,
// vertex coordinates. Makes sorting independent of the input permutation.
bool det_before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.image_id != b.image_id) return a.image_id < b.image_id;
  if (a.class_id != b.class_id) return a.class_id < b.class_id;
  for (int i = 0; i < 4; ++i) {
    const Point2 pa = a.quad.vertices()[static_cast<std::size_t>(i)];
    const Point2 pb = b.quad.vertices()[static_cast<std::size_t>(i)];
    if (pa.x != pb.x) return pa.x < pb.x;
    if (pa.y != pb.y) return pa.y < pb.y;
  }
  return false;
}

double overlap_of(const Quad& a, const Quad& b, QuadOverlapMethod method) {
  if (method == QuadOverlapMethod::kExactPolygon) return quad_iou(a, b);
  return rotated_iou(quad_to_box(a), quad_to_box(b));
}

double ap_voc07(const PrCurve& curve) {
  double sum = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double r = i / 10.0;
    double best = 0.0;
    for (std::size_t j = 0; j < curve.recall.size(); ++j) {
      if (curve.recall[j] >= r) best = std::max(best, curve.precision[j]);
    }
    sum += best;
  }
  return sum / 11.0;
}

double ap_continuous(const PrCurve& curve) {
  // Precision envelope integrated over recall.
  const std::size_t n = curve.recall.size();
  if (n == 0) return 0.0;
  std::vector<double> env(curve.precision);
  for (std::size_t j = n - 1; j-- > 0;) {
    env[j] = std::max(env[j], env[j + 1]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    ap += (curve.recall[j] - prev_recall) * env[j];
    prev_recall = curve.recall[j];
  }
  return ap;
}

}  // namespace

std::vector<Detection> rotated_nms(std::vector<Detection> dets, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw InputError("rotated_nms: threshold must lie in (0, 1)");
  }
  std::sort(dets.begin(), dets.end(), det_before);

  std::vector<OrientedBox> boxes;
  boxes.reserve(dets.size());
  for (const Detection& d : dets) boxes.push_back(quad_to_box(d.quad));

  std::vector<bool> suppressed(dets.size(), false);
  std::vector<Detection> kept;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(dets[i]);
    for (std::size_t j = i + 1; j < dets.size(); ++j) {
      if (suppressed[j]) continue;
      if (dets[j].class_id != dets[i].class_id || dets[j].image_id != dets[i].image_id)
        continue;
      if (rotated_iou(boxes[i], boxes[j]) > iou_threshold) suppressed[j] = true;
    }
  }
  return kept;
}

EvalReport evaluate(std::span<const Detection> dets, std::span<const Annotation> annotations,
                    const EvalConfig& cfg) {
  if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold < 1.0)) {
    throw InputError("evaluate: iou_threshold must lie in (0, 1)");
  }

  EvalReport report;
  report.config = cfg;

  std::set<int> gt_classes;
  for (const Annotation& a : annotations) gt_classes.insert(a.class_id);

  for (int cls : gt_classes) {
    ClassEval ce;

    // Ground truths of this class, grouped by image.
    struct GtEntry {
      const Annotation* ann;
      bool matched = false;
    };
    std::unordered_map<std::string, std::vector<GtEntry>> gts_by_image;
    for (const Annotation& a : annotations) {
      if (a.class_id != cls) continue;
      gts_by_image[a.image_id].push_back(GtEntry{&a});
      if (!a.difficult) ++ce.num_gt;
    }

    std::vector<const Detection*> cls_dets;
    for (const Detection& d : dets) {
      if (d.class_id == cls) cls_dets.push_back(&d);
    }
    ce.num_detections = static_cast<int>(cls_dets.size());
    std::sort(cls_dets.begin(), cls_dets.end(),
              [](const Detection* a, const Detection* b) { return det_before(*a, *b); });

    if (ce.num_gt == 0) {
      // Only difficult instances: precision/recall are undefined.
      report.skipped_classes.push_back(cls);
      continue;
    }

    int tp = 0, fp = 0;
    for (const Detection* det : cls_dets) {
      auto it = gts_by_image.find(det->image_id);
      GtEntry* best = nullptr;
      double best_overlap = 0.0;
      if (it != gts_by_image.end()) {
        for (GtEntry& gt : it->second) {
          if (gt.matched) continue;
          const double ov = overlap_of(det->quad, gt.ann->quad, cfg.overlap);
          if (ov >= cfg.iou_threshold && (best == nullptr || ov > best_overlap)) {
            best = &gt;
            best_overlap = ov;
          }
        }
      }
      if (best == nullptr) {
        ++fp;
      } else if (best->ann->difficult) {
        continue;  // absorbed: neither tp nor fp, gt stays available
      } else {
        best->matched = true;
        ++tp;
      }
      ce.curve.recall.push_back(static_cast<double>(tp) / ce.num_gt);
      ce.curve.precision.push_back(static_cast<double>(tp) / (tp + fp));
    }

    ce.ap = cfg.metric == ApMetric::kVoc07ElevenPoint ? ap_voc07(ce.curve)
                                                      : ap_continuous(ce.curve);
    report.per_class.emplace(cls, std::move(ce));
  }

  for (const Detection& d : dets) {
    if (!gt_classes.contains(d.class_id)) ++report.unknown_class_detections;
  }

  if (!report.per_class.empty()) {
    double sum = 0.0;
    for (const auto& [cls, ce] : report.per_class) sum += ce.ap;
    report.map = sum / static_cast<double>(report.per_class.size());
  }
  return report;
}

std::vector<Detection> merge_tiles(std::span<const Detection> dets,
                                   std::span<const TileOrigin> tiles, double iou_threshold) {
  std::unordered_map<std::string, const TileOrigin*> by_tile;
  for (const TileOrigin& t : tiles) by_tile.emplace(t.tile_image_id, &t);

  std::vector<Detection> shifted;
  shifted.reserve(dets.size());
  for (const Detection& d : dets) {
    auto it = by_tile.find(d.image_id);
    if (it == by_tile.end()) continue;
    std::array<Point2, 4> pts = d.quad.vertices();
    for (Point2& p : pts) p = p + it->second->offset;
    shifted.push_back(
        Detection{it->second->merged_image_id, d.class_id, d.score, Quad::from_points(pts)});
  }
  return rotated_nms(std::move(shifted), iou_threshold);
}

}  // namespace obx
