// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include "obx/matching.hpp"

#include <cmath>

namespace obx {

OrientedBox intercept_gt(const OrientedBox& proposal, const OrientedBox& gt) {
  if (proposal.w() >= gt.w()) return gt;

  const double c = std::cos(gt.theta());
  const double s = std::sin(gt.theta());
  const Point2 axis{c, s};
  const Point2 a = gt.center() - axis * (0.5 * gt.w());
  const Point2 b = gt.center() + axis * (0.5 * gt.w());
  const Point2 center = proposal.center();

  const double z = dot(center - a, b - a) / norm(b - a);
  double w1 = z - 0.5 * proposal.w();
  double w2 = z + 0.5 * proposal.w();
  if (w1 <= 0.0) {
    w1 = 0.0;
    w2 = proposal.w();
  } else if (w2 >= gt.w()) {
    w2 = gt.w();
    w1 = gt.w() - proposal.w();
  }
  const Point2 mid = a + axis * (0.5 * (w1 + w2));
  return OrientedBox::make(mid.x, mid.y, w2 - w1, gt.h(), gt.theta());
}

double liiou(const OrientedBox& proposal, const OrientedBox& gt) {
  return rotated_iou(proposal, intercept_gt(proposal, gt));
}

double overlap(const OrientedBox& proposal, const OrientedBox& gt, OverlapKind kind) {
  return kind == OverlapKind::kStandardIou ? rotated_iou(proposal, gt) : liiou(proposal, gt);
}

MatchResult assign(std::span<const OrientedBox> proposals, std::span<const OrientedBox> gts,
                   OverlapKind kind, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InputError("assign: threshold must lie in (0, 1)");
  }
  MatchResult result;
  result.num_proposals = static_cast<int>(proposals.size());
  result.num_gts = static_cast<int>(gts.size());
  result.positive_threshold = threshold;
  result.overlaps.assign(proposals.size() * gts.size(), 0.0);
  result.assignment.assign(proposals.size(), kUnassigned);

  for (std::size_t p = 0; p < proposals.size(); ++p) {
    double best = -1.0;
    int best_gt = kUnassigned;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double ov = overlap(proposals[p], gts[g], kind);
      result.overlaps[p * gts.size() + g] = ov;
      if (ov > best) {
        best = ov;
        best_gt = static_cast<int>(g);
      }
    }
    if (best >= threshold) result.assignment[p] = best_gt;
  }
  return result;
}

std::vector<int> coverage_stats(std::span<const OrientedBox> proposals,
                                std::span<const OrientedBox> gts, OverlapKind kind,
                                double threshold) {
  const MatchResult match = assign(proposals, gts, kind, threshold);
  std::vector<int> counts(gts.size(), 0);
  for (int gt : match.assignment) {
    if (gt != kUnassigned) ++counts[static_cast<std::size_t>(gt)];
  }
  return counts;
}

}  // namespace obx
