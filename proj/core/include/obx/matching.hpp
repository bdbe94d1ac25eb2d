// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "obx/geometry.hpp"

namespace obx {

enum class OverlapKind {
  kStandardIou,
  kLengthIndependentIou,
};

/// Segment of `gt` along its long axis, matched to the proposal's length:
/// the full gt when the proposal is at least as long, otherwise a
/// proposal-length slice centered at the clamped projection of the proposal
/// center onto gt's long axis. The returned region is contained in gt.
OrientedBox intercept_gt(const OrientedBox& proposal, const OrientedBox& gt);

/// Length-independent IoU: rotated IoU against the intercepted gt segment.
/// Falls through to plain rotated_iou when the proposal is the longer box.
double liiou(const OrientedBox& proposal, const OrientedBox& gt);

double overlap(const OrientedBox& proposal, const OrientedBox& gt, OverlapKind kind);

constexpr int kUnassigned = -1;

struct MatchResult {
  int num_proposals = 0;
  int num_gts = 0;
  /// Row-major num_proposals x num_gts.
  std::vector<double> overlaps;
  /// Per proposal: gt index, or kUnassigned when the best overlap falls
  /// below the threshold. Ties go to the lowest gt index.
  std::vector<int> assignment;
  double positive_threshold = 0.0;

  double overlap_at(int proposal, int gt) const {
    return overlaps[static_cast<std::size_t>(proposal) * static_cast<std::size_t>(num_gts) +
                    static_cast<std::size_t>(gt)];
  }
};

/// Max-overlap assignment of each proposal to a ground truth.
/// threshold must lie in (0, 1).
MatchResult assign(std::span<const OrientedBox> proposals, std::span<const OrientedBox> gts,
                   OverlapKind kind, double threshold);

/// Number of proposals assigned to each ground truth.
std::vector<int> coverage_stats(std::span<const OrientedBox> proposals,
                                std::span<const OrientedBox> gts, OverlapKind kind,
                                double threshold);

}  // namespace obx
