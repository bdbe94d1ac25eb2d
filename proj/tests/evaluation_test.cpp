// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <vector>

#include "doctest.h"
#include "obx/evaluation.hpp"
#include "support/oracles.hpp"
#include "support/random_boxes.hpp"

using namespace obx;

namespace {

Detection det(const std::string& image, int cls, double score, const OrientedBox& box) {
  return Detection{image, cls, score, box_to_quad(box)};
}

Annotation ann(const std::string& image, int cls, const OrientedBox& box,
               bool difficult = false) {
  return Annotation{image, cls, box_to_quad(box), difficult};
}

bool same_dets(const std::vector<Detection>& a, const std::vector<Detection>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].image_id != b[i].image_id || a[i].class_id != b[i].class_id ||
        a[i].score != b[i].score)
      return false;
    for (int v = 0; v < 4; ++v) {
      const Point2 pa = a[i].quad.vertices()[static_cast<std::size_t>(v)];
      const Point2 pb = b[i].quad.vertices()[static_cast<std::size_t>(v)];
      if (pa.x != pb.x || pa.y != pb.y) return false;
    }
  }
  return true;
}

std::vector<Detection> random_det_set(test::Rng& rng, int max_count) {
  std::vector<Detection> dets;
  const int n = 1 + rng.below(max_count);
  for (int i = 0; i < n; ++i) {
    dets.push_back(det("img", rng.below(3), rng.uniform(0.05, 1.0), rng.box()));
  }
  return dets;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("nms keeps a single detection") {
  std::vector<Detection> in{det("a", 0, 0.7, OrientedBox::make(0, 0, 4, 2, 0.3))};
  CHECK(rotated_nms(in, 0.5).size() == 1);
  CHECK_THROWS_AS(rotated_nms(in, 0.0), InputError);
  CHECK_THROWS_AS(rotated_nms(in, 1.0), InputError);
}

TEST_CASE("nms suppresses the lower-scored duplicate") {
  const OrientedBox box = OrientedBox::make(10, 10, 4, 2, 0.2);
  std::vector<Detection> in{det("a", 0, 0.8, box), det("a", 0, 0.9, box)};
  const std::vector<Detection> kept = rotated_nms(in, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.9);
}

TEST_CASE("nms threshold is a strict bound on the overlap") {
  // the pair overlaps at exactly IoU 0.6
  std::vector<Detection> in{det("a", 0, 0.9, OrientedBox::make(0, 0, 4, 2, 0)),
                            det("a", 0, 0.8, OrientedBox::make(1, 0, 4, 2, 0))};
  CHECK(rotated_nms(in, 0.5).size() == 1);
  CHECK(rotated_nms(in, 0.7).size() == 2);
}

TEST_CASE("nms never suppresses across classes or images") {
  const OrientedBox box = OrientedBox::make(0, 0, 4, 2, 0);
  std::vector<Detection> in{det("a", 0, 0.9, box), det("a", 1, 0.8, box),
                            det("b", 0, 0.7, box)};
  CHECK(rotated_nms(in, 0.5).size() == 3);
}

TEST_CASE("nms is idempotent and order-invariant") {
  test::Rng rng(0x41a);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Detection> dets = random_det_set(rng, 40);
    const std::vector<Detection> once = rotated_nms(dets, 0.4);
    REQUIRE(same_dets(rotated_nms(once, 0.4), once));

    std::vector<Detection> shuffled = dets;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng.below(static_cast<int>(i)))]);
    }
    REQUIRE(same_dets(rotated_nms(shuffled, 0.4), once));
  }
}

TEST_CASE("evaluate: single perfect detection") {
  const OrientedBox box = OrientedBox::make(50, 50, 30, 10, 0.4);
  const std::vector<Annotation> gts{ann("a", 0, box)};
  const std::vector<Detection> dets{det("a", 0, 0.9, box)};
  const EvalReport report = evaluate(dets, gts);
  CHECK(report.map == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.per_class.at(0).ap == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate: low-overlap detection scores zero") {
  const std::vector<Annotation> gts{ann("a", 0, OrientedBox::make(0, 0, 10, 4, 0))};
  // overlap well under 0.5
  const std::vector<Detection> dets{det("a", 0, 0.9, OrientedBox::make(8, 0, 10, 4, 0))};
  const EvalReport report = evaluate(dets, gts);
  CHECK(report.map == 0.0);
}

TEST_CASE("evaluate: three-detection fixture, both metrics") {
  const OrientedBox g1 = OrientedBox::make(20, 20, 10, 4, 0);
  const OrientedBox g2 = OrientedBox::make(80, 80, 10, 4, 1.0);
  const std::vector<Annotation> gts{ann("a", 0, g1), ann("a", 0, g2)};
  const std::vector<Detection> dets{
      det("a", 0, 0.9, g1),                                  // TP
      det("a", 0, 0.8, OrientedBox::make(50, 20, 8, 3, 0)),  // FP
      det("a", 0, 0.7, g2),                                  // TP
  };

  EvalConfig cont;
  cont.metric = ApMetric::kContinuous;
  CHECK(evaluate(dets, gts, cont).map == doctest::Approx(5.0 / 6.0).epsilon(1e-12));

  EvalConfig voc;
  voc.metric = ApMetric::kVoc07ElevenPoint;
  const double ap = evaluate(dets, gts, voc).map;
  CHECK(ap == doctest::Approx(28.0 / 33.0).epsilon(1e-12));

  // cross-check against the from-scratch threshold-sweep evaluator
  const std::vector<test::ScoredMatch> matches{{0.9, true}, {0.8, false}, {0.7, true}};
  CHECK(test::brute_force_ap_voc07(matches, 2) == doctest::Approx(ap).epsilon(1e-12));
  CHECK(test::brute_force_ap_continuous(matches, 2) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("evaluate agrees with the brute-force evaluator on random inputs") {
  test::Rng rng(0x41b);
  for (int trial = 0; trial < 200; ++trial) {
    // Non-overlapping gts on a line; detections either snap to a gt or miss.
    std::vector<Annotation> gts;
    const int num_gt = 2 + rng.below(6);
    for (int i = 0; i < num_gt; ++i) {
      gts.push_back(ann("a", 0, OrientedBox::make(100.0 * i, 0, 20, 8, 0)));
    }
    std::vector<Detection> dets;
    std::vector<test::ScoredMatch> matches;
    std::vector<bool> taken(static_cast<std::size_t>(num_gt), false);
    const int num_det = 1 + rng.below(10);
    for (int i = 0; i < num_det; ++i) {
      const double score = rng.uniform(0.01, 1.0);
      const int target = rng.below(num_gt);
      if (rng.uniform() < 0.6 && !taken[static_cast<std::size_t>(target)]) {
        taken[static_cast<std::size_t>(target)] = true;
        dets.push_back(det("a", 0, score, OrientedBox::make(100.0 * target, 0, 20, 8, 0)));
        matches.push_back({score, true});
      } else {
        dets.push_back(det("a", 0, score,
                           OrientedBox::make(100.0 * target + 50.0, 0, 20, 8, 0)));
        matches.push_back({score, false});
      }
    }
    EvalConfig voc;
    voc.metric = ApMetric::kVoc07ElevenPoint;
    REQUIRE(evaluate(dets, gts, voc).map ==
            doctest::Approx(test::brute_force_ap_voc07(matches, num_gt)).epsilon(1e-12));
    EvalConfig cont;
    cont.metric = ApMetric::kContinuous;
    REQUIRE(evaluate(dets, gts, cont).map ==
            doctest::Approx(test::brute_force_ap_continuous(matches, num_gt)).epsilon(1e-12));
  }
}

TEST_CASE("difficult ground truths absorb detections without penalty") {
  const OrientedBox easy = OrientedBox::make(20, 20, 10, 4, 0);
  const OrientedBox hard = OrientedBox::make(80, 80, 10, 4, 0);
  const std::vector<Annotation> gts{ann("a", 0, easy), ann("a", 0, hard, true)};
  const std::vector<Detection> dets{det("a", 0, 0.9, hard), det("a", 0, 0.8, easy)};
  const EvalReport report = evaluate(dets, gts);
  // the difficult hit neither counts as TP nor FP; the easy hit is a clean TP
  CHECK(report.per_class.at(0).num_gt == 1);
  CHECK(report.map == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("classes with only difficult ground truths are skipped") {
  const std::vector<Annotation> gts{
      ann("a", 0, OrientedBox::make(20, 20, 10, 4, 0)),
      ann("a", 1, OrientedBox::make(80, 80, 10, 4, 0), true),
  };
  const std::vector<Detection> dets{det("a", 0, 0.9, OrientedBox::make(20, 20, 10, 4, 0))};
  const EvalReport report = evaluate(dets, gts);
  CHECK(report.per_class.size() == 1);
  REQUIRE(report.skipped_classes.size() == 1);
  CHECK(report.skipped_classes[0] == 1);
}

TEST_CASE("detections of classes without ground truth are counted as warnings") {
  const std::vector<Annotation> gts{ann("a", 0, OrientedBox::make(20, 20, 10, 4, 0))};
  const std::vector<Detection> dets{
      det("a", 0, 0.9, OrientedBox::make(20, 20, 10, 4, 0)),
      det("a", 9, 0.8, OrientedBox::make(20, 20, 10, 4, 0)),
  };
  const EvalReport report = evaluate(dets, gts);
  CHECK(report.unknown_class_detections == 1);
  CHECK(report.map == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate is invariant to detection order") {
  test::Rng rng(0x41c);
  std::vector<Annotation> gts;
  for (int i = 0; i < 6; ++i) {
    gts.push_back(ann("a", i % 2, OrientedBox::make(60.0 * i, 0, 20, 8, 0.2)));
  }
  std::vector<Detection> dets;
  for (int i = 0; i < 25; ++i) {
    dets.push_back(det("a", rng.below(2), rng.uniform(0.0, 1.0),
                       OrientedBox::make(60.0 * rng.below(6) + rng.uniform(-8, 8),
                                         rng.uniform(-4, 4), 20, 8, 0.2)));
  }
  const double base = evaluate(dets, gts).map;
  std::reverse(dets.begin(), dets.end());
  CHECK(evaluate(dets, gts).map == base);
}

TEST_CASE("removing a false positive never lowers AP") {
  const OrientedBox g = OrientedBox::make(20, 20, 10, 4, 0);
  std::vector<Detection> dets{
      det("a", 0, 0.9, OrientedBox::make(60, 60, 10, 4, 0)),  // FP above the TP
      det("a", 0, 0.8, g),
  };
  const std::vector<Annotation> gts{ann("a", 0, g)};
  const double with_fp = evaluate(dets, gts).map;
  dets.erase(dets.begin());
  const double without_fp = evaluate(dets, gts).map;
  CHECK(without_fp >= with_fp);
  CHECK(without_fp == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("consistent class relabeling permutes APs and keeps mAP") {
  test::Rng rng(0x41d);
  std::vector<Annotation> gts;
  std::vector<Detection> dets;
  for (int i = 0; i < 10; ++i) {
    const OrientedBox b = OrientedBox::make(70.0 * i, 0, 24, 10, 0.5);
    gts.push_back(ann("a", i % 3, b));
    if (rng.uniform() < 0.7) {
      dets.push_back(det("a", i % 3, rng.uniform(0.2, 1.0), b));
    }
  }
  dets.push_back(det("a", 1, 0.99, OrientedBox::make(1000, 0, 24, 10, 0)));
  const EvalReport base = evaluate(dets, gts);

  auto relabel = [](int cls) { return (cls + 1) % 3; };
  for (Annotation& g : gts) g.class_id = relabel(g.class_id);
  for (Detection& d : dets) d.class_id = relabel(d.class_id);
  const EvalReport permuted = evaluate(dets, gts);

  CHECK(permuted.map == doctest::Approx(base.map).epsilon(1e-12));
  for (const auto& [cls, ce] : base.per_class) {
    CHECK(permuted.per_class.at(relabel(cls)).ap == doctest::Approx(ce.ap).epsilon(1e-12));
  }
}

TEST_CASE("exact polygon overlap method matches rectangles on rectangle quads") {
  const OrientedBox g = OrientedBox::make(20, 20, 10, 4, 0.7);
  const std::vector<Annotation> gts{ann("a", 0, g)};
  const std::vector<Detection> dets{det("a", 0, 0.9, g)};
  EvalConfig cfg;
  cfg.overlap = QuadOverlapMethod::kExactPolygon;
  CHECK(evaluate(dets, gts, cfg).map == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tile merge offsets detections and dedupes the overlap strip") {
  const std::vector<TileOrigin> tiles{
      {"P1__0_0", "P1", {0, 0}},
      {"P1__256_0", "P1", {256, 0}},
  };
  // the same physical object seen by both tiles, in tile-local coordinates
  const OrientedBox in_tile_a = OrientedBox::make(300, 40, 30, 12, 0.3);
  const OrientedBox in_tile_b = OrientedBox::make(44, 40, 30, 12, 0.3);
  std::vector<Detection> dets{
      det("P1__0_0", 0, 0.8, in_tile_a),
      det("P1__256_0", 0, 0.9, in_tile_b),
      det("unknown_tile", 0, 0.9, in_tile_b),
  };
  const std::vector<Detection> merged = merge_tiles(dets, tiles, 0.3);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].image_id == "P1");
  CHECK(merged[0].score == 0.9);
  const OrientedBox back = quad_to_box(merged[0].quad);
  CHECK(back.cx() == doctest::Approx(300.0).epsilon(1e-9));
  CHECK(back.cy() == doctest::Approx(40.0).epsilon(1e-9));
}

}  // TEST_SUITE
