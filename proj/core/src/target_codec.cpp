// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include "obx/target_codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace obx {

void CodecConfig::validate() const {
  if (!(0.0 <= r1 && r1 < r2 && r2 < 0.5)) {
    throw InputError("CodecConfig: requires 0 <= r1 < r2 < 0.5");
  }
  if (!(level_min <= k0 && k0 <= level_max)) {
    throw InputError("CodecConfig: requires level_min <= k0 <= level_max");
  }
  if (!(n_norm > 0.0)) {
    throw InputError("CodecConfig: n_norm must be positive");
  }
  if (max_per_level < 1) {
    throw InputError("CodecConfig: max_per_level must be >= 1");
  }
}

int assign_level(double h_short, const CodecConfig& cfg) {
  cfg.validate();
  if (!(h_short > 0.0) || !std::isfinite(h_short)) {
    throw InputError("assign_level: short side must be positive");
  }
  const double k = std::floor(cfg.k0 + std::log2(h_short / 128.0));
  const double clamped = std::clamp(k, static_cast<double>(cfg.level_min),
                                    static_cast<double>(cfg.level_max));
  return static_cast<int>(clamped);
}

double stride_of(int level, const CodecConfig& cfg) {
  cfg.validate();
  if (level < cfg.level_min || level > cfg.level_max) {
    throw InputError("stride_of: level outside [level_min, level_max]");
  }
  return 2.0 * std::exp2(level);
}

OrientedBox shrink_box(const OrientedBox& box, double r) {
  if (!(r >= 0.0 && r < 0.5)) {
    throw InputError("shrink_box: ratio must lie in [0, 0.5)");
  }
  const double inset = 2.0 * r * box.h();
  const double w = std::max(box.w() - inset, 1.0);
  const double h = std::max(box.h() - inset, 1.0);
  return OrientedBox::make(box.cx(), box.cy(), w, h, box.theta());
}

const LabelLevel* LabelGridSet::find_level(int level) const {
  for (const LabelLevel& l : levels) {
    if (l.level == level) return &l;
  }
  return nullptr;
}

namespace {

int grid_cells(int image_extent, double stride) {
  return std::max(1, static_cast<int>(std::ceil(image_extent / stride)));
}

}  // namespace

LabelGridSet encode_rpn_grids(std::span<const LabeledBox> annotations, ImageSize image_size,
                              const CodecConfig& cfg, const ApeConfig& ape_cfg) {
  cfg.validate();
  if (image_size.width < 1 || image_size.height < 1) {
    throw InputError("encode_rpn_grids: image size must be positive");
  }

  LabelGridSet set;
  set.image_size = image_size;
  for (int k = cfg.level_min; k <= cfg.level_max; ++k) {
    const double s = stride_of(k, cfg);
    LabelLevel level;
    level.level = k;
    level.width = grid_cells(image_size.width, s);
    level.height = grid_cells(image_size.height, s);
    const std::size_t cells =
        static_cast<std::size_t>(level.width) * static_cast<std::size_t>(level.height);
    level.state.assign(cells, PixelState::kNegative);
    level.regression.assign(cells * kRegressionChannels, 0.0);
    level.gt_index.assign(cells, -1);
    set.levels.push_back(std::move(level));
  }

  // Larger objects first so smaller ones win competing positive claims;
  // equal areas resolve to the lower annotation index.
  std::vector<std::size_t> order(annotations.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double aa = annotations[a].box.area();
    const double ab = annotations[b].box.area();
    if (aa != ab) return aa > ab;
    return a > b;
  });

  for (std::size_t idx : order) {
    const OrientedBox& box = annotations[idx].box;
    const int k = assign_level(box.h(), cfg);
    const double s = stride_of(k, cfg);
    LabelLevel& level = set.levels[static_cast<std::size_t>(k - cfg.level_min)];

    const OrientedBox positive = shrink_box(box, cfg.r2);
    const OrientedBox ignore = shrink_box(box, cfg.r1);

    double xmin = ignore.corners()[0].x, xmax = xmin;
    double ymin = ignore.corners()[0].y, ymax = ymin;
    for (Point2 p : ignore.corners()) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    const int gx0 = std::max(0, static_cast<int>(std::floor(xmin / s - 0.5)));
    const int gx1 = std::min(level.width - 1, static_cast<int>(std::ceil(xmax / s)));
    const int gy0 = std::max(0, static_cast<int>(std::floor(ymin / s - 0.5)));
    const int gy1 = std::min(level.height - 1, static_cast<int>(std::ceil(ymax / s)));

    const ApeEmbedding emb = ape_encode(box.theta(), box.w(), box.h(), ape_cfg);
    const double xc_n = box.cx() / s;
    const double yc_n = box.cy() / s;
    const double tw = std::log(box.w() / s / cfg.n_norm);
    const double th = std::log(box.h() / s / cfg.n_norm);
    const std::size_t plane =
        static_cast<std::size_t>(level.width) * static_cast<std::size_t>(level.height);

    for (int gy = gy0; gy <= gy1; ++gy) {
      for (int gx = gx0; gx <= gx1; ++gx) {
        const Point2 center{(gx + 0.5) * s, (gy + 0.5) * s};
        const std::size_t cell = level.cell(gx, gy);
        if (positive.contains(center)) {
          level.state[cell] = PixelState::kPositive;
          level.gt_index[cell] = static_cast<std::int32_t>(idx);
          const double targets[kRegressionChannels] = {
              (xc_n - gx) / cfg.n_norm, (yc_n - gy) / cfg.n_norm, tw, th,
              emb.u1.x, emb.u1.y, emb.u2.x, emb.u2.y,
          };
          for (int c = 0; c < kRegressionChannels; ++c) {
            level.regression[static_cast<std::size_t>(c) * plane + cell] = targets[c];
          }
        } else if (ignore.contains(center)) {
          if (level.state[cell] == PixelState::kNegative) {
            level.state[cell] = PixelState::kIgnore;
          }
        }
      }
    }
  }
  return set;
}

PredictionGridSet to_predictions(const LabelGridSet& labels) {
  PredictionGridSet out;
  out.image_size = labels.image_size;
  for (const LabelLevel& l : labels.levels) {
    PredictionLevel p;
    p.level = l.level;
    p.width = l.width;
    p.height = l.height;
    p.score.resize(l.state.size());
    for (std::size_t i = 0; i < l.state.size(); ++i) {
      p.score[i] = l.state[i] == PixelState::kPositive ? 1.0 : 0.0;
    }
    p.regression = l.regression;
    out.levels.push_back(std::move(p));
  }
  return out;
}

std::vector<DecodedProposal> decode_rpn_grids(const PredictionGridSet& grids,
                                              double score_threshold, const CodecConfig& cfg,
                                              const ApeConfig& ape_cfg) {
  cfg.validate();
  std::vector<DecodedProposal> out;
  for (const PredictionLevel& level : grids.levels) {
    const std::size_t cells =
        static_cast<std::size_t>(level.width) * static_cast<std::size_t>(level.height);
    if (level.score.size() != cells ||
        level.regression.size() != cells * kRegressionChannels) {
      throw InputError("decode_rpn_grids: grid shape mismatch");
    }
    const double s = stride_of(level.level, cfg);

    std::vector<DecodedProposal> per_level;
    for (int gy = 0; gy < level.height; ++gy) {
      for (int gx = 0; gx < level.width; ++gx) {
        const std::size_t cell = static_cast<std::size_t>(gy) *
                                     static_cast<std::size_t>(level.width) +
                                 static_cast<std::size_t>(gx);
        const double score = level.score[cell];
        if (!(score > score_threshold)) continue;
        auto reg = [&](int c) {
          return level.regression[static_cast<std::size_t>(c) * cells + cell];
        };
        const double cx = (reg(0) * cfg.n_norm + gx) * s;
        const double cy = (reg(1) * cfg.n_norm + gy) * s;
        const double w = std::exp(reg(2)) * cfg.n_norm * s;
        const double h = std::exp(reg(3)) * cfg.n_norm * s;
        const ApeEmbedding emb{{reg(4), reg(5)}, {reg(6), reg(7)}};
        try {
          const double theta = ape_decode(emb, ape_cfg);
          per_level.push_back(DecodedProposal{OrientedBox::make(cx, cy, w, h, theta), score,
                                              level.level, gx, gy});
        } catch (const InputError&) {
          // Garbage pixel (zero embedding or non-finite box): skip.
        }
      }
    }
    if (per_level.size() > static_cast<std::size_t>(cfg.max_per_level)) {
      std::stable_sort(per_level.begin(), per_level.end(),
                       [](const DecodedProposal& a, const DecodedProposal& b) {
                         return a.score > b.score;
                       });
      per_level.erase(per_level.begin() + cfg.max_per_level, per_level.end());
    }
    out.insert(out.end(), per_level.begin(), per_level.end());
  }
  return out;
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) {
        acc += m[static_cast<std::size_t>(3 * i + k)] * o.m[static_cast<std::size_t>(3 * k + j)];
      }
      r.m[static_cast<std::size_t>(3 * i + j)] = acc;
    }
  }
  return r;
}

Mat3 rotated_affine(Point2 center, double theta) {
  if (!std::isfinite(center.x) || !std::isfinite(center.y) || !std::isfinite(theta)) {
    throw InputError("rotated_affine: non-finite input");
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat3 t;
  t.m = {c, s, (1.0 - c) * center.x - center.y * s,
         -s, c, (1.0 - c) * center.y + center.x * s,
         0.0, 0.0, 1.0};
  return t;
}

RcnnBoxTargets encode_rcnn_stage1(const OrientedBox& proposal, const OrientedBox& gt) {
  const Point2 g = rotated_affine(proposal.center(), proposal.theta()).apply(gt.center());
  return RcnnBoxTargets{
      (g.x - proposal.cx()) / proposal.w(),
      (g.y - proposal.cy()) / proposal.h(),
      std::log(gt.w() / proposal.w()),
      std::log(gt.h() / proposal.h()),
  };
}

OrientedBox decode_rcnn_stage1(const RcnnBoxTargets& t, const OrientedBox& proposal) {
  const Point2 rotated{proposal.cx() + t.tx * proposal.w(),
                       proposal.cy() + t.ty * proposal.h()};
  const Point2 center = rotated_affine(proposal.center(), -proposal.theta()).apply(rotated);
  return OrientedBox::make(center.x, center.y, std::exp(t.tw) * proposal.w(),
                           std::exp(t.th) * proposal.h(), proposal.theta());
}

RcnnVertexTargets encode_rcnn_stage2(const OrientedBox& proposal, const Quad& gt) {
  const Mat3 to_frame = rotated_affine(proposal.center(), proposal.theta());
  RcnnVertexTargets t{};
  for (int i = 0; i < 4; ++i) {
    const Point2 v = to_frame.apply(gt.vertices()[static_cast<std::size_t>(i)]);
    t[static_cast<std::size_t>(2 * i)] = (v.x - proposal.cx()) / proposal.w();
    t[static_cast<std::size_t>(2 * i + 1)] = (v.y - proposal.cy()) / proposal.h();
  }
  return t;
}

Quad decode_rcnn_stage2(const RcnnVertexTargets& t, const OrientedBox& proposal) {
  const Mat3 to_image = rotated_affine(proposal.center(), -proposal.theta());
  std::array<Point2, 4> pts;
  for (int i = 0; i < 4; ++i) {
    const Point2 rotated{proposal.cx() + t[static_cast<std::size_t>(2 * i)] * proposal.w(),
                         proposal.cy() + t[static_cast<std::size_t>(2 * i + 1)] * proposal.h()};
    pts[static_cast<std::size_t>(i)] = to_image.apply(rotated);
  }
  return Quad::from_points(pts);
}

Grid3 Grid3::zeros(int channels, int height, int width) {
  Grid3 g;
  g.channels = channels;
  g.height = height;
  g.width = width;
  g.data.assign(static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
                    static_cast<std::size_t>(width),
                0.0);
  return g;
}

Grid3 rotated_crop(const Grid3& feature, const OrientedBox& box, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) {
    throw InputError("rotated_crop: output size must be >= 1");
  }
  Grid3 out = Grid3::zeros(feature.channels, out_h, out_w);
  const Mat3 to_image = rotated_affine(box.center(), -box.theta());

  auto sample = [&](int c, double x, double y) -> double {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto value = [&](int xi, int yi) -> double {
      if (xi < 0 || yi < 0 || xi >= feature.width || yi >= feature.height) return 0.0;
      return feature.at(c, yi, xi);
    };
    const double top = value(x0, y0) * (1.0 - fx) + value(x0 + 1, y0) * fx;
    const double bottom = value(x0, y0 + 1) * (1.0 - fx) + value(x0 + 1, y0 + 1) * fx;
    return top * (1.0 - fy) + bottom * fy;
  };

  for (int i = 0; i < out_h; ++i) {
    for (int j = 0; j < out_w; ++j) {
      const double u = ((j + 0.5) / out_w - 0.5) * box.w();
      const double v = ((i + 0.5) / out_h - 0.5) * box.h();
      const Point2 p = to_image.apply({box.cx() + u, box.cy() + v});
      for (int c = 0; c < feature.channels; ++c) {
        out.at(c, i, j) = sample(c, p.x, p.y);
      }
    }
  }
  return out;
}

}  // namespace obx
