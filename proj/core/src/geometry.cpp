// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include "obx/geometry.hpp"

#include <algorithm>
#include <limits>

namespace obx {

namespace {

// On-edge classification band for clipping, in cross-product units (px^2).
constexpr double kOnEdgeEps = 1e-9;
// Intersections thinner than this are numerical slivers, not regions.
constexpr double kSliverArea = 1e-12;
constexpr double kDegenerateArea = 1e-12;

bool all_finite(std::initializer_list<double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Lexicographic order on box parameters; used to canonicalize argument
// order so that symmetric quantities are computed bit-identically.
bool box_less(const OrientedBox& a, const OrientedBox& b) {
  if (a.cx() != b.cx()) return a.cx() < b.cx();
  if (a.cy() != b.cy()) return a.cy() < b.cy();
  if (a.w() != b.w()) return a.w() < b.w();
  if (a.h() != b.h()) return a.h() < b.h();
  return a.theta() < b.theta();
}

ConvexPolygon clip_half_plane(const ConvexPolygon& poly, Point2 a, Point2 b) {
  ConvexPolygon out;
  const Point2 edge = b - a;
  for (int i = 0; i < poly.count; ++i) {
    const Point2 s = poly.pts[static_cast<std::size_t>(i)];
    const Point2 e = poly.pts[static_cast<std::size_t>((i + 1) % poly.count)];
    const double ds = cross(edge, s - a);
    const double de = cross(edge, e - a);
    if (ds >= -kOnEdgeEps) out.push(s);
    const bool crosses = (ds > kOnEdgeEps && de < -kOnEdgeEps) ||
                         (ds < -kOnEdgeEps && de > kOnEdgeEps);
    if (crosses) {
      const double t = ds / (ds - de);
      out.push(s + (e - s) * t);
    }
  }
  return out;
}

ConvexPolygon clip_convex(const Point2* subject, int ns, const Point2* clipper, int nc) {
  ConvexPolygon poly;
  for (int i = 0; i < ns; ++i) poly.push(subject[i]);
  for (int i = 0; i < nc && poly.count > 2; ++i) {
    poly = clip_half_plane(poly, clipper[i], clipper[(i + 1) % nc]);
  }
  return poly;
}

double polygon_area(const Point2* pts, int n) {
  double twice = 0.0;
  for (int i = 0; i < n; ++i) {
    twice += cross(pts[i], pts[(i + 1) % n]);
  }
  return 0.5 * twice;
}

// Convex hull (monotone chain), collinear points dropped. Input size is
// tiny here, so the O(n log n) sort cost is irrelevant.
int convex_hull(std::array<Point2, 4> pts, std::array<Point2, 8>& hull) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  int k = 0;
  auto turn = [](Point2 o, Point2 a, Point2 b) { return cross(a - o, b - o); };
  for (int i = 0; i < 4; ++i) {
    while (k >= 2 && turn(hull[static_cast<std::size_t>(k - 2)],
                          hull[static_cast<std::size_t>(k - 1)], pts[static_cast<std::size_t>(i)]) <= 0.0)
      --k;
    hull[static_cast<std::size_t>(k++)] = pts[static_cast<std::size_t>(i)];
  }
  const int lower = k + 1;
  for (int i = 2; i >= 0; --i) {
    while (k >= lower && turn(hull[static_cast<std::size_t>(k - 2)],
                              hull[static_cast<std::size_t>(k - 1)], pts[static_cast<std::size_t>(i)]) <= 0.0)
      --k;
    hull[static_cast<std::size_t>(k++)] = pts[static_cast<std::size_t>(i)];
  }
  return k - 1;  // last point repeats the first
}

bool segments_properly_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return d1 * d2 < 0.0 && d3 * d4 < 0.0;
}

}  // namespace

double wrap_half_turn(double theta) {
  double t = std::fmod(theta, kPi);
  if (t < 0.0) t += kPi;
  if (t >= kPi) t = 0.0;  // rounding of tiny negatives can land on pi
  return t;
}

OrientedBox OrientedBox::make(double cx, double cy, double w, double h, double theta) {
  if (!all_finite({cx, cy, w, h, theta})) {
    throw InputError("OrientedBox: non-finite parameter");
  }
  if (w <= 0.0 || h <= 0.0) {
    throw InputError("OrientedBox: sides must be positive");
  }
  if (w < h) {
    std::swap(w, h);
    theta += kPi / 2.0;
  }
  return OrientedBox(cx, cy, w, h, wrap_half_turn(theta));
}

std::array<Point2, 4> OrientedBox::corners() const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  const double hw = 0.5 * w_;
  const double hh = 0.5 * h_;
  auto at = [&](double u, double v) -> Point2 {
    return {cx_ + c * u - s * v, cy_ + s * u + c * v};
  };
  return {at(-hw, -hh), at(hw, -hh), at(hw, hh), at(-hw, hh)};
}

bool OrientedBox::contains(Point2 p, double tol) const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  const double dx = p.x - cx_;
  const double dy = p.y - cy_;
  const double u = c * dx + s * dy;
  const double v = -s * dx + c * dy;
  return std::abs(u) <= 0.5 * w_ + tol && std::abs(v) <= 0.5 * h_ + tol;
}

Quad Quad::from_points(const std::array<Point2, 4>& pts) {
  for (Point2 p : pts) {
    if (!all_finite({p.x, p.y})) throw InputError("Quad: non-finite vertex");
  }
  std::array<Point2, 4> v = pts;
  const double signed_area = polygon_area(v.data(), 4);
  if (std::abs(signed_area) < kDegenerateArea) {
    throw InputError("Quad: zero-area (degenerate) input");
  }
  if (signed_area < 0.0) std::reverse(v.begin(), v.end());
  if (segments_properly_intersect(v[0], v[1], v[2], v[3]) ||
      segments_properly_intersect(v[1], v[2], v[3], v[0])) {
    throw InputError("Quad: self-intersecting vertex order");
  }
  int start = 0;
  for (int i = 1; i < 4; ++i) {
    const Point2 a = v[static_cast<std::size_t>(i)];
    const Point2 b = v[static_cast<std::size_t>(start)];
    if (a.y < b.y || (a.y == b.y && a.x < b.x)) start = i;
  }
  std::array<Point2, 4> rotated;
  for (int i = 0; i < 4; ++i) {
    rotated[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>((start + i) % 4)];
  }
  return Quad(rotated);
}

double Quad::area() const { return polygon_area(v_.data(), 4); }

double ConvexPolygon::area() const {
  if (count < 3) return 0.0;
  return polygon_area(pts.data(), count);
}

Quad box_to_quad(const OrientedBox& box) { return Quad::from_points(box.corners()); }

OrientedBox quad_to_box(const Quad& quad) {
  std::array<Point2, 8> hull;
  const int n = convex_hull(quad.vertices(), hull);
  if (n < 3) throw InputError("quad_to_box: collinear vertices, zero-area input");

  double best_area = std::numeric_limits<double>::infinity();
  Point2 best_center{};
  double best_w = 0.0, best_h = 0.0, best_theta = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point2 a = hull[static_cast<std::size_t>(i)];
    const Point2 b = hull[static_cast<std::size_t>((i + 1) % n)];
    const double len = norm(b - a);
    if (len <= 0.0) continue;
    const Point2 dir = (b - a) * (1.0 / len);
    const Point2 nrm{-dir.y, dir.x};
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    double vmin = umin, vmax = -umin;
    for (int j = 0; j < n; ++j) {
      const Point2 p = hull[static_cast<std::size_t>(j)];
      const double u = dot(p, dir);
      const double v = dot(p, nrm);
      umin = std::min(umin, u);
      umax = std::max(umax, u);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    const double area = (umax - umin) * (vmax - vmin);
    if (area < best_area) {
      best_area = area;
      best_center = dir * (0.5 * (umin + umax)) + nrm * (0.5 * (vmin + vmax));
      best_w = umax - umin;
      best_h = vmax - vmin;
      best_theta = std::atan2(dir.y, dir.x);
    }
  }
  if (!std::isfinite(best_area)) {
    throw InputError("quad_to_box: degenerate hull");
  }
  return OrientedBox::make(best_center.x, best_center.y, best_w, best_h, best_theta);
}

ConvexPolygon rect_intersection(const OrientedBox& a, const OrientedBox& b) {
  const std::array<Point2, 4> sa = a.corners();
  const std::array<Point2, 4> sb = b.corners();
  return clip_convex(sa.data(), 4, sb.data(), 4);
}

double rect_intersection_area(const OrientedBox& a, const OrientedBox& b) {
  const OrientedBox& first = box_less(b, a) ? b : a;
  const OrientedBox& second = box_less(b, a) ? a : b;
  const ConvexPolygon inter = rect_intersection(first, second);
  const double area = inter.area();
  return area < kSliverArea ? 0.0 : area;
}

double rotated_iou(const OrientedBox& a, const OrientedBox& b) {
  const double inter = rect_intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  // Measure the boxes with the same shoelace arithmetic as the clipped
  // polygon, so identical boxes give exactly 1.
  auto shoelace = [](const OrientedBox& box) {
    const std::array<Point2, 4> c = box.corners();
    return polygon_area(c.data(), 4);
  };
  const double uni = shoelace(a) + shoelace(b) - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double raster_iou_oracle(const OrientedBox& a, const OrientedBox& b, int resolution) {
  if (resolution < 64) throw InputError("raster_iou_oracle: resolution must be >= 64");

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const OrientedBox* box : {&a, &b}) {
    for (Point2 p : box->corners()) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  const double padx = 0.005 * (xmax - xmin) + 1e-9;
  const double pady = 0.005 * (ymax - ymin) + 1e-9;
  xmin -= padx;
  xmax += padx;
  ymin -= pady;
  ymax += pady;

  const double dx = (xmax - xmin) / resolution;
  const double dy = (ymax - ymin) / resolution;

  struct Frame {
    double c, s, cx, cy, hw, hh;
  };
  auto frame_of = [](const OrientedBox& box) {
    return Frame{std::cos(box.theta()), std::sin(box.theta()),
                 box.cx(), box.cy(), 0.5 * box.w(), 0.5 * box.h()};
  };
  const Frame fa = frame_of(a);
  const Frame fb = frame_of(b);

  long long inter = 0, uni = 0;
  for (int iy = 0; iy < resolution; ++iy) {
    const double y = ymin + (iy + 0.5) * dy;
    const double x0 = xmin + 0.5 * dx;
    // Box-frame coordinates advance linearly along the row.
    double ua = fa.c * (x0 - fa.cx) + fa.s * (y - fa.cy);
    double va = -fa.s * (x0 - fa.cx) + fa.c * (y - fa.cy);
    double ub = fb.c * (x0 - fb.cx) + fb.s * (y - fb.cy);
    double vb = -fb.s * (x0 - fb.cx) + fb.c * (y - fb.cy);
    const double dua = fa.c * dx, dva = -fa.s * dx;
    const double dub = fb.c * dx, dvb = -fb.s * dx;
    for (int ix = 0; ix < resolution; ++ix) {
      const bool in_a = std::abs(ua) <= fa.hw && std::abs(va) <= fa.hh;
      const bool in_b = std::abs(ub) <= fb.hw && std::abs(vb) <= fb.hh;
      inter += (in_a && in_b) ? 1 : 0;
      uni += (in_a || in_b) ? 1 : 0;
      ua += dua;
      va += dva;
      ub += dub;
      vb += dvb;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double quad_intersection_area(const Quad& a, const Quad& b) {
  // Clip hull against hull: exact for convex quads, and a well-defined
  // convex clipper when a concave vertex slips through normalization.
  std::array<Point2, 8> ha, hb;
  const int na = convex_hull(a.vertices(), ha);
  const int nb = convex_hull(b.vertices(), hb);
  if (na < 3 || nb < 3) return 0.0;
  const ConvexPolygon inter = clip_convex(ha.data(), na, hb.data(), nb);
  const double area = inter.area();
  return area < kSliverArea ? 0.0 : area;
}

double quad_iou(const Quad& a, const Quad& b) {
  const double inter = quad_intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace obx
