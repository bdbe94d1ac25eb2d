// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>

#include "obx/error.hpp"

namespace obx {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
inline Point2 operator*(double s, Point2 a) { return a * s; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

/// Wraps an angle to the canonical half-turn range [0, pi).
double wrap_half_turn(double theta);

/// Rotated rectangle in image coordinates: center, long side `w`, short side
/// `h`, and the angle of the long side in radians, canonicalized to [0, pi).
/// `make` enforces the invariants: if the given sides arrive short-side-first
/// they are swapped and the angle advanced by pi/2, which describes the same
/// region.
class OrientedBox {
 public:
  /// Throws InputError on non-finite values or non-positive sides.
  static OrientedBox make(double cx, double cy, double w, double h, double theta);

  double cx() const { return cx_; }
  double cy() const { return cy_; }
  Point2 center() const { return {cx_, cy_}; }
  /// Long side.
  double w() const { return w_; }
  /// Short side.
  double h() const { return h_; }
  /// Angle of the long side, in [0, pi).
  double theta() const { return theta_; }
  double area() const { return w_ * h_; }

  /// Corner positions in counter-clockwise order (unnormalized start).
  std::array<Point2, 4> corners() const;

  /// True when `p` lies inside or on the rectangle, with a symmetric
  /// tolerance band of `tol` pixels around the boundary.
  bool contains(Point2 p, double tol = 0.0) const;

 private:
  OrientedBox(double cx, double cy, double w, double h, double theta)
      : cx_(cx), cy_(cy), w_(w), h_(h), theta_(theta) {}
  double cx_, cy_, w_, h_, theta_;
};

/// Quadrilateral with normalized vertex order: counter-clockwise (positive
/// signed area) starting from the vertex with the lowest y, ties broken by
/// lowest x. Construction rejects degenerate (near zero area) and
/// self-intersecting vertex orders.
class Quad {
 public:
  /// Unit square at the origin; a valid placeholder for containers.
  Quad() : v_{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}} {}

  static Quad from_points(const std::array<Point2, 4>& pts);

  const std::array<Point2, 4>& vertices() const { return v_; }
  double area() const;

 private:
  explicit Quad(const std::array<Point2, 4>& v) : v_(v) {}
  std::array<Point2, 4> v_;
};

/// Clipping intermediate. The intersection of two rectangles has at most 8
/// vertices; the capacity leaves room for epsilon duplicates mid-clip.
struct ConvexPolygon {
  static constexpr int kCapacity = 16;
  std::array<Point2, kCapacity> pts{};
  int count = 0;

  void push(Point2 p) { pts[static_cast<std::size_t>(count++)] = p; }
  bool empty() const { return count < 3; }
  /// Shoelace area; vertices are kept counter-clockwise so this is >= 0
  /// up to floating-point noise.
  double area() const;
};

/// Rectangle corners as a normalized Quad.
Quad box_to_quad(const OrientedBox& box);

/// Minimum-area enclosing rectangle of the quad, computed over rectangles
/// flush with a convex-hull edge (rotating calipers). Deterministic and
/// vertex-order independent.
OrientedBox quad_to_box(const Quad& quad);

/// Intersection polygon of two rectangles (Sutherland-Hodgman). Order of
/// arguments may perturb vertices at the 1e-9 level; use the *_area entry
/// points for exactly symmetric values.
ConvexPolygon rect_intersection(const OrientedBox& a, const OrientedBox& b);

/// Area of a ∩ b. Exactly symmetric in its arguments.
double rect_intersection_area(const OrientedBox& a, const OrientedBox& b);

/// Intersection-over-union of two rectangles, in [0, 1]. Exactly symmetric;
/// exactly 1 for identical boxes.
double rotated_iou(const OrientedBox& a, const OrientedBox& b);

/// Grid-counting IoU reference: samples resolution x resolution cell centers
/// over the joint bounding box of both rectangles and counts membership.
/// Converges to rotated_iou as resolution grows. resolution must be >= 64.
double raster_iou_oracle(const OrientedBox& a, const OrientedBox& b, int resolution);

/// Overlap area of two quads via convex-hull clipping. Exact for convex
/// quads; non-convex inputs are replaced by their hulls.
double quad_intersection_area(const Quad& a, const Quad& b);

/// IoU of two quads under quad_intersection_area.
double quad_iou(const Quad& a, const Quad& b);

}  // namespace obx
