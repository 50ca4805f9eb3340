#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "lscdr/common.hpp"

namespace lscdr {

/// Axis-aligned rectangle [lo, hi]. Degenerate (zero-width) boxes are allowed
/// for seeds; obstacles must have positive area.
struct Box {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();

  static Box around(std::span<const Vec2> pts) {
    Box b{pts.front(), pts.front()};
    for (const auto& p : pts) {
      b.lo = b.lo.cwiseMin(p);
      b.hi = b.hi.cwiseMax(p);
    }
    return b;
  }

  double area() const { return (hi - lo).prod(); }
  Vec2 center() const { return 0.5 * (lo + hi); }
  bool contains(const Vec2& p, double eps = 0.0) const {
    return p.x() >= lo.x() - eps && p.x() <= hi.x() + eps && p.y() >= lo.y() - eps &&
           p.y() <= hi.y() + eps;
  }
  bool contains(const Box& o, double eps = 0.0) const {
    return contains(o.lo, eps) && contains(o.hi, eps);
  }
  bool operator==(const Box&) const = default;
};

/// Per-axis gap between two boxes (0 where they overlap).
inline Vec2 box_gap(const Box& a, const Box& b) {
  return Vec2(std::max({0.0, b.lo.x() - a.hi.x(), a.lo.x() - b.hi.x()}),
              std::max({0.0, b.lo.y() - a.hi.y(), a.lo.y() - b.hi.y()}));
}

inline double box_distance(const Box& a, const Box& b) { return box_gap(a, b).norm(); }

/// Signed distance from p to a box: positive outside, minus the depth inside.
inline double signed_distance(const Box& b, const Vec2& p) {
  const Vec2 d = (p - b.center()).cwiseAbs() - 0.5 * (b.hi - b.lo);
  const Vec2 outside = d.cwiseMax(0.0);
  return outside.norm() + std::min(0.0, d.maxCoeff());
}

/// Feasible set {x : normal . x >= offset}.
struct HalfPlane {
  Vec2 normal = Vec2::UnitX();
  double offset = 0.0;

  double margin(const Vec2& x) const { return normal.dot(x) - offset; }
  bool contains(const Vec2& x, double eps = 0.0) const { return margin(x) >= -eps; }
};

struct ConvexPolytope {
  std::vector<HalfPlane> halfplanes;

  static ConvexPolytope from_box(const Box& b) {
    return {{{Vec2(1, 0), b.lo.x()},
             {Vec2(-1, 0), -b.hi.x()},
             {Vec2(0, 1), b.lo.y()},
             {Vec2(0, -1), -b.hi.y()}}};
  }
  bool contains(const Vec2& x, double eps = 0.0) const {
    return std::all_of(halfplanes.begin(), halfplanes.end(),
                       [&](const HalfPlane& h) { return h.contains(x, eps); });
  }
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Closest point of segment [a, b] to p, with its parameter in [0, 1].
inline std::pair<Vec2, double> closest_on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return {a, 0.0};
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return {a + t * ab, t};
}

struct SegmentClosestPoints {
  Vec2 on_first;
  Vec2 on_second;
  double s = 0.0;  // parameter on the first segment
  double t = 0.0;  // parameter on the second
  double distance = 0.0;
};

inline bool segments_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  const Vec2 da = a1 - a0, db = b1 - b0;
  const double d1 = cross(db, a0 - b0), d2 = cross(db, a1 - b0);
  const double d3 = cross(da, b0 - a0), d4 = cross(da, b1 - a0);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return r.x() >= std::min(p.x(), q.x()) && r.x() <= std::max(p.x(), q.x()) &&
           r.y() >= std::min(p.y(), q.y()) && r.y() <= std::max(p.y(), q.y());
  };
  if (d1 == 0 && on(b0, b1, a0)) return true;
  if (d2 == 0 && on(b0, b1, a1)) return true;
  if (d3 == 0 && on(a0, a1, b0)) return true;
  if (d4 == 0 && on(a0, a1, b1)) return true;
  return false;
}

/// Closest points between segments [a0, a1] and [b0, b1] in the plane.
/// For non-intersecting planar segments the minimum is attained with an
/// endpoint on one of them, so four endpoint projections cover every case.
/// Ties (parallel segments) resolve to the smallest s, then the smallest t.
inline SegmentClosestPoints closest_points_between_segments(const Vec2& a0, const Vec2& a1,
                                                            const Vec2& b0, const Vec2& b1) {
  if (segments_intersect(a0, a1, b0, b1)) {
    // Intersection point (or overlap start); distance zero.
    SegmentClosestPoints best;
    best.distance = kInf;
    const Vec2 da = a1 - a0, db = b1 - b0;
    const double den = cross(da, db);
    if (std::abs(den) > 0.0) {
      const double s = std::clamp(cross(b0 - a0, db) / den, 0.0, 1.0);
      const double t = std::clamp(cross(b0 - a0, da) / den, 0.0, 1.0);
      return {a0 + s * da, b0 + t * db, s, t, 0.0};
    }
    // Collinear overlap: fall through to the endpoint enumeration.
  }
  std::array<SegmentClosestPoints, 4> cand;
  {
    auto [q, t] = closest_on_segment(b0, b1, a0);
    cand[0] = {a0, q, 0.0, t, (a0 - q).norm()};
  }
  {
    auto [q, t] = closest_on_segment(b0, b1, a1);
    cand[1] = {a1, q, 1.0, t, (a1 - q).norm()};
  }
  {
    auto [q, s] = closest_on_segment(a0, a1, b0);
    cand[2] = {q, b0, s, 0.0, (b0 - q).norm()};
  }
  {
    auto [q, s] = closest_on_segment(a0, a1, b1);
    cand[3] = {q, b1, s, 1.0, (b1 - q).norm()};
  }
  const double dmin =
      std::min_element(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
        return x.distance < y.distance;
      })->distance;
  const double tie = 1e-12 * (1.0 + dmin);
  const SegmentClosestPoints* best = nullptr;
  for (const auto& c : cand) {
    if (c.distance > dmin + tie) continue;
    if (!best || c.s < best->s || (c.s == best->s && c.t < best->t)) best = &c;
  }
  return *best;
}

/// Closest point to the origin of the convex hull of pts (GJK in the plane:
/// support-point iteration over a simplex of at most three vertices).
inline Vec2 closest_point_to_origin(std::span<const Vec2> pts) {
  auto support = [&](const Vec2& dir) {
    std::size_t best = 0;
    double val = pts[0].dot(dir);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double v = pts[i].dot(dir);
      if (v < val) {
        val = v;
        best = i;
      }
    }
    return pts[best];
  };

  // Simplex of up to 3 points; v is the closest point of its hull to the origin.
  std::vector<Vec2> simplex{pts[0]};
  Vec2 v = pts[0];
  for (int iter = 0; iter < 64; ++iter) {
    if (v.squaredNorm() == 0.0) return v;
    const Vec2 w = support(v);  // minimizes w . v
    // Termination: no point improves on v along -v.
    if (v.dot(v) - w.dot(v) <= 1e-14 * std::max(1.0, v.squaredNorm())) return v;
    simplex.push_back(w);

    // Reduce simplex to the sub-simplex containing the closest point.
    if (simplex.size() == 2) {
      auto [q, t] = closest_on_segment(simplex[0], simplex[1], Vec2::Zero());
      if (t <= 0.0) simplex = {simplex[0]};
      else if (t >= 1.0) simplex = {simplex[1]};
      v = q;
    } else {
      // Triangle: origin inside -> distance zero.
      const Vec2 &a = simplex[0], &b = simplex[1], &c = simplex[2];
      const double s1 = cross(b - a, -a), s2 = cross(c - b, -b), s3 = cross(a - c, -c);
      const bool inside = (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
      if (inside) return Vec2::Zero();
      Vec2 best = a;
      std::vector<Vec2> keep{a};
      double bd = kInf;
      const std::array<std::pair<int, int>, 3> edges{{{0, 1}, {1, 2}, {2, 0}}};
      for (auto [i, j] : edges) {
        auto [q, t] = closest_on_segment(simplex[i], simplex[j], Vec2::Zero());
        const double d = q.squaredNorm();
        if (d < bd) {
          bd = d;
          best = q;
          if (t <= 0.0) keep = {simplex[i]};
          else if (t >= 1.0) keep = {simplex[j]};
          else keep = {simplex[i], simplex[j]};
        }
      }
      simplex = std::move(keep);
      v = best;
    }
  }
  return v;
}

}  // namespace lscdr
