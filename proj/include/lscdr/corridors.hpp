#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lscdr/bernstein.hpp"
#include "lscdr/geometry.hpp"
#include "lscdr/world.hpp"

namespace lscdr {

/// Start trajectory for step k: the start point held still at k = 0, otherwise
/// the previous plan shifted left by one segment with its final point held.
inline ControlGrid initial_trajectory(const ControlGrid& prev, long k) {
  ControlGrid out(prev.degree, prev.segments, prev.segment_duration, k);
  if (k == 0) {
    std::fill(out.points.begin(), out.points.end(), prev.first_point());
    return out;
  }
  const int per = prev.per_segment();
  std::copy(prev.points.begin() + per, prev.points.end(), out.points.begin());
  std::fill(out.points.end() - per, out.points.end(), prev.last_point());
  return out;
}

inline ControlGrid initial_trajectory(const Vec2& start, int n, int M, double dt) {
  return ControlGrid::constant(start, n, M, dt, 0);
}

/// Grows an axis-aligned box around `seed` while every point keeps distance
/// `clearance` from the obstacles. Faces advance in the order -x, +x, -y, +y by
/// at most `step` per round, each by the largest admissible amount, until no
/// face can move. The result stays inside `workspace`.
inline Box expand_box(const Box& seed, const ObstacleSet& obstacles, double clearance,
                      const Box& workspace, double step) {
  if (!box_free(obstacles, seed, clearance - tol::kGeometry))
    throw InvariantError("corridor seed is not obstacle free");
  Box b{seed.lo.cwiseMax(workspace.lo), seed.hi.cwiseMin(workspace.hi)};
  b.lo = b.lo.cwiseMin(seed.lo);
  b.hi = b.hi.cwiseMax(seed.hi);
  constexpr double kShrink = 1e-9;  // keeps the clearance strictly satisfied after rounding
  const double r2 = clearance * clearance;

  // Largest e in [0, step] such that moving face `f` outward by e keeps clearance.
  auto reach = [&](int f) {
    const int axis = f / 2, other = 1 - axis;
    const bool lower = (f % 2) == 0;
    double e = lower ? b.lo[axis] - workspace.lo[axis] : workspace.hi[axis] - b.hi[axis];
    e = std::min(e, step);
    for (const auto& o : obstacles.boxes) {
      const double gap_other =
          std::max({0.0, o.lo[other] - b.hi[other], b.lo[other] - o.hi[other]});
      if (gap_other >= clearance) continue;
      const double need = std::sqrt(r2 - gap_other * gap_other);
      double room;
      if (lower) {
        if (o.hi[axis] > b.lo[axis]) continue;  // not on this side
        room = b.lo[axis] - o.hi[axis] - need;
      } else {
        if (o.lo[axis] < b.hi[axis]) continue;
        room = o.lo[axis] - b.hi[axis] - need;
      }
      e = std::min(e, room - kShrink);
    }
    return std::max(e, 0.0);
  };

  for (bool moved = true; moved;) {
    moved = false;
    for (int f : {0, 1, 2, 3}) {  // -x, +x, -y, +y
      const double e = reach(f);
      if (e <= 1e-12) continue;
      const int axis = f / 2;
      if (f % 2 == 0) b.lo[axis] -= e;
      else b.hi[axis] += e;
      moved = true;
    }
  }
  return b;
}

struct SfcInputs {
  long k = 0;
  Vec2 start = Vec2::Zero();        // s, used at k = 0
  Vec2 init_final = Vec2::Zero();   // final control point of the initial trajectory
  Vec2 prev_subgoal = Vec2::Zero();
  Vec2 waypoint = Vec2::Zero();
};

/// Corridor boxes for all M segments of one agent. `prev` holds the previous
/// step's boxes (ignored at k = 0). The last box is seeded with the bounding box
/// of {final point, previous subgoal, waypoint} when that is free, otherwise
/// with the bounding box of {final point, previous subgoal}.
inline std::vector<Box> build_sfc(const SfcInputs& in, const std::vector<Box>& prev, int M,
                                  const ObstacleSet& obstacles, const GridWorld& world,
                                  double radius) {
  const Box ws = world.workspace();
  const double step = world.grid_size();
  std::vector<Box> out(M);
  if (in.k == 0) {
    const Vec2 seed_pts[2] = {in.start, in.waypoint};
    const Box b = expand_box(Box::around(seed_pts), obstacles, radius, ws, step);
    std::fill(out.begin(), out.end(), b);
    return out;
  }
  if (static_cast<int>(prev.size()) != M) throw InvariantError("previous corridor count mismatch");
  std::copy(prev.begin() + 1, prev.end(), out.begin());
  const Vec2 three[3] = {in.init_final, in.prev_subgoal, in.waypoint};
  Box seed = Box::around(three);
  if (!box_free(obstacles, seed, radius)) {
    const Vec2 two[2] = {in.init_final, in.prev_subgoal};
    seed = Box::around(two);
  }
  out[M - 1] = expand_box(seed, obstacles, radius, ws, step);
  return out;
}

/// Separating constraints for an unordered agent pair (i < j). Entry
/// m * (n + 1) + l applies to control point l of segment m.
struct LscPair {
  int i = 0;
  int j = 0;
  std::vector<Vec2> normals;       // n^{i,j}_m per segment, unit length
  std::vector<HalfPlane> for_i;    // normal +n
  std::vector<HalfPlane> for_j;    // normal -n
  const HalfPlane& side(int agent, int m, int l, int n) const {
    const std::size_t idx = static_cast<std::size_t>(m) * (n + 1) + l;
    return agent == i ? for_i[idx] : for_j[idx];
  }
};

/// Linear safe corridors between agents i and j from their initial trajectories.
/// Standard segments use the normal from the origin to the convex hull of the
/// relative control points; at k > 0 the last segment uses the closest points of
/// the segments <final point, previous subgoal> of both agents.
inline LscPair build_lsc(int i, int j, const ControlGrid& init_i, const ControlGrid& init_j,
                         const Vec2& prev_subgoal_i, const Vec2& prev_subgoal_j, double r, long k) {
  const int M = init_i.segments, n = init_i.degree;
  LscPair out;
  out.i = i;
  out.j = j;
  out.normals.resize(M);
  out.for_i.resize(static_cast<std::size_t>(M) * (n + 1));
  out.for_j.resize(out.for_i.size());
  Vec2 rel[16];
  for (int m = 0; m < M; ++m) {
    if (k > 0 && m == M - 1) {
      const auto cp = closest_points_between_segments(init_i.last_point(), prev_subgoal_i,
                                                      init_j.last_point(), prev_subgoal_j);
      if (cp.distance < 2.0 * r - tol::kGeometry)
        throw InvariantError("last-segment corridors of agents " + std::to_string(i) + " and " +
                             std::to_string(j) + " closer than 2r");
      const Vec2 nrm = (cp.on_first - cp.on_second) / cp.distance;
      const double margin = r + 0.5 * cp.distance;
      out.normals[m] = nrm;
      for (int l = 0; l <= n; ++l) {
        out.for_i[m * (n + 1) + l] = {nrm, nrm.dot(cp.on_second) + margin};
        out.for_j[m * (n + 1) + l] = {-nrm, -nrm.dot(cp.on_first) + margin};
      }
      continue;
    }
    for (int l = 0; l <= n; ++l) rel[l] = init_i.at(m, l) - init_j.at(m, l);
    const Vec2 v = closest_point_to_origin(std::span<const Vec2>(rel, n + 1));
    const double dist = v.norm();
    if (dist < 2.0 * r - tol::kGeometry)
      throw InvariantError("relative hull of agents " + std::to_string(i) + " and " +
                           std::to_string(j) + " intersects the 2r ball");
    const Vec2 nrm = v / dist;
    out.normals[m] = nrm;
    for (int l = 0; l <= n; ++l) {
      const double mid = 0.5 * (init_i.at(m, l) + init_j.at(m, l)).dot(nrm);
      out.for_i[m * (n + 1) + l] = {nrm, mid + r};
      out.for_j[m * (n + 1) + l] = {-nrm, -mid + r};
    }
  }
  return out;
}

}  // namespace lscdr
