#include <gtest/gtest.h>

#include <random>

#include "lscdr/corridors.hpp"
#include "oracles.hpp"

using namespace lscdr;

namespace {

ControlGrid ramp(int n, int M, double dt) {
  ControlGrid g(n, M, dt, 3);
  for (int m = 0; m < M; ++m)
    for (int l = 0; l <= n; ++l) g.at(m, l) = Vec2(m + static_cast<double>(l) / n, 0.5 * (m + static_cast<double>(l) / n));
  return g;
}

ObstacleSet random_obstacles(std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> c(-4.0, 4.0), side(0.2, 0.8);
  ObstacleSet o;
  for (int i = 0; i < count; ++i) {
    const Vec2 ctr(c(rng), c(rng));
    const double h = 0.5 * side(rng);
    o.boxes.push_back({ctr - Vec2(h, h), ctr + Vec2(h, h)});
  }
  return o;
}

}  // namespace

TEST(InitialTrajectory, FirstStepHoldsStart) {
  const ControlGrid g = initial_trajectory(Vec2(1.0, -2.0), 5, 10, 0.2);
  for (const auto& p : g.points) EXPECT_EQ(p, Vec2(1.0, -2.0));
  EXPECT_EQ(g.start_step, 0);
}

TEST(InitialTrajectory, ShiftsBySegmentAndHoldsEnd) {
  const ControlGrid prev = ramp(5, 4, 0.2);
  const ControlGrid g = initial_trajectory(prev, 4);
  EXPECT_EQ(g.start_step, 4);
  for (int m = 0; m < 3; ++m)
    for (int l = 0; l <= 5; ++l) EXPECT_EQ(g.at(m, l), prev.at(m + 1, l));
  for (int l = 0; l <= 5; ++l) EXPECT_EQ(g.at(3, l), prev.last_point());
  // Same physical curve on the overlapping interval.
  for (double t = 0.8; t <= 1.4; t += 0.05) EXPECT_LE((evaluate(g, t) - evaluate(prev, t)).norm(), 1e-12);
}

TEST(ExpandBox, ContainsSeedAndKeepsClearance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4.5, 4.5);
  const Box ws{Vec2(-5, -5), Vec2(5, 5)};
  const double r = 0.15;
  int tested = 0;
  while (tested < 200) {
    const ObstacleSet obs = random_obstacles(rng, 25);
    const Vec2 a(u(rng), u(rng));
    const Vec2 b = a + Vec2(0.3 * u(rng) / 4.5, 0.3 * u(rng) / 4.5);
    const Vec2 pts[2] = {a, b};
    const Box seed = Box::around(pts);
    if (!box_free(obs, seed, r) || !ws.contains(seed)) continue;
    ++tested;
    const Box out = expand_box(seed, obs, r, ws, 0.5);
    EXPECT_TRUE(out.contains(seed, 1e-12));
    EXPECT_TRUE(ws.contains(out, 1e-12));
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j) {
        const Vec2 p = out.lo + (out.hi - out.lo).cwiseProduct(Vec2(i / 20.0, j / 20.0));
        ASSERT_TRUE(point_free(obs, p, r)) << "sample escapes the free space";
      }
  }
}

TEST(ExpandBox, StopsAtObstacleWithClearance) {
  const ObstacleSet obs{{Box{Vec2(1.0, -1.0), Vec2(2.0, 1.0)}}};
  const Box out = expand_box(Box{Vec2(0, 0), Vec2(0, 0)}, obs, 0.15, Box{Vec2(-3, -3), Vec2(3, 3)}, 0.5);
  EXPECT_NEAR(out.hi.x(), 0.85, 1e-8);
  EXPECT_LE(out.hi.x(), 0.85);
  EXPECT_NEAR(out.lo.x(), -3.0, 1e-12);
}

TEST(ExpandBox, RejectsBlockedSeed) {
  const ObstacleSet obs{{Box{Vec2(0, 0), Vec2(1, 1)}}};
  EXPECT_THROW(expand_box(Box{Vec2(1.05, 0.5), Vec2(1.05, 0.5)}, obs, 0.15, Box{Vec2(-3, -3), Vec2(3, 3)}, 0.5),
               InvariantError);
}

TEST(Sfc, LastBoxHoldsSegmentToSubgoal) {
  const GridWorld world(Vec2(-2, -2), 0.5, 9, 9, {}, 0.15);
  const ObstacleSet obs{{Box{Vec2(0.3, 0.3), Vec2(1.0, 1.0)}}};
  SfcInputs in;
  in.k = 0;
  in.start = Vec2(0, 0);
  in.waypoint = Vec2(-0.5, 0);
  const auto first = build_sfc(in, {}, 10, obs, world, 0.15);
  ASSERT_EQ(first.size(), 10u);
  for (const auto& b : first) {
    EXPECT_TRUE(b.contains(in.start));
    EXPECT_TRUE(b.contains(in.waypoint));
  }
  // The three-point hull (0,0), (0.5,0), (0.5,0.5) is blocked by the obstacle
  // near (0.5, 0.5), so the last box falls back to the final point and subgoal.
  in.k = 1;
  in.init_final = Vec2(0, 0);
  in.prev_subgoal = Vec2(0.5, 0.0);
  in.waypoint = Vec2(0.5, 0.5);
  const auto next = build_sfc(in, first, 10, obs, world, 0.15);
  for (int m = 0; m < 9; ++m) EXPECT_EQ(next[m].lo, first[m + 1].lo);
  EXPECT_TRUE(next[9].contains(in.init_final));
  EXPECT_TRUE(next[9].contains(in.prev_subgoal));
  EXPECT_TRUE(box_free(obs, next[9], 0.15));
}

TEST(ClosestPoints, MatchesTernarySearch) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const Vec2 a0(u(rng), u(rng)), a1(u(rng), u(rng)), b0(u(rng), u(rng)), b1(u(rng), u(rng));
    const auto cp = closest_points_between_segments(a0, a1, b0, b1);
    const double ref = oracle::segment_distance(a0, a1, b0, b1);
    EXPECT_NEAR(cp.distance, ref, 1e-9);
    EXPECT_NEAR((cp.on_first - cp.on_second).norm(), cp.distance, 1e-12);
    EXPECT_LE((a0 + cp.s * (a1 - a0) - cp.on_first).norm(), 1e-12);
    EXPECT_LE((b0 + cp.t * (b1 - b0) - cp.on_second).norm(), 1e-12);
  }
}

TEST(ClosestPoints, ParallelTieTakesSmallestParameters) {
  const auto cp = closest_points_between_segments(Vec2(0, 0), Vec2(2, 0), Vec2(1, 1), Vec2(3, 1));
  EXPECT_NEAR(cp.distance, 1.0, 1e-12);
  EXPECT_NEAR(cp.s, 0.5, 1e-12);
  EXPECT_NEAR(cp.t, 0.0, 1e-12);
}

TEST(Gjk, ClosestPointMatchesHullOracle) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0), shift(-3.0, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const Vec2 off(shift(rng), shift(rng));
    std::vector<Vec2> pts(6);
    for (auto& p : pts) p = off + Vec2(u(rng), u(rng));
    const Vec2 v = closest_point_to_origin(pts);
    EXPECT_NEAR(v.norm(), oracle::hull_distance_to_origin(pts), 1e-9);
  }
}

TEST(Lsc, PairSidesSeparateByTwoRadii) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0), coin(0.0, 1.0);
  const double r = 0.15;
  int pairs = 0;
  while (pairs < 200) {
    ControlGrid gi = ControlGrid::constant(Vec2::Zero(), 5, 4, 0.2, 2);
    ControlGrid gj = gi;
    const Vec2 off(3.0 * u(rng), 3.0 * u(rng));
    for (auto& p : gi.points) p = Vec2(u(rng), u(rng)) * 0.4;
    for (auto& p : gj.points) p = off + Vec2(u(rng), u(rng)) * 0.4;
    const Vec2 si = gi.last_point() + Vec2(u(rng), u(rng)) * 0.3;
    const Vec2 sj = gj.last_point() + Vec2(u(rng), u(rng)) * 0.3;
    LscPair pr;
    try {
      pr = build_lsc(0, 1, gi, gj, si, sj, r, 2);
    } catch (const InvariantError&) {
      continue;  // too close to separate
    }
    ++pairs;
    // Random points on each side are always 2r apart.
    for (int m = 0; m < 4; ++m)
      for (int l = 0; l <= 5; ++l) {
        const HalfPlane& hi = pr.side(0, m, l, 5);
        const HalfPlane& hj = pr.side(1, m, l, 5);
        EXPECT_NEAR(hi.normal.dot(hj.normal), -1.0, 1e-12);
        for (int s = 0; s < 20; ++s) {
          const Vec2 t(-hi.normal.y(), hi.normal.x());
          const Vec2 xi = hi.normal * (hi.offset + 2.0 * coin(rng)) + t * (5.0 * u(rng));
          const Vec2 xj = hj.normal * (hj.offset + 2.0 * coin(rng)) + t * (5.0 * u(rng));
          ASSERT_TRUE(hi.contains(xi, 1e-12));
          ASSERT_TRUE(hj.contains(xj, 1e-12));
          EXPECT_GE((xi - xj).norm(), 2.0 * r - 1e-9);
        }
        // The initial trajectories themselves are feasible (on the last
        // segment only its held final point is guaranteed).
        if (m < 3 || l == 5) {
          EXPECT_TRUE(hi.contains(gi.at(m, l), 1e-9));
          EXPECT_TRUE(hj.contains(gj.at(m, l), 1e-9));
        }
      }
    // The last segment keeps the segment from the final point to the subgoal.
    for (double s = 0.0; s <= 1.0; s += 0.1) {
      EXPECT_TRUE(pr.side(0, 3, 5, 5).contains(gi.last_point() + s * (si - gi.last_point()), 1e-9));
      EXPECT_TRUE(pr.side(1, 3, 5, 5).contains(gj.last_point() + s * (sj - gj.last_point()), 1e-9));
    }
  }
}

TEST(Lsc, FirstStepUsesHullForAllSegments) {
  const ControlGrid gi = ControlGrid::constant(Vec2(0, 0), 5, 3, 0.2, 0);
  const ControlGrid gj = ControlGrid::constant(Vec2(1, 0), 5, 3, 0.2, 0);
  const LscPair pr = build_lsc(0, 1, gi, gj, Vec2(5, 5), Vec2(-5, -5), 0.15, 0);
  for (int m = 0; m < 3; ++m) {
    EXPECT_NEAR(pr.normals[m].x(), -1.0, 1e-12);
    EXPECT_NEAR(pr.side(0, m, 0, 5).offset, -0.5 + 0.15, 1e-12);
  }
}

TEST(Lsc, RejectsOverlappingAgents) {
  const ControlGrid gi = ControlGrid::constant(Vec2(0, 0), 5, 3, 0.2, 0);
  const ControlGrid gj = ControlGrid::constant(Vec2(0.2, 0), 5, 3, 0.2, 0);
  EXPECT_THROW(build_lsc(0, 1, gi, gj, Vec2(0, 0), Vec2(0.2, 0), 0.15, 0), InvariantError);
}
