#include <gtest/gtest.h>

#include <random>

#include "lscdr/mapp.hpp"
#include "oracles.hpp"

using namespace lscdr;

namespace {

struct Instance {
  GridWorld world;
  std::vector<VertexId> starts, goals;
};

// Random 8x8 grid with distinct free starts and goals, all goals reachable.
Instance random_instance(std::mt19937_64& rng, int agents, double block_fraction = 0.15) {
  for (;;) {
    Instance in;
    in.world = oracle::random_grid(rng, 8, 8, block_fraction);
    std::vector<VertexId> free;
    for (VertexId v = 0; v < in.world.size(); ++v)
      if (!in.world.blocked(v)) free.push_back(v);
    if (static_cast<int>(free.size()) < 2 * agents) continue;
    std::shuffle(free.begin(), free.end(), rng);
    in.starts.assign(free.begin(), free.begin() + agents);
    in.goals.assign(free.begin() + agents, free.begin() + 2 * agents);
    bool ok = true;
    for (int a = 0; a < agents; ++a) ok = ok && in.world.bfs(in.starts[a])[in.goals[a]] >= 0;
    if (ok) return in;
  }
}

}  // namespace

TEST(Pibt, RandomJointMovesAreConflictFree) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    Instance in = random_instance(rng, 6);
    std::vector<std::vector<int>> tables;
    for (VertexId g : in.goals) tables.push_back(in.world.bfs(g));
    std::vector<const std::vector<int>*> ptr;
    for (const auto& t : tables) ptr.push_back(&t);
    std::uniform_int_distribution<long> pr(0, 3);
    std::vector<VertexId> cur = in.starts;
    for (int step = 0; step < 20; ++step) {
      std::vector<long> prio(6);
      for (auto& p : prio) p = pr(rng);
      const auto next = pibt_step(in.world, cur, ptr, prio);
      ASSERT_EQ(oracle::pibt_conflicts(in.world, cur, next), 0) << "trial " << trial;
      cur = next;
    }
  }
}

// Every agent visits its goal at some step (they need not all sit there at
// once). Dead ends can trap PIBT, so this is only claimed without obstacles.
TEST(Pibt, ReachesGoalsOnOpenGrid) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Instance in = random_instance(rng, 6, 0.0);
    DistanceTable dist(in.world);
    std::vector<const std::vector<int>*> ptr;
    for (VertexId g : in.goals) ptr.push_back(&dist.to(g));
    std::vector<VertexId> cur = in.starts;
    std::vector<long> since(6, 0);
    std::vector<char> reached(6, 0);
    for (int step = 0; step < in.world.size() * 6; ++step) {
      cur = pibt_step(in.world, cur, ptr, since);
      for (int a = 0; a < 6; ++a) {
        since[a] = cur[a] == in.goals[a] ? 0 : since[a] + 1;
        reached[a] = reached[a] || cur[a] == in.goals[a];
      }
    }
    EXPECT_EQ(std::count(reached.begin(), reached.end(), 1), 6) << "trial " << trial;
  }
}

TEST(Pibt, HigherPriorityWinsContestedVertex) {
  // Corridor 0-1-2 with agents at both ends wanting the middle.
  GridWorld w(Vec2::Zero(), 0.5, 3, 1, {}, 0.15);
  const std::vector<int> to_right = w.bfs(2), to_left = w.bfs(0);
  std::vector<const std::vector<int>*> ptr{&to_right, &to_left};
  auto next = pibt_step(w, {0, 2}, ptr, {5, 1});
  EXPECT_EQ(next[0], 1);
  EXPECT_EQ(next[1], 2);
  next = pibt_step(w, {0, 2}, ptr, {1, 5});
  EXPECT_EQ(next[1], 1);
  EXPECT_EQ(next[0], 0);
  // Equal priority: lower id wins.
  next = pibt_step(w, {0, 2}, ptr, {3, 3});
  EXPECT_EQ(next[0], 1);
}

TEST(Pibt, PushesLowerPriorityAgentAside) {
  // 3x2 grid. Agent 0 at (0,0) heads to (2,0); agent 1 sits on (1,0) at its goal.
  GridWorld w(Vec2::Zero(), 0.5, 3, 2, {}, 0.15);
  const std::vector<int> g0 = w.bfs(2), g1 = w.bfs(1);
  std::vector<const std::vector<int>*> ptr{&g0, &g1};
  const auto next = pibt_step(w, {0, 1}, ptr, {4, 0});
  EXPECT_EQ(next[0], 1);
  EXPECT_NE(next[1], 1);
  EXPECT_NE(next[1], 0);  // no swap
  EXPECT_EQ(oracle::pibt_conflicts(w, {0, 1}, next), 0);
}

TEST(Pibt, AgentAtGoalStays) {
  GridWorld w(Vec2::Zero(), 0.5, 4, 4, {}, 0.15);
  const std::vector<int> g = w.bfs(5);
  std::vector<const std::vector<int>*> ptr{&g};
  EXPECT_EQ(pibt_step(w, {5}, ptr, {0})[0], 5);
}

namespace {

AgentPlanState at_rest(const GridWorld& w, int id, VertexId v, VertexId goal) {
  AgentPlanState s;
  s.id = id;
  s.start = v;
  s.goal = goal;
  s.waypoint = v;
  s.subgoal = w.position(v);
  s.trajectory = ControlGrid::constant(w.position(v), 5, 10, 0.2, 0);
  return s;
}

}  // namespace

TEST(DecentralizedMapp, WaitsForSubgoalToCatchUp) {
  GridWorld w(Vec2::Zero(), 0.5, 6, 1, {}, 0.15);
  DistanceTable dist(w);
  std::vector<AgentPlanState> st{at_rest(w, 0, 0, 5)};
  ConnectedGroup g{{0}, 0};
  EXPECT_EQ(decentralized_mapp(g, st, 3, kInf, dist)[0], 1);
  st[0].subgoal = Vec2(0.2, 0.0);  // still short of the waypoint
  EXPECT_EQ(decentralized_mapp(g, st, 3, kInf, dist)[0], 0);
  // At k = 0 the waypoint always follows the plan.
  EXPECT_EQ(decentralized_mapp(g, st, 0, kInf, dist)[0], 1);
}

TEST(DecentralizedMapp, RespectsCommunicationDistance) {
  GridWorld w(Vec2::Zero(), 0.5, 12, 1, {}, 0.15);
  DistanceTable dist(w);
  auto s = at_rest(w, 0, 2, 11);
  // Previous trajectory still reaches back to x = 0: the next vertex (1.5)
  // is 1.5 away in L-inf, not below r_c / 2 = 1.
  for (int l = 0; l <= 5; ++l) s.trajectory.at(0, l) = Vec2(0.0, 0.0);
  std::vector<AgentPlanState> st{s};
  ConnectedGroup g{{0}, 0};
  EXPECT_EQ(decentralized_mapp(g, st, 4, 2.0, dist)[0], 2);
  EXPECT_EQ(decentralized_mapp(g, st, 4, 4.0, dist)[0], 3);
}

TEST(DecentralizedMapp, RevertsDuplicatedWaypoint) {
  // Agent 1 waits at its waypoint 2 with the subgoal behind it, so it cannot
  // advance; PIBT plans it onward and agent 0 into vertex 2, which would
  // duplicate agent 1's kept waypoint.
  GridWorld w(Vec2::Zero(), 0.5, 6, 1, {}, 0.15);
  DistanceTable dist(w);
  auto a = at_rest(w, 0, 1, 5);
  auto b = at_rest(w, 1, 2, 4);
  b.subgoal = Vec2(0.8, 0.0);
  std::vector<AgentPlanState> st{a, b};
  ConnectedGroup g{{0, 1}, 0};
  const auto wps = decentralized_mapp(g, st, 5, kInf, dist);
  EXPECT_EQ(wps[1], 2);
  EXPECT_EQ(wps[0], 1);
}
