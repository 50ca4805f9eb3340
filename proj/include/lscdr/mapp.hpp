#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "lscdr/bernstein.hpp"
#include "lscdr/network.hpp"
#include "lscdr/world.hpp"

namespace lscdr {

/// Lazily filled BFS distance-to-goal tables. Not thread-safe: fill all goals
/// up front with prefetch() before sharing across threads.
class DistanceTable {
 public:
  explicit DistanceTable(const GridWorld& world) : world_(&world) {}

  void prefetch(VertexId goal) { (void)to(goal); }
  const std::vector<int>& to(VertexId goal) {
    auto it = cache_.find(goal);
    if (it == cache_.end()) it = cache_.emplace(goal, world_->bfs(goal)).first;
    return it->second;
  }
  const GridWorld& world() const { return *world_; }

 private:
  const GridWorld* world_;
  std::map<VertexId, std::vector<int>> cache_;
};

struct AgentPlanState {
  int id = 0;
  VertexId start = 0;
  VertexId goal = 0;
  VertexId waypoint = 0;
  Vec2 subgoal = Vec2::Zero();
  ControlGrid trajectory;  // committed at the previous step
  long since_goal = 0;     // PIBT priority: steps since the waypoint was last the goal
};

/// One PIBT step. Agent a has higher priority than b iff priority[a] > priority[b],
/// or they are equal and a < b. Returns the next vertex of every agent.
inline std::vector<VertexId> pibt_step(const GridWorld& world, const std::vector<VertexId>& starts,
                                       const std::vector<const std::vector<int>*>& dist_to_goal,
                                       const std::vector<long>& priority) {
  const int n = static_cast<int>(starts.size());
  constexpr int kNone = -1;
  std::map<VertexId, int> now, next;
  for (int a = 0; a < n; ++a) {
    if (now.count(starts[a])) throw ConfigError("PIBT starts must be distinct");
    now[starts[a]] = a;
  }
  std::vector<VertexId> out(n, kNone);

  auto dist = [&](int a, VertexId v) {
    const int d = (*dist_to_goal[a])[v];
    return d < 0 ? world.size() + 1 : d;
  };

  std::function<bool(int, int)> plan = [&](int a, int parent) -> bool {
    std::vector<VertexId> cand = world.neighbors(starts[a]);
    cand.push_back(starts[a]);
    std::sort(cand.begin(), cand.end(), [&](VertexId u, VertexId v) {
      const int du = dist(a, u), dv = dist(a, v);
      if (du != dv) return du < dv;
      const bool ou = now.count(u) && now.at(u) != a, ov = now.count(v) && now.at(v) != a;
      if (ou != ov) return !ou;
      return u < v;
    });
    for (VertexId u : cand) {
      if (next.count(u)) continue;
      if (parent != kNone && u == starts[parent]) continue;  // no swaps
      next[u] = a;
      out[a] = u;
      auto it = now.find(u);
      if (it != now.end() && it->second != a && out[it->second] == kNone)
        if (!plan(it->second, a)) continue;
      return true;
    }
    next[starts[a]] = a;
    out[a] = starts[a];
    return false;
  };

  std::vector<int> order(n);
  for (int a = 0; a < n; ++a) order[a] = a;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return priority[a] > priority[b]; });
  for (int a : order)
    if (out[a] == kNone) plan(a, kNone);
  return out;
}

/// Waypoint update for one connected group. `states` holds every agent; only
/// members of `group` are read. Returns the new waypoint per member, in member order.
///
/// The distance condition checks all segment joints of the previous trajectory
/// and its final point, so the shifted initial trajectory keeps satisfying the
/// waypoint-range constraint of the next trajectory optimization.
inline std::vector<VertexId> decentralized_mapp(const ConnectedGroup& group,
                                                std::span<const AgentPlanState> states, long k,
                                                double r_c, DistanceTable& dist) {
  const GridWorld& world = dist.world();
  const int n = static_cast<int>(group.members.size());
  std::vector<VertexId> prev(n), starts(n);
  std::vector<const std::vector<int>*> tables(n);
  std::vector<long> priority(n);
  for (int q = 0; q < n; ++q) {
    const auto& s = states[group.members[q]];
    prev[q] = k == 0 ? s.start : s.waypoint;
    starts[q] = prev[q];
    tables[q] = &dist.to(s.goal);
    priority[q] = s.since_goal;
  }
  const std::vector<VertexId> pi = pibt_step(world, starts, tables, priority);

  std::vector<VertexId> w(n);
  std::vector<char> advanced(n, 0);
  for (int q = 0; q < n; ++q) {
    const auto& s = states[group.members[q]];
    bool ok = true;
    if (k > 0) {
      ok = s.subgoal == world.position(s.waypoint);
      if (ok && !std::isinf(r_c)) {
        const Vec2 wp = world.position(pi[q]);
        const ControlGrid& c = s.trajectory;
        for (int m = 0; m < c.segments && ok; ++m) ok = linf(wp - c.at(m, 0)) < 0.5 * r_c;
        if (ok) ok = linf(wp - c.last_point()) < 0.5 * r_c;
      }
    }
    w[q] = ok ? pi[q] : prev[q];
    advanced[q] = ok && pi[q] != prev[q];
  }

  // Conflict resolution: revert an advanced duplicate (the larger id when both
  // advanced) until no two members share a waypoint.
  for (bool changed = true; changed;) {
    changed = false;
    for (int a = 0; a < n && !changed; ++a)
      for (int b = a + 1; b < n && !changed; ++b) {
        if (w[a] != w[b]) continue;
        const int loser = advanced[b] ? b : a;
        if (!advanced[loser]) throw InvariantError("duplicate waypoints without an advanced agent");
        w[loser] = prev[loser];
        advanced[loser] = 0;
        changed = true;
      }
  }
  return w;
}

}  // namespace lscdr
