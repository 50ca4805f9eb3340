#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "lscdr/common.hpp"

namespace lscdr {

struct ConnectedGroup {
  std::vector<int> members;  // ascending agent ids
  int coordinator = 0;
};

/// Connected components of the graph with an edge wherever the L-infinity
/// distance is at most r_c. Groups come out ordered by their smallest member,
/// which is also the coordinator.
inline std::vector<ConnectedGroup> build_groups(const std::vector<Vec2>& positions, double r_c) {
  if (!(r_c > 0.0)) throw ConfigError("communication range must be positive");
  const int n = static_cast<int>(positions.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::isinf(r_c) || linf(positions[i] - positions[j]) <= r_c) {
        const int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<ConnectedGroup> groups;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(groups.size());
      groups.push_back({{}, i});
    }
    groups[slot[root]].members.push_back(i);
  }
  return groups;
}

/// Group index of every agent.
inline std::vector<int> group_index(const std::vector<ConnectedGroup>& groups, int n_agents) {
  std::vector<int> out(n_agents, -1);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int m : groups[g].members) out[m] = static_cast<int>(g);
  return out;
}

}  // namespace lscdr
