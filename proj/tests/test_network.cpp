#include <gtest/gtest.h>

#include <random>

#include "lscdr/network.hpp"

using namespace lscdr;

TEST(Network, BoundaryDistanceConnects) {
  const std::vector<Vec2> pos{{0.0, 0.0}, {2.0, 1.5}};  // L-inf distance exactly 2
  EXPECT_EQ(build_groups(pos, 2.0).size(), 1u);
  EXPECT_EQ(build_groups(pos, 2.0 - 1e-9).size(), 2u);
}

TEST(Network, UsesInfinityNorm) {
  // Euclidean 2.83 but L-inf 2.
  const std::vector<Vec2> pos{{0.0, 0.0}, {2.0, 2.0}};
  EXPECT_EQ(build_groups(pos, 2.0).size(), 1u);
}

TEST(Network, ChainsThroughRelays) {
  const std::vector<Vec2> pos{{0, 0}, {5, 0}, {1.5, 0}, {3.0, 0}, {10, 0}};
  const auto groups = build_groups(pos, 2.0);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].members, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(groups[0].coordinator, 0);
  EXPECT_EQ(groups[1].members, (std::vector<int>{4}));
  EXPECT_EQ(groups[1].coordinator, 4);
}

TEST(Network, InfiniteRangeIsOneGroup) {
  const std::vector<Vec2> pos{{0, 0}, {100, 0}, {0, -300}};
  const auto groups = build_groups(pos, kInf);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].members.size(), 3u);
}

TEST(Network, RejectsNonPositiveRange) {
  EXPECT_THROW(build_groups({{0, 0}}, 0.0), ConfigError);
  EXPECT_THROW(build_groups({{0, 0}}, -1.0), ConfigError);
}

TEST(Network, RandomPartitionsAreComponents) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec2> pos(12);
    for (auto& p : pos) p = Vec2(u(rng), u(rng));
    const double rc = 2.0;
    const auto groups = build_groups(pos, rc);
    const auto idx = group_index(groups, 12);
    std::vector<int> seen(12, 0);
    for (const auto& g : groups) {
      EXPECT_TRUE(std::is_sorted(g.members.begin(), g.members.end()));
      EXPECT_EQ(g.coordinator, g.members.front());
      for (int m : g.members) ++seen[m];
    }
    for (int c : seen) EXPECT_EQ(c, 1);
    // No edge across groups; every group connected by flood fill.
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        if (linf(pos[i] - pos[j]) <= rc) EXPECT_EQ(idx[i], idx[j]);
    for (const auto& g : groups) {
      std::vector<int> reach{g.members.front()};
      std::vector<char> in(12, 0);
      in[g.members.front()] = 1;
      for (std::size_t q = 0; q < reach.size(); ++q)
        for (int j : g.members)
          if (!in[j] && linf(pos[reach[q]] - pos[j]) <= rc) {
            in[j] = 1;
            reach.push_back(j);
          }
      EXPECT_EQ(reach.size(), g.members.size());
    }
  }
}
