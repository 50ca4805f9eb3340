#include <gtest/gtest.h>

#include "lscdr/lscdr.hpp"

using namespace lscdr;

namespace {

// Obstacle-free w x h grid with unit-spaced agents given as (col,row) pairs.
Scenario open_scenario(int w, int h, std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> moves) {
  Scenario s;
  s.world = GridWorld(Vec2::Zero(), 0.5, w, h, {}, 0.15);
  for (auto [from, to] : moves)
    s.agents.push_back({from.second * w + from.first, to.second * w + to.first});
  validate(s);
  return s;
}

bool has_kind(const RunMetrics& m, const std::string& kind) {
  for (const auto& v : m.violations)
    if (v.kind == kind) return true;
  return false;
}

}  // namespace

TEST(Sim, AgentAlreadyHomeSucceedsImmediately) {
  const Scenario s = open_scenario(5, 5, {{{2, 2}, {2, 2}}});
  const RunMetrics m = run(s, SimConfig::for_scenario(s, kInf)).metrics;
  EXPECT_TRUE(m.success);
  EXPECT_EQ(m.flight_time, 0.0);
  EXPECT_EQ(m.flight_distance, 0.0);
}

TEST(Sim, StraightRunCoversTheDistance) {
  const Scenario s = open_scenario(11, 3, {{{1, 1}, {9, 1}}});
  const RunMetrics m = run(s, SimConfig::for_scenario(s, kInf)).metrics;
  ASSERT_TRUE(m.success);
  EXPECT_NEAR(m.flight_distance, 4.0, 0.05);
  EXPECT_GE(m.flight_time, 4.0);  // v_max = 1
  EXPECT_LE(m.stats.max_velocity, 1.0 + 1e-6);
  EXPECT_LE(m.stats.max_acceleration, 2.0 + 1e-6);
}

TEST(Sim, HeadOnSwapKeepsSeparation) {
  for (double rc : {2.0, kInf}) {
    const Scenario s = open_scenario(9, 3, {{{1, 1}, {7, 1}}, {{7, 1}, {1, 1}}});
    const RunMetrics m = run(s, SimConfig::for_scenario(s, rc)).metrics;
    ASSERT_TRUE(m.success) << (m.violations.empty() ? "" : m.violations.front().kind);
    EXPECT_GE(m.stats.min_pair_distance, 0.3 - 1e-6);
  }
}

TEST(Sim, TimeoutIsReported) {
  const Scenario s = generate_forest(2);
  SimConfig cfg = SimConfig::for_scenario(s, kInf);
  cfg.timeout = 1.0;
  const RunMetrics m = run(s, cfg).metrics;
  EXPECT_FALSE(m.success);
  EXPECT_TRUE(has_kind(m, "timeout"));
}

TEST(Sim, ObserverSeesEveryPlannedStep) {
  const Scenario s = open_scenario(7, 3, {{{1, 1}, {5, 1}}, {{5, 0}, {1, 2}}});
  SimConfig cfg = SimConfig::for_scenario(s, 2.0);
  long calls = 0, last_k = -1;
  cfg.observer = [&](const StepOutput& o) {
    ++calls;
    EXPECT_EQ(o.k, last_k + 1);
    last_k = o.k;
    ASSERT_EQ(o.traj.size(), 2u);
    ASSERT_EQ(o.init.size(), 2u);
    EXPECT_EQ(o.qp.size(), 2u);
  };
  const RunMetrics m = run(s, cfg).metrics;
  ASSERT_TRUE(m.success);
  EXPECT_EQ(calls, m.steps);
}

TEST(Monitor, CurveThroughObstacleLosesClearance) {
  const ObstacleSet obs{{Box{Vec2(0.9, -0.2), Vec2(1.1, 0.2)}}};
  ControlGrid g(5, 2, 0.2, 0);
  for (int m = 0; m < 2; ++m)
    for (int l = 0; l <= 5; ++l) g.at(m, l) = Vec2(m + l / 5.0, 0.0);
  const auto pts = sample_curve(g, 20);
  EXPECT_EQ(pts.size(), 41u);
  EXPECT_LT(min_clearance(obs, pts), 0.0);

  ControlGrid h = g;
  for (auto& p : h.points) p.y() += 0.5;
  EXPECT_NEAR(min_clearance(obs, sample_curve(h, 20)), 0.3, 1e-12);
}

TEST(Monitor, SeparationCatchesCrossingCurves) {
  ControlGrid a(5, 1, 0.2, 0), b(5, 1, 0.2, 0);
  for (int l = 0; l <= 5; ++l) {
    a.at(0, l) = Vec2(l / 5.0, 0.0);
    b.at(0, l) = Vec2(1.0 - l / 5.0, 0.0);
  }
  const auto pa = sample_curve(a, 20), pb = sample_curve(b, 20);
  EXPECT_NEAR(min_separation(pa, pb), 0.0, 1e-12);
  for (auto& p : b.points) p.y() = 0.31;
  EXPECT_NEAR(min_separation(pa, sample_curve(b, 20)), 0.31, 1e-12);
  EXPECT_THROW(min_separation(pa, sample_curve(b, 10)), DomainError);
}

TEST(Sim, LogsAreDeterministicAcrossThreadCounts) {
  const Scenario s = generate_forest(3);
  SimConfig cfg = SimConfig::for_scenario(s, 2.0);
  cfg.record_log = true;
  const RunResult a = run(s, cfg), b = run(s, cfg);
  cfg.threads = 4;
  const RunResult c = run(s, cfg);
  ASSERT_FALSE(a.log.empty());
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.log, c.log);
  EXPECT_EQ(a.metrics.flight_time, c.metrics.flight_time);
  EXPECT_EQ(a.metrics.flight_distance, c.metrics.flight_distance);
}

TEST(ScenarioIo, JsonRoundTrip) {
  for (const Scenario& s : {generate_forest(4), generate_maze(4, dense_maze_params())}) {
    const nlohmann::json j = scenario_to_json(s);
    const Scenario back = scenario_from_json(j);
    EXPECT_EQ(scenario_to_json(back).dump(), j.dump());
    EXPECT_EQ(back.world.size(), s.world.size());
    for (VertexId v = 0; v < s.world.size(); ++v) EXPECT_EQ(back.world.blocked(v), s.world.blocked(v));
  }
}

TEST(ScenarioIo, ParsesRanges) {
  EXPECT_EQ(parse_range("inf"), kInf);
  EXPECT_EQ(parse_range("2"), 2.0);
  EXPECT_THROW(parse_range("fast"), ConfigError);
}

TEST(Bench, ZeroTrialsIsEmpty) {
  const BenchRow row = benchmark_cell(Environment::Forest, kInf, 0);
  EXPECT_EQ(row.trials, 0);
  EXPECT_EQ(row.successes, 0);
  EXPECT_EQ(row.success_rate_pct, 0.0);
  EXPECT_TRUE(row.runs.empty());
}

TEST(Bench, EnvironmentNames) {
  EXPECT_EQ(parse_environment("dense_maze"), Environment::Dense);
  EXPECT_EQ(environment_name(Environment::Sparse), "sparse");
  EXPECT_THROW(parse_environment("swamp"), ConfigError);
}
