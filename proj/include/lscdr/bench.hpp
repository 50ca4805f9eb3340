#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lscdr/scenario_io.hpp"
#include "lscdr/sim.hpp"
#include "lscdr/world.hpp"

namespace lscdr {

enum class Environment { Forest, Sparse, Dense };

inline Environment parse_environment(const std::string& s) {
  if (s == "forest") return Environment::Forest;
  if (s == "sparse" || s == "sparse_maze") return Environment::Sparse;
  if (s == "dense" || s == "dense_maze") return Environment::Dense;
  throw ConfigError("unknown environment '" + s + "'");
}

inline std::string environment_name(Environment e) {
  switch (e) {
    case Environment::Forest: return "forest";
    case Environment::Sparse: return "sparse";
    case Environment::Dense: return "dense";
  }
  return "?";
}

inline Scenario generate(Environment e, std::uint64_t seed) {
  switch (e) {
    case Environment::Forest: return generate_forest(seed);
    case Environment::Sparse: return generate_maze(seed, sparse_maze_params());
    case Environment::Dense: return generate_maze(seed, dense_maze_params());
  }
  throw ConfigError("unknown environment");
}

/// Aggregate over trials for one (environment, range) cell. Means are over
/// successful trials; compute time is over all planned steps of all trials.
struct BenchRow {
  std::string env;
  double comm_range = kInf;
  int trials = 0;
  int successes = 0;
  double success_rate_pct = 0.0;
  double flight_time = 0.0;
  double flight_distance = 0.0;
  double compute_ms = 0.0;
  MonitorStats stats;
  std::vector<RunMetrics> runs;
};

inline void merge(MonitorStats& into, const MonitorStats& s) {
  into.min_pair_distance = std::min(into.min_pair_distance, s.min_pair_distance);
  into.min_obstacle_clearance = std::min(into.min_obstacle_clearance, s.min_obstacle_clearance);
  into.min_subgoal_distance = std::min(into.min_subgoal_distance, s.min_subgoal_distance);
  into.max_velocity = std::max(into.max_velocity, s.max_velocity);
  into.max_acceleration = std::max(into.max_acceleration, s.max_acceleration);
  into.max_stagnation = std::max(into.max_stagnation, s.max_stagnation);
  into.qp_solves += s.qp_solves;
  into.warm_start_checks += s.warm_start_checks;
  into.lemma_checks += s.lemma_checks;
}

/// Trial t uses scenario seed `seed0 + t`.
inline BenchRow benchmark_cell(Environment e, double r_c, int trials, std::uint64_t seed0 = 1,
                               int threads = 1,
                               const std::function<void(int, const RunMetrics&)>& progress = {}) {
  BenchRow row;
  row.env = environment_name(e);
  row.comm_range = r_c;
  row.trials = trials;
  double compute = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Scenario sc = generate(e, seed0 + static_cast<std::uint64_t>(t));
    SimConfig cfg = SimConfig::for_scenario(sc, r_c);
    cfg.threads = threads;
    RunMetrics m = run(sc, cfg).metrics;
    if (m.success) {
      ++row.successes;
      row.flight_time += m.flight_time;
      row.flight_distance += m.flight_distance;
    }
    compute += m.compute_ms;
    merge(row.stats, m.stats);
    if (progress) progress(t, m);
    row.runs.push_back(std::move(m));
  }
  if (trials > 0) {
    row.success_rate_pct = 100.0 * row.successes / trials;
    row.compute_ms = compute / trials;
  }
  if (row.successes > 0) {
    row.flight_time /= row.successes;
    row.flight_distance /= row.successes;
  }
  return row;
}

inline void write_csv_header(std::ostream& os) {
  os << "env,comm_range,trials,success_rate_pct,flight_time_s,flight_dist_m,compute_ms\n";
}

inline void write_csv_row(std::ostream& os, const BenchRow& r) {
  std::ostringstream rc;
  if (std::isinf(r.comm_range)) rc << "inf";
  else rc << r.comm_range;
  os << r.env << ',' << rc.str() << ',' << r.trials << ',' << std::fixed << std::setprecision(1)
     << r.success_rate_pct << ',' << std::setprecision(3) << r.flight_time << ','
     << r.flight_distance << ',' << r.compute_ms << '\n';
  os.unsetf(std::ios::floatfield);
}

}  // namespace lscdr
