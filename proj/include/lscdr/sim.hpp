#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "lscdr/bernstein.hpp"
#include "lscdr/corridors.hpp"
#include "lscdr/mapp.hpp"
#include "lscdr/network.hpp"
#include "lscdr/optimize.hpp"
#include "lscdr/qp.hpp"
#include "lscdr/world.hpp"

namespace lscdr {

/// Everything planned in one replanning step, before it is committed.
struct StepOutput {
  long k = 0;
  std::vector<ConnectedGroup> groups;
  std::vector<int> group_of;
  std::vector<VertexId> waypoints;
  std::vector<Vec2> subgoals;
  std::vector<ControlGrid> init;
  std::vector<ControlGrid> traj;
  std::vector<std::vector<Box>> sfc;
  std::vector<LscPair> pairs;
  std::vector<std::vector<int>> pair_of;  // per agent: indices into pairs
  std::vector<double> compute_ms;
  std::vector<QpSolution> qp;
};

struct SimConfig {
  TrajectoryParams traj;  // r, v_max, a_max, r_c, weights, n, M, dt
  double timeout = 60.0;
  double arrival_tol = 0.05;
  int settle_ticks = 5;
  long stagnation_limit = 300;  // ceil(60 s / dt)
  int samples_per_segment = 20;
  int threads = 1;
  bool record_log = false;
  std::function<void(const StepOutput&)> observer;  // called after the monitors, before commit

  /// Planner parameters for a scenario: its radius and limits, a given range.
  static SimConfig for_scenario(const Scenario& s, double comm_range) {
    SimConfig c;
    c.traj.radius = s.agent_radius;
    c.traj.v_max = s.v_max;
    c.traj.a_max = s.a_max;
    c.traj.comm_range = comm_range;
    return c;
  }
};

struct Violation {
  long step = 0;
  std::string kind;
  std::string detail;
};

/// Extremes observed by the monitors over a run.
struct MonitorStats {
  double min_pair_distance = kInf;
  double min_obstacle_clearance = kInf;
  double min_subgoal_distance = kInf;
  double max_velocity = 0.0;
  double max_acceleration = 0.0;
  long max_stagnation = 0;
  long qp_solves = 0;
  long warm_start_checks = 0;
  long lemma_checks = 0;
};

struct RunMetrics {
  bool success = false;
  double flight_time = 0.0;      // s, when the last agent arrived
  double flight_distance = 0.0;  // m, mean executed arc length per agent
  double compute_ms = 0.0;       // mean per-agent planning time per step
  long steps = 0;
  std::vector<Violation> violations;
  MonitorStats stats;
};

struct RunResult {
  RunMetrics metrics;
  std::vector<std::string> log;  // one JSON record per step when record_log is set
};

struct AgentSnapshot {
  Vec2 position;
  ControlGrid init;
  std::vector<Box> sfc;
};

namespace detail {

inline nlohmann::json to_json(const Vec2& p) { return nlohmann::json::array({p.x(), p.y()}); }

inline nlohmann::json trajectory_record(int id, const ControlGrid& g) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : g.points) {
    pts.push_back(p.x());
    pts.push_back(p.y());
  }
  return {{"agent_id", id},     {"k", g.start_step}, {"dt", g.segment_duration},
          {"M", g.segments},    {"n", g.degree},     {"control_points", pts}};
}

/// Runs body(i) for i in [0, count) on up to `threads` workers; the first
/// exception (lowest index) is rethrown after the join.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](int i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const int workers = std::min(threads, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) guarded(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int i = w; i < count; i += workers) guarded(i);
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  return (closest_on_segment(a, b, p).first - p).norm();
}

}  // namespace detail

/// Curve samples at `per_segment` points per segment, joints shared.
inline std::vector<Vec2> sample_curve(const ControlGrid& g, int per_segment) {
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(g.segments) * per_segment + 1);
  for (int m = 0; m < g.segments; ++m)
    for (int s = m == 0 ? 0 : 1; s <= per_segment; ++s)
      out.push_back(evaluate_segment(g, m, static_cast<double>(s) / per_segment));
  return out;
}

/// Smallest signed distance from the samples to any obstacle.
inline double min_clearance(const ObstacleSet& obstacles, std::span<const Vec2> samples) {
  const Box hull = Box::around(samples);
  double best = kInf;
  for (const auto& b : obstacles.boxes) {
    if (box_distance(b, hull) >= best) continue;
    for (const auto& p : samples) best = std::min(best, signed_distance(b, p));
  }
  return best;
}

/// Smallest distance between equally timed samples of two curves.
inline double min_separation(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.size() != b.size()) throw DomainError("sample counts differ");
  double best = kInf;
  for (std::size_t s = 0; s < a.size(); ++s) best = std::min(best, (a[s] - b[s]).norm());
  return best;
}

/// Lockstep replanning simulation of a scenario.
class Simulator {
 public:
  Simulator(const Scenario& scenario, SimConfig config)
      : sc_(scenario), cfg_(std::move(config)), dist_(scenario.world),
        structure_(trajectory_structure(cfg_.traj)) {
    validate_config();
    const int N = sc_.num_agents();
    states_.resize(N);
    sfc_.resize(N);
    arc_.assign(N, 0.0);
    stagnant_.assign(N, 0);
    for (int i = 0; i < N; ++i) {
      auto& s = states_[i];
      s.id = i;
      s.start = sc_.agents[i].start;
      s.goal = sc_.agents[i].goal;
      s.waypoint = s.start;
      s.subgoal = sc_.start(i);
      s.trajectory = ControlGrid::constant(sc_.start(i), cfg_.traj.degree, cfg_.traj.segments,
                                           cfg_.traj.dt, 0);
      dist_.prefetch(s.goal);
    }
  }

  RunResult run() {
    RunResult out;
    RunMetrics& mt = out.metrics;
    const int N = sc_.num_agents();
    const double dt = cfg_.traj.dt;
    const long max_steps = static_cast<long>(std::floor(cfg_.timeout / dt + 1e-9));
    long arrived_at = -1;
    double compute_total = 0.0;
    long compute_count = 0;

    for (long k = 0;; ++k) {
      std::vector<Vec2> pos(N);
      for (int i = 0; i < N; ++i)
        pos[i] = k == 0 ? sc_.start(i) : states_[i].trajectory.at(1, 0);

      if (arrived_at < 0 && all_arrived(pos)) {
        arrived_at = k;
        mt.flight_time = k * dt;
        mt.flight_distance = 0.0;
        for (double a : arc_) mt.flight_distance += a;
        mt.flight_distance /= std::max(N, 1);
      }
      if (arrived_at >= 0 && k - arrived_at >= cfg_.settle_ticks) {
        mt.success = mt.violations.empty();
        mt.steps = k;
        break;
      }
      if (arrived_at < 0 && k > max_steps) {
        mt.violations.push_back({k, "timeout", "agents did not reach their goals in time"});
        mt.steps = k;
        break;
      }

      std::vector<Violation> found;
      StepOutput step;
      try {
        step = plan_step(k, pos);
      } catch (const InfeasibleError& e) {
        found.push_back({k, "feasibility", e.what()});
      } catch (const InvariantError& e) {
        found.push_back({k, "invariant", e.what()});
      }
      if (found.empty()) {
        monitor(k, pos, step, found, mt.stats);
        for (int i = 0; i < N; ++i) {
          compute_total += step.compute_ms[i];
          ++compute_count;
        }
      }
      if (found.empty() && cfg_.observer) cfg_.observer(step);
      if (cfg_.record_log) out.log.push_back(log_record(k, pos, step, found));
      if (!found.empty()) {
        mt.violations.insert(mt.violations.end(), found.begin(), found.end());
        mt.steps = k;
        break;
      }
      commit(step);
    }
    mt.compute_ms = compute_count ? compute_total / compute_count : 0.0;
    if (!mt.success) {
      mt.flight_time = arrived_at >= 0 ? mt.flight_time : cfg_.timeout;
    }
    return out;
  }

  const Scenario& scenario() const { return sc_; }
  const SimConfig& config() const { return cfg_; }

 private:
  void validate_config() const {
    const auto& t = cfg_.traj;
    if (t.degree < 5 || t.segments < 1 || !(t.dt > 0.0)) throw ConfigError("bad trajectory shape");
    if (!(t.comm_range > 2.0 * sc_.world.grid_size()))
      throw ConfigError("communication range must exceed twice the grid size");
    if (!(sc_.world.grid_size() > 2.0 * std::sqrt(2.0) * t.radius))
      throw ConfigError("grid size must exceed 2*sqrt(2)*r");
  }

  bool all_arrived(const std::vector<Vec2>& pos) const {
    for (int i = 0; i < sc_.num_agents(); ++i) {
      const auto& s = states_[i];
      const Vec2 g = sc_.goal(i);
      if (s.waypoint != s.goal || s.subgoal != g || (pos[i] - g).norm() > cfg_.arrival_tol)
        return false;
    }
    return true;
  }

  StepOutput plan_step(long k, const std::vector<Vec2>& pos) {
    using clock = std::chrono::steady_clock;
    const int N = sc_.num_agents();
    const auto& prm = cfg_.traj;
    const int n = prm.degree, M = prm.segments;
    StepOutput o;
    o.k = k;
    o.groups = build_groups(pos, prm.comm_range);
    o.group_of = group_index(o.groups, N);
    o.waypoints.resize(N);
    o.subgoals.resize(N);
    o.init.resize(N);
    o.traj.resize(N);
    o.sfc.resize(N);
    o.pair_of.assign(N, {});
    o.compute_ms.assign(N, 0.0);
    o.qp.resize(N);

    std::vector<double> shared_ms(N, 0.0);
    for (const auto& g : o.groups) {
      const auto t0 = clock::now();
      const auto w = decentralized_mapp(g, states_, k, prm.comm_range, dist_);
      const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      for (std::size_t q = 0; q < g.members.size(); ++q) {
        o.waypoints[g.members[q]] = w[q];
        shared_ms[g.members[q]] += ms / g.members.size();
      }
    }

    for (int i = 0; i < N; ++i) {
      const auto t0 = clock::now();
      const auto& s = states_[i];
      o.init[i] = k == 0 ? initial_trajectory(sc_.start(i), n, M, prm.dt)
                         : initial_trajectory(s.trajectory, k);
      SfcInputs in;
      in.k = k;
      in.start = sc_.start(i);
      in.init_final = o.init[i].last_point();
      in.prev_subgoal = s.subgoal;
      in.waypoint = sc_.world.position(o.waypoints[i]);
      o.sfc[i] = build_sfc(in, sfc_[i], M, sc_.obstacles, sc_.world, prm.radius);
      shared_ms[i] += std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    }

    for (const auto& g : o.groups)
      for (std::size_t a = 0; a < g.members.size(); ++a)
        for (std::size_t b = a + 1; b < g.members.size(); ++b) {
          const int i = g.members[a], j = g.members[b];
          const auto t0 = clock::now();
          o.pairs.push_back(build_lsc(i, j, o.init[i], o.init[j], states_[i].subgoal,
                                      states_[j].subgoal, prm.radius, k));
          const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
          shared_ms[i] += 0.5 * ms;
          shared_ms[j] += 0.5 * ms;
          o.pair_of[i].push_back(static_cast<int>(o.pairs.size()) - 1);
          o.pair_of[j].push_back(static_cast<int>(o.pairs.size()) - 1);
        }

    detail::parallel_for(N, cfg_.threads, [&](int i) {
      const auto t0 = clock::now();
      SubgoalProblem sp;
      sp.anchor = k == 0 ? sc_.start(i) : states_[i].subgoal;
      sp.target = sc_.world.position(o.waypoints[i]);
      sp.sfc = ConvexPolytope::from_box(o.sfc[i][M - 1]);
      std::vector<std::span<const HalfPlane>> lscs;
      for (int pi : o.pair_of[i]) {
        const LscPair& pr = o.pairs[pi];
        sp.lscs.push_back(pr.side(i, M - 1, n, n));
        lscs.emplace_back(pr.i == i ? pr.for_i : pr.for_j);
      }
      o.subgoals[i] = optimize_subgoal(sp);
      auto qp = assemble_qp(structure_, prm, o.init[i], o.subgoals[i], sp.target, o.sfc[i], lscs);
      o.qp[i] = solve_qp(qp.problem);
      o.traj[i] = to_grid(o.qp[i].x, o.init[i]);
      o.compute_ms[i] =
          shared_ms[i] + std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    });
    return o;
  }

  void monitor(long k, const std::vector<Vec2>& pos, const StepOutput& o,
               std::vector<Violation>& found, MonitorStats& st) {
    const int N = sc_.num_agents();
    const auto& prm = cfg_.traj;
    const int n = prm.degree, M = prm.segments, S = cfg_.samples_per_segment;
    const double r = prm.radius;
    auto report = [&](const std::string& kind, const std::string& detail) {
      found.push_back({k, kind, detail});
    };
    auto agent_pair = [](int i, int j) {
      return "agents " + std::to_string(i) + " and " + std::to_string(j);
    };

    // Solver health.
    for (int i = 0; i < N; ++i) {
      const auto& q = o.qp[i];
      ++st.qp_solves;
      ++st.warm_start_checks;
      if (!q.converged || q.stationarity > tol::kKkt * 1e2 || q.primal_eq > tol::kPrimal ||
          q.primal_ineq > tol::kPrimal || q.complementarity > tol::kKkt)
        report("qp", "agent " + std::to_string(i) + " KKT residuals out of tolerance");
    }

    // Sampled trajectories over the full horizon.
    std::vector<std::vector<Vec2>> samples(N);
    for (int i = 0; i < N; ++i) samples[i] = sample_curve(o.traj[i], S);

    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) {
        const double dmin = min_separation(samples[i], samples[j]);
        st.min_pair_distance = std::min(st.min_pair_distance, dmin);
        if (dmin < 2.0 * r - tol::kMonitor) report("collision", agent_pair(i, j));
      }

    for (int i = 0; i < N; ++i) {
      const double cmin = min_clearance(sc_.obstacles, samples[i]);
      st.min_obstacle_clearance = std::min(st.min_obstacle_clearance, cmin);
      if (cmin < r - tol::kMonitor) report("obstacle", "agent " + std::to_string(i));
      const double v = sample_extreme_norm(o.traj[i], 1, Norm::LInf);
      const double a = sample_extreme_norm(o.traj[i], 2, Norm::LInf);
      st.max_velocity = std::max(st.max_velocity, v);
      st.max_acceleration = std::max(st.max_acceleration, a);
      if (v > prm.v_max + tol::kMonitor) report("velocity", "agent " + std::to_string(i));
      if (a > prm.a_max + tol::kMonitor) report("acceleration", "agent " + std::to_string(i));
    }

    // Waypoints are pairwise distinct across all agents.
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j)
        if (o.waypoints[i] == o.waypoints[j]) report("waypoint_duplicate", agent_pair(i, j));

    // Subgoals: on a grid edge at the waypoint, and pairwise 2r apart.
    for (int i = 0; i < N; ++i) {
      ++st.lemma_checks;
      const Vec2 w = sc_.world.position(o.waypoints[i]);
      bool on_edge = (o.subgoals[i] - w).norm() <= tol::kGeometry;
      for (VertexId u : sc_.world.neighbors(o.waypoints[i]))
        on_edge = on_edge ||
                  detail::point_segment_distance(o.subgoals[i], w, sc_.world.position(u)) <=
                      tol::kGeometry;
      if (!on_edge) report("subgoal_edge", "agent " + std::to_string(i));
      for (int j = i + 1; j < N; ++j) {
        const double d = (o.subgoals[i] - o.subgoals[j]).norm();
        st.min_subgoal_distance = std::min(st.min_subgoal_distance, d);
        if (d < 2.0 * r - tol::kMonitor) report("subgoal_distance", agent_pair(i, j));
      }
    }

    // Initial trajectories inside their corridors; last-segment containment.
    for (int i = 0; i < N; ++i) {
      const auto& c = o.init[i];
      for (int m = 0; m < M; ++m)
        for (int l = 0; l <= n; ++l)
          if (!o.sfc[i][m].contains(c.at(m, l), tol::kPrimal))
            report("sfc_feasibility", "agent " + std::to_string(i));
      for (int pi : o.pair_of[i]) {
        const auto& pr = o.pairs[pi];
        for (int m = 0; m < M; ++m)
          for (int l = 0; l <= n; ++l)
            if (!pr.side(i, m, l, n).contains(c.at(m, l), tol::kPrimal))
              report("lsc_feasibility", agent_pair(pr.i, pr.j));
      }
      if (k > 0) {
        const Vec2 ends[2] = {states_[i].subgoal, c.last_point()};
        for (const auto& p : ends) {
          bool inside = o.sfc[i][M - 1].contains(p, tol::kPrimal);
          for (int pi : o.pair_of[i]) inside = inside && o.pairs[pi].side(i, M - 1, n, n).contains(p, tol::kPrimal);
          if (!inside) report("last_segment_containment", "agent " + std::to_string(i));
        }
      }
    }

    // Stagnation of (position, subgoal, waypoint) for agents short of their goal.
    for (int i = 0; i < N; ++i) {
      const bool same = k > 0 && pos[i] == last_pos_[i] && o.subgoals[i] == states_[i].subgoal &&
                        o.waypoints[i] == states_[i].waypoint;
      const bool home = o.waypoints[i] == states_[i].goal && o.subgoals[i] == sc_.goal(i) &&
                        (pos[i] - sc_.goal(i)).norm() <= cfg_.arrival_tol;
      stagnant_[i] = (same && !home) ? stagnant_[i] + 1 : 0;
      st.max_stagnation = std::max(st.max_stagnation, stagnant_[i]);
      if (stagnant_[i] >= cfg_.stagnation_limit) report("deadlock", "agent " + std::to_string(i));
    }
    last_pos_ = pos;
  }

  void commit(const StepOutput& o) {
    for (int i = 0; i < sc_.num_agents(); ++i) {
      auto& s = states_[i];
      s.waypoint = o.waypoints[i];
      s.subgoal = o.subgoals[i];
      s.trajectory = o.traj[i];
      s.since_goal = s.waypoint == s.goal ? 0 : s.since_goal + 1;
      sfc_[i] = o.sfc[i];
      arc_[i] += segment_arc_length(o.traj[i], 0);
    }
  }

  std::string log_record(long k, const std::vector<Vec2>& pos, const StepOutput& o,
                         const std::vector<Violation>& found) const {
    nlohmann::json rec;
    rec["k"] = k;
    rec["t"] = k * cfg_.traj.dt;
    nlohmann::json agents = nlohmann::json::array();
    for (int i = 0; i < sc_.num_agents(); ++i) {
      nlohmann::json a;
      a["id"] = i;
      a["position"] = detail::to_json(pos[i]);
      if (!o.traj.empty() && !o.traj[i].points.empty()) {
        a["group"] = o.group_of[i];
        a["waypoint"] = detail::to_json(sc_.world.position(o.waypoints[i]));
        a["subgoal"] = detail::to_json(o.subgoals[i]);
        a["trajectory"] = detail::trajectory_record(i, o.traj[i]);
      }
      agents.push_back(std::move(a));
    }
    rec["agents"] = std::move(agents);
    nlohmann::json v = nlohmann::json::array();
    for (const auto& f : found) v.push_back({{"kind", f.kind}, {"detail", f.detail}});
    rec["violations"] = std::move(v);
    return rec.dump();
  }

  const Scenario& sc_;
  SimConfig cfg_;
  DistanceTable dist_;
  std::shared_ptr<const QpStructure> structure_;
  std::vector<AgentPlanState> states_;
  std::vector<std::vector<Box>> sfc_;
  std::vector<double> arc_;
  std::vector<long> stagnant_;
  std::vector<Vec2> last_pos_;
};

inline RunResult run(const Scenario& scenario, const SimConfig& config) {
  return Simulator(scenario, config).run();
}

}  // namespace lscdr
