#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "lscdr/bernstein.hpp"
#include "lscdr/geometry.hpp"
#include "lscdr/qp.hpp"

namespace lscdr {

struct SubgoalProblem {
  Vec2 anchor = Vec2::Zero();  // start at k = 0, previous subgoal afterwards
  Vec2 target = Vec2::Zero();  // waypoint
  ConvexPolytope sfc;
  std::vector<HalfPlane> lscs;
};

/// Smallest delta in [0, 1] such that target + delta * (anchor - target)
/// satisfies every halfplane. Each halfplane is affine in delta, so the
/// feasible set is an interval.
inline double subgoal_delta(const SubgoalProblem& p) {
  double lo = 0.0, hi = 1.0;
  const Vec2 dir = p.anchor - p.target;
  auto cut = [&](const HalfPlane& h) {
    const double a = h.normal.dot(dir);
    const double b = h.offset - h.normal.dot(p.target);  // need a * delta >= b
    const double scale = 1.0 + std::abs(h.offset);
    if (std::abs(a) <= 1e-15 * scale) {
      if (b > tol::kGeometry * scale)
        throw InfeasibleError("subgoal segment misses a halfplane", -1, b);
      return;
    }
    if (a > 0.0) lo = std::max(lo, b / a);
    else hi = std::min(hi, b / a);
  };
  for (const auto& h : p.sfc.halfplanes) cut(h);
  for (const auto& h : p.lscs) cut(h);
  if (lo > hi + tol::kGeometry || lo > 1.0 + tol::kGeometry)
    throw InfeasibleError("subgoal interval is empty", -1, lo - std::min(hi, 1.0));
  return std::min(lo, 1.0);
}

inline Vec2 optimize_subgoal(const SubgoalProblem& p) {
  const double delta = subgoal_delta(p);
  if (delta <= 0.0) return p.target;
  if (delta >= 1.0 - tol::kGeometry) return p.anchor;
  return p.target + delta * (p.anchor - p.target);
}

struct TrajectoryParams {
  int degree = 5;
  int segments = 10;
  double dt = 0.2;
  double w_err = 1.0;
  double w_der = 0.01;
  double v_max = 1.0;
  double a_max = 2.0;
  double radius = 0.15;
  double comm_range = kInf;
};

/// Variable index of coordinate `dim` of control point l of segment m.
inline int var_index(int n, int m, int l, int dim) { return (m * (n + 1) + l) * 2 + dim; }

/// Hessian and equality matrix shared by every trajectory QP with these parameters.
/// Equalities (in this order): initial position, velocity, acceleration; C^2
/// continuity at each joint; final stop. All rows are written on control-point
/// differences so coefficients stay O(1).
inline std::shared_ptr<const QpStructure> trajectory_structure(const TrajectoryParams& prm) {
  const int n = prm.degree, M = prm.segments, nv = M * (n + 1) * 2;
  MatrixXd H = MatrixXd::Zero(nv, nv);
  const MatrixXd Q = jerk_cost_matrix(n, prm.dt);
  for (int m = 0; m < M; ++m)
    for (int dim = 0; dim < 2; ++dim)
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b)
          H(var_index(n, m, a, dim), var_index(n, m, b, dim)) += 2.0 * prm.w_der * Q(a, b);
  for (int dim = 0; dim < 2; ++dim) H(var_index(n, M - 1, n, dim), var_index(n, M - 1, n, dim)) += 2.0 * prm.w_err;

  const int rows = 6 + 6 * (M - 1) + 4;
  MatrixXd A = MatrixXd::Zero(rows, nv);
  int r = 0;
  for (int dim = 0; dim < 2; ++dim) {
    A(r++, var_index(n, 0, 0, dim)) = 1.0;
  }
  for (int dim = 0; dim < 2; ++dim) {
    A(r, var_index(n, 0, 1, dim)) = 1.0;
    A(r++, var_index(n, 0, 0, dim)) = -1.0;
  }
  for (int dim = 0; dim < 2; ++dim) {
    A(r, var_index(n, 0, 2, dim)) = 1.0;
    A(r, var_index(n, 0, 1, dim)) = -2.0;
    A(r++, var_index(n, 0, 0, dim)) = 1.0;
  }
  for (int m = 0; m + 1 < M; ++m)
    for (int dim = 0; dim < 2; ++dim) {
      auto v = [&](int seg, int l) { return var_index(n, seg, l, dim); };
      A(r, v(m, n)) = 1.0;
      A(r++, v(m + 1, 0)) = -1.0;
      A(r, v(m, n)) = 1.0;
      A(r, v(m, n - 1)) = -1.0;
      A(r, v(m + 1, 1)) = -1.0;
      A(r++, v(m + 1, 0)) = 1.0;
      A(r, v(m, n)) = 1.0;
      A(r, v(m, n - 1)) = -2.0;
      A(r, v(m, n - 2)) = 1.0;
      A(r, v(m + 1, 2)) = -1.0;
      A(r, v(m + 1, 1)) = 2.0;
      A(r++, v(m + 1, 0)) = -1.0;
    }
  for (int dim = 0; dim < 2; ++dim) {
    A(r, var_index(n, M - 1, n, dim)) = 1.0;
    A(r++, var_index(n, M - 1, n - 1, dim)) = -1.0;
    A(r, var_index(n, M - 1, n - 1, dim)) = 1.0;
    A(r++, var_index(n, M - 1, n - 2, dim)) = -1.0;
  }
  return std::make_shared<const QpStructure>(std::move(H), std::move(A));
}

inline VectorXd to_vector(const ControlGrid& g) {
  VectorXd x(g.points.size() * 2);
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    x[2 * i] = g.points[i].x();
    x[2 * i + 1] = g.points[i].y();
  }
  return x;
}

inline ControlGrid to_grid(const VectorXd& x, const ControlGrid& shape) {
  ControlGrid g = shape;
  for (std::size_t i = 0; i < g.points.size(); ++i) g.points[i] = Vec2(x[2 * i], x[2 * i + 1]);
  return g;
}

/// First inequality row of each constraint family; `end` is the row count.
struct RowLayout {
  int sfc = 0, lsc = 0, velocity = 0, acceleration = 0, comm_range = 0, comm_waypoint = 0, end = 0;

  const char* family(int row) const {
    if (row < lsc) return "sfc";
    if (row < velocity) return "lsc";
    if (row < acceleration) return "velocity";
    if (row < comm_range) return "acceleration";
    if (row < comm_waypoint) return "comm_range";
    return "comm_waypoint";
  }
};

struct TrajectoryQp {
  QpProblem problem;
  RowLayout layout;
};

/// Trajectory optimization for one agent. `init` is the initial trajectory: it
/// fixes the initial state and is the warm start. `lscs` holds, per neighbour in
/// ascending id order, M * (n + 1) halfplanes indexed like the control points.
inline TrajectoryQp assemble_qp(std::shared_ptr<const QpStructure> structure,
                                const TrajectoryParams& prm, const ControlGrid& init,
                                const Vec2& subgoal, const Vec2& waypoint,
                                const std::vector<Box>& sfc,
                                const std::vector<std::span<const HalfPlane>>& lscs) {
  const int n = prm.degree, M = prm.segments;
  TrajectoryQp out;
  QpProblem& q = out.problem;
  q.structure = std::move(structure);
  const int nv = q.structure->num_vars();
  q.f = VectorXd::Zero(nv);
  for (int dim = 0; dim < 2; ++dim) q.f[var_index(n, M - 1, n, dim)] = -2.0 * prm.w_err * subgoal[dim];
  q.constant = prm.w_err * subgoal.squaredNorm();

  q.b_eq = VectorXd::Zero(q.structure->a_eq().rows());
  const Vec2 c0 = init.at(0, 0), c1 = init.at(0, 1), c2 = init.at(0, 2);
  const Vec2 vel = c1 - c0, acc = c2 - 2.0 * c1 + c0;
  for (int dim = 0; dim < 2; ++dim) {
    q.b_eq[dim] = c0[dim];
    q.b_eq[2 + dim] = vel[dim];
    q.b_eq[4 + dim] = acc[dim];
  }

  SparseRows& A = q.ineq;
  A.clear();
  RowLayout& L = out.layout;
  L.sfc = 0;
  for (int m = 0; m < M; ++m)
    for (int l = 0; l <= n; ++l)
      for (int dim = 0; dim < 2; ++dim) {
        const int v = var_index(n, m, l, dim);
        A.add({{v, -1.0}}, -sfc[m].lo[dim]);
        A.add({{v, 1.0}}, sfc[m].hi[dim]);
      }
  L.lsc = A.size();
  for (const auto& planes : lscs)
    for (int m = 0; m < M; ++m)
      for (int l = 0; l <= n; ++l) {
        const HalfPlane& h = planes[m * (n + 1) + l];
        A.add({{var_index(n, m, l, 0), -h.normal.x()}, {var_index(n, m, l, 1), -h.normal.y()}},
              -h.offset);
      }
  L.velocity = A.size();
  const double vb = prm.v_max * prm.dt / n;
  for (int m = 0; m < M; ++m)
    for (int l = 0; l < n; ++l)
      for (int dim = 0; dim < 2; ++dim) {
        const int a = var_index(n, m, l, dim), b = var_index(n, m, l + 1, dim);
        A.add({{b, 1.0}, {a, -1.0}}, vb);
        A.add({{b, -1.0}, {a, 1.0}}, vb);
      }
  L.acceleration = A.size();
  const double ab = prm.a_max * prm.dt * prm.dt / (n * (n - 1));
  for (int m = 0; m < M; ++m)
    for (int l = 0; l + 1 < n; ++l)
      for (int dim = 0; dim < 2; ++dim) {
        const int a = var_index(n, m, l, dim), b = var_index(n, m, l + 1, dim),
                  c = var_index(n, m, l + 2, dim);
        A.add({{c, 1.0}, {b, -2.0}, {a, 1.0}}, ab);
        A.add({{c, -1.0}, {b, 2.0}, {a, -1.0}}, ab);
      }
  L.comm_range = A.size();
  if (std::isfinite(prm.comm_range)) {
    const double cb = 0.5 * prm.comm_range - prm.radius;
    for (int m = 0; m < M; ++m)
      for (int h = 0; m + h < M; ++h)
        for (int l = 0; l <= n; ++l) {
          if (h == 0 && l == 0) continue;
          for (int dim = 0; dim < 2; ++dim) {
            const int a = var_index(n, m + h, l, dim), b = var_index(n, m, 0, dim);
            A.add({{a, 1.0}, {b, -1.0}}, cb);
            A.add({{a, -1.0}, {b, 1.0}}, cb);
          }
        }
  }
  L.comm_waypoint = A.size();
  if (std::isfinite(prm.comm_range)) {
    const double wb = 0.5 * prm.comm_range;
    for (int m = 0; m < M; ++m)
      for (int dim = 0; dim < 2; ++dim) {
        const int v = var_index(n, m, n, dim);
        A.add({{v, 1.0}}, wb + waypoint[dim]);
        A.add({{v, -1.0}}, wb - waypoint[dim]);
      }
  }
  L.end = A.size();
  q.warm_start = to_vector(init);
  return out;
}

/// Objective terms recomputed from control points (independent of the QP form).
struct ObjectiveTerms {
  double error = 0.0;
  double derivative = 0.0;
};

inline ObjectiveTerms objective_terms(const ControlGrid& g, const Vec2& subgoal,
                                      const TrajectoryParams& prm) {
  ObjectiveTerms t;
  t.error = prm.w_err * (g.last_point() - subgoal).squaredNorm();
  const ControlGrid jerk = derivative_control_points(g, 3);
  const MatrixXd G = bernstein_gram(g.degree - 3);
  for (int m = 0; m < g.segments; ++m)
    for (int dim = 0; dim < 2; ++dim) {
      VectorXd c(g.degree - 2);
      for (int l = 0; l <= g.degree - 3; ++l) c[l] = jerk.at(m, l)[dim];
      t.derivative += prm.w_der * g.segment_duration * c.dot(G * c);
    }
  return t;
}

}  // namespace lscdr
