#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lscdr/common.hpp"

namespace lscdr {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

/// Control points of an M-segment piecewise Bernstein curve in the plane.
///
/// Segments are 0-indexed. Segment m covers
/// [(start_step + m) * dt, (start_step + m + 1) * dt]; its points are stored
/// row-major at m * (degree + 1) + l.
struct ControlGrid {
  int degree = 5;
  int segments = 1;
  double segment_duration = 0.2;
  long start_step = 0;
  std::vector<Vec2> points;

  ControlGrid() = default;
  ControlGrid(int n, int M, double dt, long k)
      : degree(n), segments(M), segment_duration(dt), start_step(k),
        points(static_cast<std::size_t>(M) * (n + 1), Vec2::Zero()) {}

  static ControlGrid constant(const Vec2& p, int n, int M, double dt, long k) {
    ControlGrid g(n, M, dt, k);
    std::fill(g.points.begin(), g.points.end(), p);
    return g;
  }

  int per_segment() const { return degree + 1; }
  Vec2& at(int m, int l) { return points[static_cast<std::size_t>(m) * (degree + 1) + l]; }
  const Vec2& at(int m, int l) const {
    return points[static_cast<std::size_t>(m) * (degree + 1) + l];
  }
  std::span<const Vec2> segment(int m) const {
    return {points.data() + static_cast<std::size_t>(m) * (degree + 1),
            static_cast<std::size_t>(degree + 1)};
  }

  double start_time() const { return static_cast<double>(start_step) * segment_duration; }
  double end_time() const {
    return static_cast<double>(start_step + segments) * segment_duration;
  }
  const Vec2& first_point() const { return points.front(); }
  const Vec2& last_point() const { return points.back(); }
};

/// Position curve: degree n >= 5, every control point finite.
class PiecewiseTrajectory {
 public:
  PiecewiseTrajectory() = default;
  explicit PiecewiseTrajectory(ControlGrid control) : control_(std::move(control)) {
    if (control_.segments < 1) throw std::invalid_argument("trajectory needs at least one segment");
    if (control_.degree < 5) throw std::invalid_argument("trajectory degree must exceed 4");
    if (!(control_.segment_duration > 0.0))
      throw std::invalid_argument("segment duration must be positive");
    if (control_.points.size() !=
        static_cast<std::size_t>(control_.segments) * (control_.degree + 1))
      throw std::invalid_argument("control grid size does not match M * (n + 1)");
    for (const auto& p : control_.points)
      if (!is_finite(p)) throw std::invalid_argument("non-finite control point");
  }

  const ControlGrid& control() const { return control_; }
  int degree() const { return control_.degree; }
  int segments() const { return control_.segments; }
  double segment_duration() const { return control_.segment_duration; }
  long start_step() const { return control_.start_step; }
  double start_time() const { return control_.start_time(); }
  double end_time() const { return control_.end_time(); }

 private:
  ControlGrid control_;
};

/// de Casteljau evaluation of one Bernstein segment at s in [0, 1].
inline Vec2 de_casteljau(std::span<const Vec2> ctrl, double s) {
  // Degree is small (<= 10 in practice); a stack buffer avoids allocation.
  Vec2 buf[16];
  const std::size_t n1 = ctrl.size();
  if (n1 == 0) return Vec2::Zero();
  if (n1 > 16) {
    std::vector<Vec2> tmp(ctrl.begin(), ctrl.end());
    for (std::size_t r = 1; r < n1; ++r)
      for (std::size_t i = 0; i + r < n1; ++i) tmp[i] = (1.0 - s) * tmp[i] + s * tmp[i + 1];
    return tmp[0];
  }
  std::copy(ctrl.begin(), ctrl.end(), buf);
  for (std::size_t r = 1; r < n1; ++r)
    for (std::size_t i = 0; i + r < n1; ++i) buf[i] = (1.0 - s) * buf[i] + s * buf[i + 1];
  return buf[0];
}

inline Vec2 evaluate_segment(const ControlGrid& g, int m, double s) {
  return de_casteljau(g.segment(m), s);
}

/// Splits a time into (segment, fraction); throws DomainError outside the curve.
inline std::pair<int, double> locate(const ControlGrid& g, double t) {
  const double rel = (t - g.start_time()) / g.segment_duration;
  constexpr double eps = 1e-12;
  if (!(rel >= -eps && rel <= g.segments + eps))
    throw DomainError("time outside trajectory domain");
  int m = static_cast<int>(std::floor(rel));
  m = std::clamp(m, 0, g.segments - 1);
  double s = std::clamp(rel - m, 0.0, 1.0);
  return {m, s};
}

inline Vec2 evaluate(const ControlGrid& g, double t) {
  auto [m, s] = locate(g, t);
  return evaluate_segment(g, m, s);
}

inline Vec2 evaluate(const PiecewiseTrajectory& traj, double t) { return evaluate(traj.control(), t); }

/// Control points of the order-th time derivative (degree drops by order).
inline ControlGrid derivative_control_points(const ControlGrid& g, int order) {
  if (order < 0 || order > g.degree)
    throw std::invalid_argument("derivative order exceeds curve degree");
  ControlGrid cur = g;
  for (int o = 0; o < order; ++o) {
    const int n = cur.degree;
    ControlGrid next(n - 1, cur.segments, cur.segment_duration, cur.start_step);
    const double scale = n / cur.segment_duration;
    for (int m = 0; m < cur.segments; ++m)
      for (int l = 0; l < n; ++l) next.at(m, l) = scale * (cur.at(m, l + 1) - cur.at(m, l));
    cur = std::move(next);
  }
  return cur;
}

inline ControlGrid derivative_control_points(const PiecewiseTrajectory& traj, int order) {
  return derivative_control_points(traj.control(), order);
}

enum class Norm { Euclidean, LInf };

/// Max norm over the (derivative) control points. By the convex-hull property
/// this bounds the norm of the curve derivative everywhere on the domain.
inline double sample_extreme_norm(const ControlGrid& g, int order, Norm norm) {
  const ControlGrid d = order == 0 ? g : derivative_control_points(g, order);
  double best = 0.0;
  for (const auto& p : d.points) best = std::max(best, norm == Norm::LInf ? linf(p) : p.norm());
  return best;
}

inline double sample_extreme_norm(const PiecewiseTrajectory& traj, int order, Norm norm) {
  return sample_extreme_norm(traj.control(), order, norm);
}

/// Gram matrix of the degree-q Bernstein basis on [0, 1]: G_ab = int b_a b_b ds.
inline Eigen::MatrixXd bernstein_gram(int q) {
  Eigen::MatrixXd G(q + 1, q + 1);
  for (int a = 0; a <= q; ++a)
    for (int b = 0; b <= q; ++b)
      G(a, b) = binomial(q, a) * binomial(q, b) / (binomial(2 * q, a + b) * (2 * q + 1));
  return G;
}

/// Maps degree-n control points to the control points of the order-th derivative
/// ((n - order + 1) x (n + 1)), including the (n!/(n-order)!)/dt^order factor.
inline Eigen::MatrixXd derivative_operator(int n, int order, double dt) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(n + 1, n + 1);
  for (int o = 0; o < order; ++o) {
    const int deg = n - o;
    Eigen::MatrixXd step = Eigen::MatrixXd::Zero(deg, deg + 1);
    for (int l = 0; l < deg; ++l) {
      step(l, l) = -deg / dt;
      step(l, l + 1) = deg / dt;
    }
    D = step * D;
  }
  return D;
}

/// Q such that int over one segment of |d^3 p/dt^3|^2 dt = sum over axes of c^T Q c,
/// with c the n+1 control coordinates of that axis.
inline Eigen::MatrixXd jerk_cost_matrix(int n, double dt) {
  const Eigen::MatrixXd D3 = derivative_operator(n, 3, dt);
  return dt * D3.transpose() * bernstein_gram(n - 3) * D3;
}

/// Arc length of one segment by a fine polyline.
inline double segment_arc_length(const ControlGrid& g, int m, int samples = 64) {
  double len = 0.0;
  Vec2 prev = evaluate_segment(g, m, 0.0);
  for (int i = 1; i <= samples; ++i) {
    Vec2 cur = evaluate_segment(g, m, static_cast<double>(i) / samples);
    len += (cur - prev).norm();
    prev = cur;
  }
  return len;
}

}  // namespace lscdr
