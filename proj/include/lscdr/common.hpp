#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace lscdr {

using Vec2 = Eigen::Vector2d;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerances shared by the solver, the corridor checks and the monitors.
namespace tol {
inline constexpr double kPrimal = 1e-8;
inline constexpr double kKkt = 1e-6;
inline constexpr double kGeometry = 1e-9;
inline constexpr double kMonitor = 1e-6;
}  // namespace tol

/// Evaluation outside a curve's time domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A guarantee the planner relies on did not hold (e.g. a corridor seed that
/// should be obstacle-free is not). Signals an upstream bug.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Optimization problem without a feasible point.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, long row, double violation)
      : std::runtime_error(what), row_(row), violation_(violation) {}
  long row() const noexcept { return row_; }
  double violation() const noexcept { return violation_; }

 private:
  long row_;
  double violation_;
};

/// Procedural scenario generation gave up.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters or malformed input files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline double linf(const Vec2& v) { return v.cwiseAbs().maxCoeff(); }

inline bool is_finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

}  // namespace lscdr
