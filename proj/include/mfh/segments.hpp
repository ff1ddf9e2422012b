#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "mfh/errors.hpp"

namespace mfh {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Uniform time discretization. The delay window spans n_lag steps, so r is
/// always an exact multiple of dt.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double dt, std::size_t n_lag, std::size_t n_steps) : dt_(dt), n_lag_(n_lag), n_steps_(n_steps) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive and finite");
    if (n_steps == 0) throw ConfigError("horizon must contain at least one step");
  }

  /// Builds a grid from durations; r and T must be integer multiples of dt.
  static TimeGrid from_durations(double dt, double r, double T) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (r < 0.0) throw ConfigError("delay r must be nonnegative");
    return TimeGrid(dt, exact_multiple(r, dt, "delay r"), exact_multiple(T, dt, "horizon T"));
  }

  double dt() const { return dt_; }
  std::size_t n_lag() const { return n_lag_; }
  std::size_t n_steps() const { return n_steps_; }
  double r() const { return static_cast<double>(n_lag_) * dt_; }
  double T() const { return static_cast<double>(n_steps_) * dt_; }
  double time(std::size_t step) const { return static_cast<double>(step) * dt_; }
  std::size_t window() const { return n_lag_ + 1; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  static std::size_t exact_multiple(double value, double dt, const char* what) {
    const double ratio = value / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio))) {
      throw ConfigError(std::string(what) + " is not an integer multiple of dt");
    }
    return static_cast<std::size_t>(rounded);
  }

  double dt_ = 1.0;
  std::size_t n_lag_ = 0;
  std::size_t n_steps_ = 1;
};

/// Discretized path window on [-r, 0]. Column j holds the state at time -r + j*dt,
/// so the last column is the time-0 value.
class Segment {
 public:
  Segment() = default;
  Segment(Mat values, std::size_t m, std::size_t d) : values_(std::move(values)), m_(m), d_(d) {
    if (m == 0 || d == 0) throw ShapeError("segment blocks must be nonempty");
    if (static_cast<std::size_t>(values_.rows()) != m + d) throw ShapeError("segment rows must equal m + d");
    if (values_.cols() == 0) throw ShapeError("segment needs at least one grid point");
    if (!values_.allFinite()) throw NumericError("segment contains non-finite entries");
  }

  /// Segment that stays at `state` over the whole window.
  static Segment constant(const Vec& state, std::size_t m, std::size_t n_lag) {
    Mat values = state.replicate(1, static_cast<Eigen::Index>(n_lag + 1));
    return Segment(std::move(values), m, static_cast<std::size_t>(state.size()) - m);
  }

  const Mat& values() const { return values_; }
  std::size_t m() const { return m_; }
  std::size_t d() const { return d_; }
  std::size_t dim() const { return m_ + d_; }
  std::size_t n_lag() const { return static_cast<std::size_t>(values_.cols()) - 1; }
  auto at(std::size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }
  auto current() const { return values_.col(values_.cols() - 1); }
  auto oldest() const { return values_.col(0); }

 private:
  Mat values_;
  std::size_t m_ = 0;
  std::size_t d_ = 0;
};

/// Full trajectory on grid times -r, -r+dt, ..., T stored column-wise.
struct PathRecord {
  Mat states;
  std::size_t m = 0;
  std::size_t d = 0;
  std::size_t n_lag = 0;

  std::size_t n_steps() const { return static_cast<std::size_t>(states.cols()) - n_lag - 1; }
  /// Column index of grid time t = step * dt.
  Eigen::Index column(std::size_t step) const { return static_cast<Eigen::Index>(step + n_lag); }
  auto state(std::size_t step) const { return states.col(column(step)); }
  auto window(std::size_t step) const {
    return states.middleCols(static_cast<Eigen::Index>(step), static_cast<Eigen::Index>(n_lag + 1));
  }
};

inline Segment segment_at(const PathRecord& path, std::size_t step) {
  if (step > path.n_steps()) {
    throw RangeError("segment_at: step " + std::to_string(step) + " outside [0, " +
                     std::to_string(path.n_steps()) + "]");
  }
  return Segment(Mat(path.window(step)), path.m, path.d);
}

/// Max over grid points of the Euclidean norm; works on any column-per-time block.
template <typename Derived>
double sup_norm(const Eigen::MatrixBase<Derived>& values) {
  if (values.cols() == 0) return 0.0;
  return values.colwise().norm().maxCoeff();
}

inline double sup_norm(const Segment& seg) { return sup_norm(seg.values()); }

template <typename DA, typename DB>
double segment_distance(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("segment_distance: grid or dimension mismatch");
  double best = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    best = std::max(best, (a.col(j) - b.col(j)).squaredNorm());
  }
  return std::sqrt(best);
}

inline double segment_distance(const Segment& a, const Segment& b) {
  if (a.m() != b.m() || a.d() != b.d()) throw ShapeError("segment_distance: block dimensions differ");
  return segment_distance(a.values(), b.values());
}

}  // namespace mfh
