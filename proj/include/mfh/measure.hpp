#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mfh/assignment.hpp"
#include "mfh/noise.hpp"
#include "mfh/parallel.hpp"
#include "mfh/segments.hpp"

namespace mfh {

/// Uniform-weight empirical law on segment space.
///
/// Atoms are windows into shared column storage: either standalone segments or
/// the same time window of a set of paths. Copies are cheap and share storage,
/// which lets a whole flow of measures reference one ensemble of paths.
class EmpiricalMeasure {
 public:
  using Store = std::vector<Mat>;

  EmpiricalMeasure() = default;

  explicit EmpiricalMeasure(const std::vector<Segment>& atoms, double theta_hint = 2.0) : theta_hint_(theta_hint) {
    if (atoms.empty()) throw ShapeError("empirical measure needs at least one atom");
    auto store = std::make_shared<Store>();
    store->reserve(atoms.size());
    m_ = atoms.front().m();
    d_ = atoms.front().d();
    width_ = static_cast<Eigen::Index>(atoms.front().n_lag() + 1);
    for (const auto& a : atoms) {
      if (a.m() != m_ || a.d() != d_ || static_cast<Eigen::Index>(a.n_lag() + 1) != width_) {
        throw ShapeError("empirical measure atoms must share grid and dimensions");
      }
      store->push_back(a.values());
    }
    store_ = std::move(store);
  }

  /// Measure whose atoms are columns [offset, offset + width) of each stored matrix.
  EmpiricalMeasure(std::shared_ptr<const Store> store, Eigen::Index offset, Eigen::Index width, std::size_t m,
                   std::size_t d, double theta_hint = 2.0)
      : store_(std::move(store)), offset_(offset), width_(width), m_(m), d_(d), theta_hint_(theta_hint) {
    if (!store_ || store_->empty()) throw ShapeError("empirical measure needs at least one atom");
  }

  std::size_t size() const { return store_ ? store_->size() : 0; }
  std::size_t m() const { return m_; }
  std::size_t d() const { return d_; }
  std::size_t dim() const { return m_ + d_; }
  std::size_t n_lag() const { return static_cast<std::size_t>(width_) - 1; }
  double theta_hint() const { return theta_hint_; }

  auto atom(std::size_t i) const { return (*store_)[i].middleCols(offset_, width_); }
  auto atom_current(std::size_t i) const { return (*store_)[i].col(offset_ + width_ - 1); }
  Segment segment(std::size_t i) const { return Segment(Mat(atom(i)), m_, d_); }

  bool same_shape(const EmpiricalMeasure& other) const {
    return m_ == other.m_ && d_ == other.d_ && width_ == other.width_;
  }

 private:
  std::shared_ptr<const Store> store_;
  Eigen::Index offset_ = 0;
  Eigen::Index width_ = 0;
  std::size_t m_ = 0;
  std::size_t d_ = 0;
  double theta_hint_ = 2.0;
};

inline double moment(const EmpiricalMeasure& a, double theta) {
  if (theta < 0.0) throw DomainError("moment: theta must be nonnegative");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(sup_norm(a.atom(i)), theta);
  return acc / static_cast<double>(a.size());
}

/// Mean of the time-0 values of the atoms.
inline Vec mean_current(const EmpiricalMeasure& a) {
  Vec acc = Vec::Zero(static_cast<Eigen::Index>(a.dim()));
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.atom_current(i);
  return acc / static_cast<double>(a.size());
}

inline double cost_power(double distance, double theta) {
  if (theta == 1.0) return distance;
  if (theta == 2.0) return distance * distance;
  return std::pow(distance, theta);
}

/// N x N matrix of segment_distance(a_i, b_j)^theta.
inline Mat transport_cost_matrix(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double theta) {
  if (!a.same_shape(b)) throw ShapeError("wasserstein: measures live on different grids");
  const auto n = static_cast<Eigen::Index>(a.size());
  const auto k = static_cast<Eigen::Index>(b.size());
  Mat cost(n, k);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const auto ai = a.atom(i);
    for (Eigen::Index j = 0; j < k; ++j) {
      cost(static_cast<Eigen::Index>(i), j) = cost_power(segment_distance(ai, b.atom(static_cast<std::size_t>(j))), theta);
    }
  });
  return cost;
}

struct ExactOtOptions {
  std::size_t max_atoms = 2048;
};

/// Exact W_theta between equal-size empirical measures under the sup-norm segment cost.
inline double wasserstein_exact(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double theta,
                                const ExactOtOptions& options = {}) {
  if (theta < 1.0) throw DomainError("wasserstein_exact: theta must be >= 1");
  if (a.size() != b.size()) {
    throw ShapeError("wasserstein_exact: atom counts differ (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + "); subsample both to a common N first");
  }
  if (a.size() > options.max_atoms) {
    throw DomainError("wasserstein_exact: " + std::to_string(a.size()) + " atoms exceed the exact-solver cap of " +
                      std::to_string(options.max_atoms) + "; use wasserstein_sliced for monitoring");
  }
  const Mat cost = transport_cost_matrix(a, b, theta);
  const auto match = solve_assignment(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < match.size(); ++i) {
    total += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(match[i]));
  }
  return std::pow(total / static_cast<double>(a.size()), 1.0 / theta);
}

/// Cost of the index-aligned coupling a_i <-> b_i; an upper bound on W_theta.
inline double coupling_cost(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double theta) {
  if (a.size() != b.size() || !a.same_shape(b)) throw ShapeError("coupling_cost: measures not index-aligned");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += cost_power(segment_distance(a.atom(i), b.atom(i)), theta);
  return std::pow(total / static_cast<double>(a.size()), 1.0 / theta);
}

/// Sliced W_theta: mean over random unit directions of the 1-d W_theta between
/// projected, flattened segments. Monitoring only; a different metric from W_theta.
inline double wasserstein_sliced(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double theta,
                                 std::size_t n_projections, std::uint64_t seed) {
  if (theta < 1.0) throw DomainError("wasserstein_sliced: theta must be >= 1");
  if (a.size() != b.size()) throw ShapeError("wasserstein_sliced: atom counts differ");
  if (!a.same_shape(b)) throw ShapeError("wasserstein_sliced: measures live on different grids");
  if (n_projections == 0) throw DomainError("wasserstein_sliced: need at least one projection");
  const auto flat = static_cast<Eigen::Index>(a.dim() * (a.n_lag() + 1));
  const std::size_t n = a.size();
  std::vector<double> pa(n), pb(n);
  double acc = 0.0;
  for (std::size_t p = 0; p < n_projections; ++p) {
    const Vec dir = NoiseStream{seed, p}.standard_normals(0, static_cast<std::size_t>(flat)).normalized();
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = Eigen::Map<const Vec>(Mat(a.atom(i)).data(), flat).dot(dir);
      pb[i] = Eigen::Map<const Vec>(Mat(b.atom(i)).data(), flat).dot(dir);
    }
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost_power(std::abs(pa[i] - pb[i]), theta);
    acc += std::pow(total / static_cast<double>(n), 1.0 / theta);
  }
  return acc / static_cast<double>(n_projections);
}

/// Seeded uniform subsample without replacement, keeping original atom order.
inline EmpiricalMeasure subsample(const EmpiricalMeasure& a, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > a.size()) throw ShapeError("subsample: requested size outside [1, N]");
  if (n == a.size()) return a;
  std::vector<std::size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), 0);
  CounterRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.index(a.size() - i)]);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<Segment> atoms;
  atoms.reserve(n);
  for (auto i : idx) atoms.push_back(a.segment(i));
  return EmpiricalMeasure(atoms, a.theta_hint());
}

/// Exact W_theta after subsampling the larger measure down to the common size.
inline double wasserstein_subsampled(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double theta,
                                     std::uint64_t seed, const ExactOtOptions& options = {}) {
  const std::size_t n = std::min({a.size(), b.size(), options.max_atoms});
  return wasserstein_exact(subsample(a, n, derive_seed(seed, "subsample-a")),
                           subsample(b, n, derive_seed(seed, "subsample-b")), theta, options);
}

}  // namespace mfh
