#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mfh/measure.hpp"
#include "mfh/model.hpp"
#include "mfh/noise.hpp"
#include "mfh/parallel.hpp"
#include "mfh/segments.hpp"

namespace mfh {

/// One empirical measure per solver grid time in [0, T], held fixed while paths are simulated.
class FrozenFlow {
 public:
  FrozenFlow() = default;
  FrozenFlow(TimeGrid grid, std::vector<EmpiricalMeasure> measures) : grid_(grid), measures_(std::move(measures)) {
    if (measures_.size() != grid_.n_steps() + 1) throw ShapeError("frozen flow needs one measure per grid time");
    for (const auto& mu : measures_) {
      if (mu.n_lag() != grid_.n_lag() || !mu.same_shape(measures_.front())) {
        throw ShapeError("frozen flow measures must share the segment grid");
      }
    }
  }

  /// The same measure at every time.
  static FrozenFlow constant(TimeGrid grid, const EmpiricalMeasure& mu) {
    return FrozenFlow(grid, std::vector<EmpiricalMeasure>(grid.n_steps() + 1, mu));
  }

  /// Segment laws of an ensemble of paths: the measure at step k has the k-th windows as atoms.
  static FrozenFlow from_paths(TimeGrid grid, std::vector<PathRecord>&& paths, double theta_hint = 2.0) {
    if (paths.empty()) throw ShapeError("frozen flow needs at least one path");
    const std::size_t m = paths.front().m, d = paths.front().d;
    auto store = std::make_shared<EmpiricalMeasure::Store>();
    store->reserve(paths.size());
    for (auto& p : paths) {
      if (p.n_lag != grid.n_lag() || p.n_steps() != grid.n_steps()) throw ShapeError("path grid differs from flow grid");
      store->push_back(std::move(p.states));
    }
    std::shared_ptr<const EmpiricalMeasure::Store> shared = std::move(store);
    std::vector<EmpiricalMeasure> measures;
    measures.reserve(grid.n_steps() + 1);
    for (std::size_t k = 0; k <= grid.n_steps(); ++k) {
      measures.emplace_back(shared, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(grid.window()), m, d,
                            theta_hint);
    }
    return FrozenFlow(grid, std::move(measures));
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return measures_.size(); }
  const EmpiricalMeasure& at(std::size_t step) const { return measures_.at(step); }
  const std::vector<EmpiricalMeasure>& measures() const { return measures_; }

  std::vector<ModelSpec::Features> summaries(const ModelSpec& spec) const {
    std::vector<ModelSpec::Features> out(measures_.size());
    if (!spec.measure_dependent()) return out;
    parallel_for(measures_.size(), [&](std::size_t k) { out[k] = spec.summarize(measures_[k]); });
    return out;
  }

 private:
  TimeGrid grid_;
  std::vector<EmpiricalMeasure> measures_;
};

struct SolverOptions {
  double blowup_bound = 1e12;
  /// Called with (stream_id, step) before each increment is drawn. Must be thread-safe
  /// when the ensemble runs in parallel.
  std::function<void(std::uint64_t, std::uint64_t)> on_increment;
};

/// state + drift dt + (0 (+) sigma dW). The position block never sees dW.
inline Vec euler_step(const ModelSpec& spec, double t, double dt, const SegmentRef& seg,
                      const ModelSpec::Features& law, const Vec& dW) {
  const Vec state = seg.col(seg.cols() - 1);
  Vec next = state + dt * eval_drift(spec, t, state, seg, law);
  const auto d = static_cast<Eigen::Index>(spec.d);
  next.tail(d) += eval_diffusion(spec, t, state, law) * dW;
  return next;
}

inline Vec euler_step(const ModelSpec& spec, double t, double dt, const Segment& seg, const EmpiricalMeasure& mu,
                      const Vec& dW) {
  return euler_step(spec, t, dt, seg.values(), spec.summarize(mu), dW);
}

namespace detail {

inline void guard_state(const Vec& state, const SolverOptions& options, std::size_t step, std::size_t particle) {
  if (!state.allFinite() || state.norm() > options.blowup_bound) {
    throw BlowUpError(step, particle,
                      "blow-up at step " + std::to_string(step) + " of particle " + std::to_string(particle) +
                          " (|state| beyond " + std::to_string(options.blowup_bound) + ")");
  }
}

inline PathRecord start_path(const Segment& init, const TimeGrid& grid) {
  if (init.n_lag() != grid.n_lag()) throw ShapeError("initial segment does not match the delay window");
  PathRecord path;
  path.m = init.m();
  path.d = init.d();
  path.n_lag = grid.n_lag();
  path.states.resize(static_cast<Eigen::Index>(init.dim()), static_cast<Eigen::Index>(grid.n_lag() + grid.n_steps() + 1));
  path.states.leftCols(static_cast<Eigen::Index>(grid.window())) = init.values();
  return path;
}

inline void advance(const ModelSpec& spec, const TimeGrid& grid, PathRecord& path, std::size_t step,
                    const ModelSpec::Features& law, const NoiseStream& stream, const SolverOptions& options,
                    std::size_t particle) {
  if (options.on_increment) options.on_increment(stream.stream_id, step);
  const Vec dW = stream.increments(step, spec.d, grid.dt());
  Vec next = euler_step(spec, grid.time(step), grid.dt(), path.window(step), law, dW);
  guard_state(next, options, step + 1, particle);
  path.states.col(path.column(step + 1)) = next;
}

inline PathRecord simulate_with_laws(const ModelSpec& spec, const Segment& init, const TimeGrid& grid,
                                     const std::vector<ModelSpec::Features>& laws, const NoiseStream& stream,
                                     const SolverOptions& options, std::size_t particle) {
  if (init.m() != spec.m || init.d() != spec.d) throw ShapeError("initial segment dimensions differ from the model");
  PathRecord path = start_path(init, grid);
  for (std::size_t step = 0; step < grid.n_steps(); ++step) {
    advance(spec, grid, path, step, laws[step], stream, options, particle);
  }
  return path;
}

}  // namespace detail

/// Path of the decoupled SDE whose law argument is frozen to `flow`.
inline PathRecord simulate_path(const ModelSpec& spec, const Segment& init, const FrozenFlow& flow,
                                const NoiseStream& stream, const SolverOptions& options = {}) {
  spec.validate();
  return detail::simulate_with_laws(spec, init, flow.grid(), flow.summaries(spec), stream, options, 0);
}

/// Independent copies of the decoupled SDE. Element i equals simulate_path on
/// (inits[i], streams[i]) exactly, for any thread count.
inline std::vector<PathRecord> simulate_ensemble(const ModelSpec& spec, const std::vector<Segment>& inits,
                                                 const FrozenFlow& flow, const std::vector<NoiseStream>& streams,
                                                 const SolverOptions& options = {}) {
  spec.validate();
  if (inits.size() != streams.size()) throw ShapeError("simulate_ensemble: one noise stream per initial segment");
  const auto laws = flow.summaries(spec);
  std::vector<PathRecord> out(inits.size());
  parallel_for(inits.size(), [&](std::size_t i) {
    out[i] = detail::simulate_with_laws(spec, inits[i], flow.grid(), laws, streams[i], options, i);
  });
  return out;
}

/// Streams 0..n-1 under one seed.
inline std::vector<NoiseStream> make_streams(std::uint64_t seed, std::size_t n, std::uint64_t first_id = 0) {
  std::vector<NoiseStream> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = NoiseStream{seed, first_id + i};
  return out;
}

}  // namespace mfh
