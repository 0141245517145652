#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curvediff/curve.hpp"
#include "curvediff/metric_model.hpp"

namespace curvediff {

inline constexpr double kDefaultDt = 0.01;
inline constexpr std::size_t kDefaultRecordEvery = 10;
inline constexpr double kDefaultEdgeFloor = 1e-8;

struct SimulationConfig {
  DiscreteCurve initial;
  MetricOrder order{2};
  double dt = kDefaultDt;
  std::size_t n_steps = 1000;
  std::uint64_t seed = 0;
  std::size_t record_every = kDefaultRecordEvery;
  double edge_floor = kDefaultEdgeFloor;
  /// Replaces g^order, e.g. with a flat surrogate. Must have dim() == initial.dof().
  std::shared_ptr<const MetricModel> metric;

  double horizon() const noexcept { return dt * static_cast<double>(n_steps); }
  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
};

struct SimulationEvent {
  std::string kind;  // "edge_collapse", "singular_metric", "ill_conditioned"
  std::size_t step = 0;
  std::optional<std::size_t> edge;
  std::string detail;
};

struct TrajectoryRecord {
  std::size_t d = 0;
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<DiscreteCurve> curves;
  std::vector<std::vector<double>> centroid_series;
  std::vector<double> min_edge_series;
  std::vector<double> length_series;
  std::vector<SimulationEvent> events;
  /// Number of steps actually taken.
  std::size_t completed_steps = 0;
  bool terminated_early = false;
};

/// One explicit Euler–Maruyama step x + dt b(x) + √dt σ(x) ξ on coordinates.
std::vector<double> em_step(const MetricModel& model, std::span<const double> x, double dt,
                            std::span<const double> xi);

/// Curve version: throws EdgeCollapse (carrying step and edge index) if an
/// edge of the result is not above edge_floor.
DiscreteCurve em_step(const DiscreteCurve& v, MetricOrder m, double dt, std::span<const double> xi,
                      double edge_floor = kDefaultEdgeFloor, std::size_t step = 0);
DiscreteCurve em_step(const MetricModel& model, const DiscreteCurve& v, double dt, std::span<const double> xi,
                      double edge_floor = kDefaultEdgeFloor, std::size_t step = 0);

/// Runs config.n_steps steps. Records step 0, every record_every-th step and
/// the last valid step. An EdgeCollapse or SingularMetric ends the run early
/// with an event instead of an exception.
TrajectoryRecord simulate(const SimulationConfig& config);

struct QuantileSeries {
  std::vector<double> q10, q50, q90;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::size_t completed_steps = 0;
  bool terminated_early = false;
  std::vector<SimulationEvent> events;
};

struct EnsembleReport {
  std::vector<std::size_t> steps;
  std::vector<double> times;
  /// Runs still alive at each recorded time.
  std::vector<std::size_t> alive;
  QuantileSeries min_edge;
  QuantileSeries length;
  /// |centroid(t) - centroid(0)|
  QuantileSeries centroid_displacement;
  std::vector<RunSummary> runs;
};

/// n_runs independent trajectories; run k uses derive_seed(config.seed, k).
/// Output does not depend on thread count or completion order.
EnsembleReport ensemble(const SimulationConfig& config, std::size_t n_runs, std::size_t threads = 0);

/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> values, double q);

}  // namespace curvediff
