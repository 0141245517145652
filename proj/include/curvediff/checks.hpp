#pragma once

// Property suites behind `curvediff check`.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curvediff/curve.hpp"
#include "curvediff/metric_model.hpp"

namespace curvediff::checks {

struct Options {
  std::uint64_t seed = 20240601;
  /// 0 selects the property's default sample count.
  std::size_t samples = 0;
  /// Restricts the metric orders exercised, when the property allows it.
  std::optional<int> order;
  /// Test fixture: perturbs the μ_i parity in the general metric.
  MuRule rule = MuRule::OrderParity;
};

struct Result {
  std::string name;
  bool passed = false;
  double observed = 0.0;   // worst value seen
  double threshold = 0.0;  // pass iff observed <= threshold (or > for "spd")
  std::size_t samples = 0;
  std::string detail;
};

std::vector<std::string> property_names();

/// Throws std::invalid_argument for an unknown property name.
Result run(std::string_view property, const Options& options = {});

/// Drift from sixth-order central differences (step h) of the assembled
/// metric tensor, with an Eigen inverse; shares no code with the dual-number
/// path. h should be small against the model's length scale.
std::vector<double> finite_difference_drift(const MetricModel& model, std::span<const double> x, double h = 1e-2);

}  // namespace curvediff::checks
