#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace curvediff {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n < 3, d < 2, or mismatched field shapes.
class BadShape : public Error {
 public:
  using Error::Error;
};

/// Two adjacent vertices closer than the regularity threshold.
class RegularityViolation : public Error {
 public:
  RegularityViolation(const std::string& what, std::size_t edge,
                      std::optional<double> time = std::nullopt)
      : Error(what), edge_(edge), time_(time) {}

  std::size_t edge() const noexcept { return edge_; }
  /// Integration time at which the violation was detected, if any.
  std::optional<double> time() const noexcept { return time_; }

 private:
  std::size_t edge_;
  std::optional<double> time_;
};

/// The SPD factorization of the metric tensor failed.
class SingularMetric : public Error {
 public:
  using Error::Error;
};

/// A simulated edge dropped below the configured edge floor.
class EdgeCollapse : public Error {
 public:
  EdgeCollapse(const std::string& what, std::size_t step, std::size_t edge, double length)
      : Error(what), step_(step), edge_(edge), length_(length) {}

  std::size_t step() const noexcept { return step_; }
  std::size_t edge() const noexcept { return edge_; }
  double length() const noexcept { return length_; }

 private:
  std::size_t step_;
  std::size_t edge_;
  double length_;
};

/// Relative Hamiltonian drift of a geodesic exceeded the guard.
class StepTooLarge : public Error {
 public:
  StepTooLarge(const std::string& what, double drift) : Error(what), drift_(drift) {}
  double relative_drift() const noexcept { return drift_; }

 private:
  double drift_;
};

/// Point outside the normalized triangle space.
class DomainViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace curvediff
