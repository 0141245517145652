#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "curvediff/curve.hpp"
#include "curvediff/matrix.hpp"

namespace curvediff {

/// Metric tensor at a point together with its coordinate derivatives, in
/// Kronecker form: G = base ⊗ I_block with vertex-major ordering.
struct MetricJet {
  std::size_t block = 1;
  Matrix base;
  /// ∂base/∂x_j for every full coordinate j; empty when not requested.
  std::vector<Matrix> dbase;

  std::size_t dim() const noexcept { return base.rows() * block; }
  Matrix full() const { return kron_identity(base, block); }
  Matrix full_derivative(std::size_t j) const { return kron_identity(dbase.at(j), block); }
};

/// A Riemannian metric on an open subset of R^dim in global coordinates.
class MetricModel {
 public:
  virtual ~MetricModel() = default;

  virtual std::size_t dim() const = 0;
  virtual MetricJet jet(std::span<const double> x, bool with_derivatives) const = 0;
  /// Throws RegularityViolation when x is outside the domain.
  virtual void check_domain(std::span<const double> x) const { (void)x; }
  virtual std::string name() const = 0;
};

/// g^m on closed curves with n vertices in R^d. Derivatives come from
/// forward-mode dual arithmetic through the assembly, one pass per coordinate.
class SobolevMetric final : public MetricModel {
 public:
  SobolevMetric(std::size_t d, std::size_t n, MetricOrder m, MuRule rule = MuRule::OrderParity);

  std::size_t dim() const override { return d_ * n_; }
  MetricJet jet(std::span<const double> x, bool with_derivatives) const override;
  void check_domain(std::span<const double> x) const override;
  std::string name() const override;

  MetricOrder order() const noexcept { return m_; }

 private:
  std::size_t d_;
  std::size_t n_;
  MetricOrder m_;
  MuRule rule_;
};

/// scale · identity everywhere; the flat test surrogate.
class FlatMetric final : public MetricModel {
 public:
  explicit FlatMetric(std::size_t dim, double scale = 1.0) : dim_(dim), scale_(scale) {}

  std::size_t dim() const override { return dim_; }
  MetricJet jet(std::span<const double> x, bool with_derivatives) const override;
  std::string name() const override { return "flat"; }

 private:
  std::size_t dim_;
  double scale_;
};

}  // namespace curvediff
