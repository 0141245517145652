#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "curvediff/matrix.hpp"

namespace curvediff {

/// Regularity threshold: adjacent vertices must be farther apart than this.
inline constexpr double kEdgeEpsilon = 1e-12;

/// Order m of the discrete Sobolev-type metric.
class MetricOrder {
 public:
  constexpr explicit MetricOrder(int m) : m_(m < 0 ? 0 : m) {}
  constexpr int value() const noexcept { return m_; }
  constexpr bool odd() const noexcept { return (m_ % 2) == 1; }
  friend constexpr bool operator==(MetricOrder, MetricOrder) = default;

 private:
  int m_;
};

/// Selects the μ_i weight. Flipped exists only so tests can check that the
/// cross-module oracles detect a wrong parity.
enum class MuRule { OrderParity, Flipped };

/// Closed piecewise-linear curve: n vertices in R^d, indexed cyclically.
/// Coordinates are stored vertex-major.
class DiscreteCurve {
 public:
  /// Throws BadShape (n < 3, d < 2, size mismatch) or RegularityViolation.
  DiscreteCurve(std::size_t d, std::size_t n, std::vector<double> coords);

  std::size_t dim() const noexcept { return d_; }
  std::size_t size() const noexcept { return n_; }
  std::size_t dof() const noexcept { return d_ * n_; }

  std::span<const double> vertex(std::size_t i) const { return {coords_.data() + (i % n_) * d_, d_}; }
  std::span<const double> coords() const noexcept { return coords_; }

  friend bool operator==(const DiscreteCurve&, const DiscreteCurve&) = default;

 private:
  std::size_t d_;
  std::size_t n_;
  std::vector<double> coords_;
};

/// Per-vertex vectors over a base curve of matching shape.
class TangentVector {
 public:
  TangentVector(std::size_t d, std::size_t n, std::vector<double> components);
  static TangentVector zeros(std::size_t d, std::size_t n) { return {d, n, std::vector<double>(d * n)}; }
  static TangentVector constant(std::size_t n, std::span<const double> c);
  /// Unit vector along flattened coordinate k.
  static TangentVector basis(std::size_t d, std::size_t n, std::size_t k);

  std::size_t dim() const noexcept { return d_; }
  std::size_t size() const noexcept { return n_; }
  std::span<const double> at(std::size_t i) const { return {v_.data() + (i % n_) * d_, d_}; }
  std::span<const double> components() const noexcept { return v_; }
  std::span<double> components() noexcept { return v_; }

 private:
  std::size_t d_;
  std::size_t n_;
  std::vector<double> v_;
};

/// dn × dn matrix of g^m in the vertex-major standard basis.
struct MetricTensor {
  MetricOrder order;
  Matrix matrix;
};

// ---- construction --------------------------------------------------------

/// Regular n-gon of given circumradius in the first two coordinates.
DiscreteCurve make_circle(std::size_t n, double radius = 1.0, std::size_t d = 2);
/// (1,0), (0,1), (-1,0), (0,-1).
DiscreteCurve make_square();
/// points[i] is vertex i; all rows must have the same length.
DiscreteCurve from_points(const std::vector<std::vector<double>>& points);

DiscreteCurve translated(const DiscreteCurve& c, std::span<const double> t);
DiscreteCurve scaled(const DiscreteCurve& c, double lambda);
/// Applies the row-major d×d matrix r to every vertex.
DiscreteCurve rotated(const DiscreteCurve& c, const Matrix& r);
TangentVector rotated(const TangentVector& h, const Matrix& r);

// ---- geometry ------------------------------------------------------------

/// e_i = v_{i+1} - v_i, flattened vertex-major.
std::vector<double> edges(const DiscreteCurve& c);
std::vector<double> edge_lengths(const DiscreteCurve& c);
double total_length(const DiscreteCurve& c);
std::vector<double> centroid(const DiscreteCurve& c);

// ---- metric --------------------------------------------------------------

/// D_s^m h, same shape as h.
TangentVector arc_derivative(const DiscreteCurve& c, const TangentVector& h, MetricOrder m);

/// g^m_c(h, k).
double metric_eval(const DiscreteCurve& c, const TangentVector& h, const TangentVector& k, MetricOrder m,
                   MuRule rule = MuRule::OrderParity);

/// The scalar n × n block A with G^m = A ⊗ I_d.
Matrix metric_block(const DiscreteCurve& c, MetricOrder m, MuRule rule = MuRule::OrderParity);

MetricTensor metric_tensor(const DiscreteCurve& c, MetricOrder m, MuRule rule = MuRule::OrderParity);

}  // namespace curvediff
