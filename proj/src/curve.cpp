#include "curvediff/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "curvediff/detail/sobolev.hpp"
#include "curvediff/error.hpp"

namespace curvediff {

namespace {

void check_regular(std::span<const double> coords, std::size_t d, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    double s = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const double diff = coords[j * d + a] - coords[i * d + a];
      s += diff * diff;
    }
    if (!(std::sqrt(s) > kEdgeEpsilon))
      throw RegularityViolation("vertices " + std::to_string(i) + " and " + std::to_string(j) + " coincide", i);
  }
}

void check_field_shape(const DiscreteCurve& c, const TangentVector& h) {
  if (c.dim() != h.dim() || c.size() != h.size()) throw BadShape("tangent vector shape does not match curve");
}

}  // namespace

DiscreteCurve::DiscreteCurve(std::size_t d, std::size_t n, std::vector<double> coords)
    : d_(d), n_(n), coords_(std::move(coords)) {
  if (d_ < 2) throw BadShape("ambient dimension must be at least 2");
  if (n_ < 3) throw BadShape("a closed curve needs at least 3 vertices");
  if (coords_.size() != d_ * n_) throw BadShape("coordinate count does not equal d*n");
  for (double x : coords_)
    if (!std::isfinite(x)) throw BadShape("non-finite coordinate");
  check_regular(coords_, d_, n_);
}

TangentVector::TangentVector(std::size_t d, std::size_t n, std::vector<double> components)
    : d_(d), n_(n), v_(std::move(components)) {
  if (v_.size() != d_ * n_) throw BadShape("tangent component count does not equal d*n");
}

TangentVector TangentVector::constant(std::size_t n, std::span<const double> c) {
  std::vector<double> v;
  v.reserve(n * c.size());
  for (std::size_t i = 0; i < n; ++i) v.insert(v.end(), c.begin(), c.end());
  return {c.size(), n, std::move(v)};
}

TangentVector TangentVector::basis(std::size_t d, std::size_t n, std::size_t k) {
  auto t = zeros(d, n);
  t.v_.at(k) = 1.0;
  return t;
}

DiscreteCurve make_circle(std::size_t n, double radius, std::size_t d) {
  if (!(radius > 0.0)) throw BadShape("radius must be positive");
  if (n < 3 || d < 2) throw BadShape("circle needs n >= 3 and d >= 2");
  std::vector<double> x(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    x[i * d] = radius * std::cos(theta);
    x[i * d + 1] = radius * std::sin(theta);
  }
  // exact values on the axes so that make_circle(4) is the unit square
  for (double& v : x)
    if (std::abs(v) < 1e-15 * radius) v = 0.0;
  return {d, n, std::move(x)};
}

DiscreteCurve make_square() { return {2, 4, {1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0}}; }

DiscreteCurve from_points(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw BadShape("no points");
  const std::size_t d = points.front().size();
  std::vector<double> x;
  x.reserve(points.size() * d);
  for (const auto& p : points) {
    if (p.size() != d) throw BadShape("points have inconsistent dimension");
    x.insert(x.end(), p.begin(), p.end());
  }
  return {d, points.size(), std::move(x)};
}

DiscreteCurve translated(const DiscreteCurve& c, std::span<const double> t) {
  if (t.size() != c.dim()) throw BadShape("translation dimension mismatch");
  std::vector<double> x(c.coords().begin(), c.coords().end());
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t a = 0; a < c.dim(); ++a) x[i * c.dim() + a] += t[a];
  return {c.dim(), c.size(), std::move(x)};
}

DiscreteCurve scaled(const DiscreteCurve& c, double lambda) {
  std::vector<double> x(c.coords().begin(), c.coords().end());
  for (double& v : x) v *= lambda;
  return {c.dim(), c.size(), std::move(x)};
}

namespace {

std::vector<double> rotate_blocks(std::span<const double> v, std::size_t d, const Matrix& r) {
  if (r.rows() != d || r.cols() != d) throw BadShape("rotation must be d x d");
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size() / d; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) out[i * d + a] += r(a, b) * v[i * d + b];
  return out;
}

}  // namespace

DiscreteCurve rotated(const DiscreteCurve& c, const Matrix& r) {
  return {c.dim(), c.size(), rotate_blocks(c.coords(), c.dim(), r)};
}

TangentVector rotated(const TangentVector& h, const Matrix& r) {
  return {h.dim(), h.size(), rotate_blocks(h.components(), h.dim(), r)};
}

std::vector<double> edges(const DiscreteCurve& c) {
  const std::size_t d = c.dim(), n = c.size();
  const auto x = c.coords();
  std::vector<double> e(d * n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    for (std::size_t a = 0; a < d; ++a) e[i * d + a] = x[j * d + a] - x[i * d + a];
  }
  return e;
}

std::vector<double> edge_lengths(const DiscreteCurve& c) {
  return detail::edge_geometry<double>(c.coords(), c.dim(), c.size()).length;
}

double total_length(const DiscreteCurve& c) {
  return detail::edge_geometry<double>(c.coords(), c.dim(), c.size()).total;
}

std::vector<double> centroid(const DiscreteCurve& c) {
  std::vector<double> m(c.dim(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t a = 0; a < c.dim(); ++a) m[a] += c.vertex(i)[a];
  for (double& v : m) v /= static_cast<double>(c.size());
  return m;
}

TangentVector arc_derivative(const DiscreteCurve& c, const TangentVector& h, MetricOrder m) {
  check_field_shape(c, h);
  const auto g = detail::edge_geometry<double>(c.coords(), c.dim(), c.size());
  std::vector<double> f(h.components().begin(), h.components().end());
  detail::apply_arc_derivative(g, m.value(), f, c.dim());
  return {c.dim(), c.size(), std::move(f)};
}

double metric_eval(const DiscreteCurve& c, const TangentVector& h, const TangentVector& k, MetricOrder m,
                   MuRule rule) {
  check_field_shape(c, h);
  check_field_shape(c, k);
  const auto g = detail::edge_geometry<double>(c.coords(), c.dim(), c.size());
  return detail::metric_value(g, m.value(), h.components(), k.components(), c.dim(), rule);
}

Matrix metric_block(const DiscreteCurve& c, MetricOrder m, MuRule rule) {
  const std::size_t n = c.size();
  const auto g = detail::edge_geometry<double>(c.coords(), c.dim(), n);
  const auto a = detail::metric_block(g, m.value(), rule);
  Matrix out(n, n);
  std::copy(a.begin(), a.end(), out.data().begin());
  return out;
}

MetricTensor metric_tensor(const DiscreteCurve& c, MetricOrder m, MuRule rule) {
  return {m, kron_identity(metric_block(c, m, rule), c.dim())};
}

}  // namespace curvediff
