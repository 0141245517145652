#include "curvediff/metric_model.hpp"

#include <cmath>
#include <string>

#include "curvediff/detail/sobolev.hpp"
#include "curvediff/dual.hpp"
#include "curvediff/error.hpp"

namespace curvediff {

SobolevMetric::SobolevMetric(std::size_t d, std::size_t n, MetricOrder m, MuRule rule)
    : d_(d), n_(n), m_(m), rule_(rule) {
  if (d < 2 || n < 3) throw BadShape("Sobolev metric needs d >= 2 and n >= 3");
}

MetricJet SobolevMetric::jet(std::span<const double> x, bool with_derivatives) const {
  if (x.size() != dim()) throw BadShape("coordinate vector has wrong size");
  MetricJet jet;
  jet.block = d_;
  jet.base = Matrix(n_, n_);
  {
    const auto g = detail::edge_geometry<double>(x, d_, n_);
    const auto a = detail::metric_block(g, m_.value(), rule_);
    std::copy(a.begin(), a.end(), jet.base.data().begin());
  }
  if (!with_derivatives) return jet;

  using D = Dual<double>;
  std::vector<D> xd(x.begin(), x.end());
  jet.dbase.reserve(dim());
  for (std::size_t j = 0; j < dim(); ++j) {
    xd[j].eps = 1.0;
    const auto g = detail::edge_geometry<D>(xd, d_, n_);
    const auto a = detail::metric_block(g, m_.value(), rule_);
    Matrix da(n_, n_);
    for (std::size_t k = 0; k < a.size(); ++k) da.data()[k] = a[k].eps;
    jet.dbase.push_back(std::move(da));
    xd[j].eps = 0.0;
  }
  return jet;
}

void SobolevMetric::check_domain(std::span<const double> x) const {
  const auto g = detail::edge_geometry<double>(x, d_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    if (!(g.length[i] > kEdgeEpsilon)) throw RegularityViolation("edge " + std::to_string(i) + " collapsed", i);
}

std::string SobolevMetric::name() const {
  return "sobolev(m=" + std::to_string(m_.value()) + (rule_ == MuRule::Flipped ? ",mu-flipped" : "") + ")";
}

MetricJet FlatMetric::jet(std::span<const double> x, bool with_derivatives) const {
  if (x.size() != dim_) throw BadShape("coordinate vector has wrong size");
  MetricJet jet;
  jet.block = dim_;
  jet.base = Matrix(1, 1, scale_);
  if (with_derivatives) jet.dbase.assign(dim_, Matrix(1, 1));
  return jet;
}

}  // namespace curvediff
