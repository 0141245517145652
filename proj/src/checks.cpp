#include "curvediff/checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "curvediff/calculus.hpp"
#include "curvediff/reference.hpp"
#include "curvediff/sampling.hpp"
#include "curvediff/triangle.hpp"

namespace curvediff::checks {

namespace {

std::vector<int> orders(const Options& o, std::vector<int> defaults) {
  if (o.order) return {*o.order};
  return defaults;
}

std::size_t count(const Options& o, std::size_t fallback) { return o.samples ? o.samples : fallback; }

double rel(double a, double b, double scale) { return std::abs(a - b) / scale; }

Result spd(const Options& o) {
  Result r{"spd", true, std::numeric_limits<double>::infinity(), 0.0, 0, ""};
  CounterRng rng(o.seed);
  const std::size_t per = count(o, 100);
  std::size_t double_failures = 0;
  for (std::size_t d : {2u, 3u})
    for (std::size_t n = 3; n <= 12; ++n)
      for (int m : orders(o, {0, 1, 2, 3, 4})) {
        for (std::size_t s = 0; s < per; ++s) {
          const auto family = s % 2 ? CurveFamily::Gaussian : CurveFamily::Star;
          const auto c = random_curve(rng, n, d, family);
          const double lo = reference::metric_min_eigenvalue_extended(c, MetricOrder(m), o.rule);
          if (!(reference::symmetric_eigenvalues(metric_tensor(c, MetricOrder(m), o.rule).matrix).front() > 0.0))
            ++double_failures;
          ++r.samples;
          if (lo < r.observed) r.observed = lo;
          if (!(lo > 0.0)) {
            r.passed = false;
            r.detail = fmt::format("non-positive eigenvalue {:.3e} at d={} n={} m={}", lo, d, n, m);
          }
        }
      }
  if (r.passed) r.detail = fmt::format("smallest eigenvalue {:.3e}", r.observed);
  r.detail += fmt::format("; double-precision eigensolver non-positive on {} of {} (conditioning)", double_failures,
                          r.samples);
  return r;
}

Result translation_closed_form(const Options& o) {
  Result r{"translation-closed-form", true, 0.0, 1e-12, 0, ""};
  CounterRng rng(o.seed + 1);
  for (std::size_t s = 0; s < count(o, 100); ++s) {
    const std::size_t d = 2 + s % 2, n = 3 + s % 10;
    const auto c = random_curve(rng, n, d);
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    const auto h = TangentVector::constant(n, v);
    double c2 = 0.0;
    for (double x : v) c2 += x * x;
    const double l = total_length(c);
    for (int m : orders(o, {0, 1, 2, 3, 4})) {
      const double expected = (m == 0 ? 2.0 : 1.0) * c2 / (l * l);
      const double err = rel(metric_eval(c, h, h, MetricOrder(m), o.rule), expected, expected);
      r.observed = std::max(r.observed, err);
      ++r.samples;
    }
  }
  r.passed = r.observed <= r.threshold;
  r.detail = fmt::format("max relative error {:.3e}", r.observed);
  return r;
}

Result invariance(const Options& o) {
  Result r{"invariance", true, 0.0, 1e-10, 0, ""};
  CounterRng rng(o.seed + 2);
  double worst_t = 0.0, worst_r = 0.0, worst_s = 0.0;
  for (std::size_t s = 0; s < count(o, 1000); ++s) {
    const std::size_t d = 2 + s % 2, n = 3 + (s / 2) % 10;
    const int m = orders(o, {0, 1, 2, 3, 4})[s % orders(o, {0, 1, 2, 3, 4}).size()];
    const MetricOrder mo(m);
    const auto c = random_curve(rng, n, d);
    const auto h = random_tangent(rng, n, d), k = random_tangent(rng, n, d);
    const double base = metric_eval(c, h, k, mo, o.rule);
    const double scale = std::sqrt(metric_eval(c, h, h, mo, o.rule) * metric_eval(c, k, k, mo, o.rule));

    std::vector<double> t(d);
    for (double& x : t) x = 3.0 * rng.normal();
    worst_t = std::max(worst_t, rel(metric_eval(translated(c, t), h, k, mo, o.rule), base, scale));

    const auto q = random_rotation(rng, d);
    worst_r = std::max(worst_r, rel(metric_eval(rotated(c, q), rotated(h, q), rotated(k, q), mo, o.rule), base, scale));

    const double lambda = std::exp(rng.uniform(-2.0, 2.0));
    std::vector<double> hs(h.components().begin(), h.components().end()), ks(k.components().begin(), k.components().end());
    for (double& x : hs) x *= lambda;
    for (double& x : ks) x *= lambda;
    worst_s = std::max(worst_s, rel(metric_eval(scaled(c, lambda), TangentVector(d, n, hs), TangentVector(d, n, ks), mo, o.rule),
                                    base, scale));
    ++r.samples;
  }
  r.observed = std::max({worst_r, worst_s});
  r.passed = worst_t <= 1e-12 && worst_r <= 1e-10 && worst_s <= 1e-10;
  r.detail = fmt::format("translation {:.3e} (<=1e-12), rotation {:.3e}, scale {:.3e} (<=1e-10)", worst_t, worst_r,
                         worst_s);
  return r;
}

Result edge_rate(const Options& o) {
  Result r{"edge-rate", true, 0.0, 0.0, 0, ""};
  CounterRng rng(o.seed + 3);
  std::string parts;
  for (int m : orders(o, {2, 3})) {
    if (m < 2) throw std::invalid_argument("edge-rate bound holds only for m >= 2");
    const MetricOrder mo(m);
    const double bound = std::ldexp(1.0, -(m - 1));
    double worst = 0.0;
    for (std::size_t s = 0; s < count(o, 1000); ++s) {
      const std::size_t d = 2 + s % 2, n = 3 + (s / 2) % 10;
      const auto c = random_curve(rng, n, d, s % 3 == 2 ? CurveFamily::Gaussian : CurveFamily::Star);
      TangentVector h = random_tangent(rng, n, d);
      if (s % 4 == 1) {
        // single-vertex perturbation
        h = TangentVector::zeros(d, n);
        const std::size_t v = rng.index(n);
        for (std::size_t a = 0; a < d; ++a) h.components()[v * d + a] = rng.normal();
      } else if (s % 4 == 3) {
        // steepest direction for a random edge: G^{-1} ∇(log|e_i|)
        const std::size_t i = rng.index(n), j = (i + 1) % n;
        const auto e = edges(c);
        double len2 = 0.0;
        for (std::size_t a = 0; a < d; ++a) len2 += e[i * d + a] * e[i * d + a];
        std::vector<double> grad(n * d, 0.0);
        for (std::size_t a = 0; a < d; ++a) {
          grad[j * d + a] += e[i * d + a] / len2;
          grad[i * d + a] -= e[i * d + a] / len2;
        }
        const Matrix ginv = reference::inverse(metric_tensor(c, mo, o.rule).matrix);
        std::vector<double> dir(n * d, 0.0);
        for (std::size_t p = 0; p < n * d; ++p)
          for (std::size_t q = 0; q < n * d; ++q) dir[p] += ginv(p, q) * grad[q];
        h = TangentVector(d, n, dir);
      }
      const double norm = std::sqrt(metric_eval(c, h, h, mo, o.rule));
      for (double& x : h.components()) x /= norm;
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(log_edge_rate(c, h, i, mo)));
      ++r.samples;
    }
    const bool ok = worst <= bound + 1e-9;
    r.passed = r.passed && ok;
    r.observed = std::max(r.observed, worst);
    r.threshold = std::max(r.threshold, bound + 1e-9);
    parts += fmt::format("{}m={}: max rate {:.6f} (bound {:.6f})", parts.empty() ? "" : "; ", m, worst, bound);
  }
  r.detail = parts;
  return r;
}

}  // namespace

std::vector<double> finite_difference_drift(const MetricModel& model, std::span<const double> x, double step) {
  const std::size_t dim = model.dim();
  const Matrix ginv = reference::inverse(model.jet(x, false).full());
  std::vector<double> b(dim, 0.0);
  std::vector<double> xs(x.begin(), x.end());
  // Sixth-order central stencil, weights over 60h.
  constexpr std::array<double, 6> offsets{-3.0, -2.0, -1.0, 1.0, 2.0, 3.0};
  constexpr std::array<double, 6> weights{-1.0, 9.0, -45.0, 45.0, -9.0, 1.0};
  for (std::size_t i = 0; i < dim; ++i) {
    const double h = step;
    Matrix dinv(dim, dim);
    double dlog = 0.0;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      xs[i] = x[i] + offsets[k] * h;
      const Matrix g = model.jet(xs, false).full();
      const Matrix inv = reference::inverse(g);
      const double w = weights[k] / (60.0 * h);
      for (std::size_t j = 0; j < dim; ++j) dinv(i, j) += w * inv(i, j);
      dlog += w * 0.5 * reference::log_abs_det(g);
    }
    xs[i] = x[i];
    for (std::size_t j = 0; j < dim; ++j) b[j] += 0.5 * dinv(i, j) + 0.5 * ginv(i, j) * dlog;
  }
  return b;
}

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Result drift_check(const Options& o) {
  Result r{"drift", true, 0.0, 1e-5, 0, ""};
  CounterRng rng(o.seed + 4);
  double worst_fd = 0.0, worst_conf = 0.0, worst_trans = 0.0;
  for (std::size_t s = 0; s < count(o, 50); ++s) {
    const int m = orders(o, {0, 1, 2})[s % orders(o, {0, 1, 2}).size()];
    const std::size_t n = 3 + s % 5;
    const auto c = random_curve(rng, n, 2);
    const SobolevMetric model(2, n, MetricOrder(m), o.rule);
    const auto ad = drift(model, c.coords()).components;
    const auto lengths = edge_lengths(c);
    const auto fd = finite_difference_drift(model, c.coords(), 1e-2 * *std::min_element(lengths.begin(), lengths.end()));
    std::vector<double> diff(ad.size());
    for (std::size_t i = 0; i < ad.size(); ++i) diff[i] = ad[i] - fd[i];
    worst_fd = std::max(worst_fd, norm2(diff) / norm2(ad));
    for (std::size_t a = 0; a < 2; ++a) {
      const auto td = translation_derivatives(model, c.coords(), a);
      worst_trans = std::max({worst_trans, td.inverse_metric_norm, td.log_density});
    }
    ++r.samples;
  }
  for (std::size_t s = 0; s < count(o, 50); ++s) {
    const int m = static_cast<int>(s % 3);
    const std::array<double, 2> v{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    const ConformalPlaneMetric model(m);
    worst_conf = std::max(worst_conf, norm2(drift(model, v).components));
  }
  r.observed = worst_fd;
  r.passed = worst_fd <= 1e-5 && worst_conf <= 1e-10 && worst_trans <= 1e-8;
  r.detail = fmt::format("AD vs FD {:.3e} (<=1e-5), conformal drift {:.3e} (<=1e-10), translation derivatives {:.3e} (<=1e-8)",
                         worst_fd, worst_conf, worst_trans);
  return r;
}

Result diffusion(const Options& o) {
  Result r{"diffusion", true, 0.0, 1e-10, 0, ""};
  CounterRng rng(o.seed + 5);
  for (std::size_t s = 0; s < count(o, 100); ++s) {
    const int m = orders(o, {0, 1, 2})[s % orders(o, {0, 1, 2}).size()];
    const std::size_t n = 3 + s % 6, d = 2 + s % 2;
    const auto c = random_curve(rng, n, d);
    const Matrix g = metric_tensor(c, MetricOrder(m), o.rule).matrix;
    const Matrix sigma = diffusion_factor(SobolevMetric(d, n, MetricOrder(m), o.rule), c.coords()).full();
    Matrix res = multiply(multiply(sigma, sigma.transposed()), g);
    for (std::size_t i = 0; i < res.rows(); ++i) res(i, i) -= 1.0;
    r.observed = std::max(r.observed, frobenius_norm(res) / std::sqrt(static_cast<double>(res.rows())));
    ++r.samples;
  }
  r.passed = r.observed <= r.threshold;
  r.detail = fmt::format("max ||sigma sigma^T G - I||_F / ||I||_F = {:.3e}", r.observed);
  return r;
}

Result triangle_oracle(const Options& o) {
  Result r{"triangle-oracle", true, 0.0, 1e-10, 0, ""};
  CounterRng rng(o.seed + 6);
  for (std::size_t s = 0; s < count(o, 1000); ++s) {
    const int m = orders(o, {0, 1, 2})[s % orders(o, {0, 1, 2}).size()];
    if (m > 2) throw std::invalid_argument("triangle oracle has closed forms only for m <= 2");
    const TrianglePoint v(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
    const std::array<double, 2> h{rng.normal(), rng.normal()};
    const double expected = conformal_factor(m, v) * (h[0] * h[0] + h[1] * h[1]);
    const double got = restricted_metric_oracle(MetricOrder(m), v, h, o.rule);
    r.observed = std::max(r.observed, rel(got, expected, expected));
    ++r.samples;
  }
  r.passed = r.observed <= r.threshold;
  r.detail = fmt::format("max relative error {:.3e}", r.observed);
  return r;
}

}  // namespace

std::vector<std::string> property_names() {
  return {"spd", "translation-closed-form", "invariance", "edge-rate", "drift", "diffusion", "triangle-oracle"};
}

Result run(std::string_view property, const Options& options) {
  if (property == "spd") return spd(options);
  if (property == "translation-closed-form") return translation_closed_form(options);
  if (property == "invariance") return invariance(options);
  if (property == "edge-rate") return edge_rate(options);
  if (property == "drift") return drift_check(options);
  if (property == "diffusion") return diffusion(options);
  if (property == "triangle-oracle") return triangle_oracle(options);
  throw std::invalid_argument("unknown property: " + std::string(property));
}

}  // namespace curvediff::checks
