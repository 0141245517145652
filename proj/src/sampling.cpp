#include "curvediff/sampling.hpp"

#include <cmath>
#include <numbers>

#include "curvediff/error.hpp"

namespace curvediff {

DiscreteCurve random_curve(CounterRng& rng, std::size_t n, std::size_t d, CurveFamily family) {
  for (;;) {
    std::vector<double> x(n * d);
    if (family == CurveFamily::Gaussian) {
      for (double& v : x) v = rng.normal();
    } else {
      const double scale = std::exp(rng.uniform(-1.0, 1.0));
      std::vector<double> offset(d);
      for (double& o : offset) o = 2.0 * rng.normal();
      for (std::size_t i = 0; i < n; ++i) {
        const double theta =
            2.0 * std::numbers::pi * (static_cast<double>(i) + rng.uniform(-0.3, 0.3)) / static_cast<double>(n);
        const double radius = rng.uniform(0.4, 1.6);
        x[i * d] = radius * std::cos(theta);
        x[i * d + 1] = radius * std::sin(theta);
        for (std::size_t a = 2; a < d; ++a) x[i * d + a] = rng.uniform(-0.5, 0.5);
        for (std::size_t a = 0; a < d; ++a) x[i * d + a] = scale * x[i * d + a] + offset[a];
      }
    }
    try {
      return {d, n, std::move(x)};
    } catch (const RegularityViolation&) {
      // resample
    }
  }
}

TangentVector random_tangent(CounterRng& rng, std::size_t n, std::size_t d) {
  std::vector<double> v(n * d);
  for (double& x : v) x = rng.normal();
  return {d, n, std::move(v)};
}

Matrix random_rotation(CounterRng& rng, std::size_t d) {
  Matrix q(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (;;) {
      std::vector<double> v(d);
      for (double& x : v) x = rng.normal();
      for (std::size_t k = 0; k < i; ++k) {
        double p = 0.0;
        for (std::size_t a = 0; a < d; ++a) p += v[a] * q(k, a);
        for (std::size_t a = 0; a < d; ++a) v[a] -= p * q(k, a);
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-6) continue;
      for (std::size_t a = 0; a < d; ++a) q(i, a) = v[a] / norm;
      break;
    }
  }
  return q;
}

}  // namespace curvediff
