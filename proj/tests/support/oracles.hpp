#pragma once

// Independent reference implementations for tests. They follow the textbook
// definitions with plain loops and Eigen, and share no code with the library
// beyond its public types.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace oracle {

/// Scalar T is double, or std::complex<double> for complex-step derivatives.
template <class T>
struct BasicPolygon {
  std::size_t d, n;
  std::vector<T> x;  // vertex-major

  T coord(std::size_t i, std::size_t a) const { return x[(i % n) * d + a]; }
  T edge(std::size_t i) const {
    T s = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const T t = coord(i + 1, a) - coord(i, a);
      s += t * t;
    }
    return std::sqrt(s);
  }
  T length() const {
    T l = 0.0;
    for (std::size_t i = 0; i < n; ++i) l += edge(i);
    return l;
  }
};
using Polygon = BasicPolygon<double>;

/// D_s^m of a field with d channels per vertex.
template <class T, class F>
std::vector<T> arc_derivative(const BasicPolygon<T>& p, const std::vector<F>& f0, int m) {
  const std::size_t n = p.n, d = p.d;
  std::vector<T> f(f0.begin(), f0.end());
  for (int k = 1; k <= m; ++k) {
    std::vector<T> g(f.size());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t next = (i + 1) % n, prev = (i + n - 1) % n;
      for (std::size_t a = 0; a < d; ++a) {
        if (k % 2 == 1)
          g[i * d + a] = (f[next * d + a] - f[i * d + a]) / p.edge(i);
        else
          g[i * d + a] = (f[i * d + a] - f[prev * d + a]) / (0.5 * (p.edge(i) + p.edge(prev)));
      }
    }
    f = g;
  }
  return f;
}

/// g^m_v(h, k), term by term.
template <class T>
T metric(const BasicPolygon<T>& p, const std::vector<double>& h, const std::vector<double>& k, int m) {
  const std::size_t n = p.n, d = p.d;
  const T l = p.length();
  const auto dh = arc_derivative(p, h, m), dk = arc_derivative(p, k, m);
  T sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t prev = (i + n - 1) % n;
    const T avg = 0.5 * (p.edge(i) + p.edge(prev));
    const T mu = m % 2 == 1 ? p.edge(i) : avg;
    T hk = 0.0, dhdk = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      hk += h[i * d + a] * k[i * d + a];
      dhdk += dh[i * d + a] * dk[i * d + a];
    }
    sum += hk / std::pow(l, 3) * avg + dhdk / std::pow(l, 3 - 2 * m) * mu;
  }
  return sum;
}

/// Gram matrix of g^m in the standard basis of R^{dn}.
template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> metric_matrix(const BasicPolygon<T>& p, int m) {
  const std::size_t dim = p.d * p.n;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> g(dim, dim);
  std::vector<double> ei(dim, 0.0), ej(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    ei[i] = 1.0;
    for (std::size_t j = 0; j < dim; ++j) {
      ej[j] = 1.0;
      g(i, j) = metric(p, ei, ej, m);
      ej[j] = 0.0;
    }
    ei[i] = 0.0;
  }
  return g;
}

/// b^j = ½ ∂_i g^{ij} + ½ g^{ij} ∂_i log √det g by sixth-order central
/// differences of the oracle Gram matrix, step h.
inline Eigen::VectorXd fd_drift(const Polygon& p, int m, double h) {
  const std::size_t dim = p.d * p.n;
  const Eigen::MatrixXd ginv = metric_matrix(p, m).inverse();
  constexpr std::array<double, 6> off{-3, -2, -1, 1, 2, 3};
  constexpr std::array<double, 6> w{-1, 9, -45, 45, -9, 1};
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    Eigen::VectorXd dinv_row = Eigen::VectorXd::Zero(dim);
    double dlog = 0.0;
    for (std::size_t s = 0; s < off.size(); ++s) {
      Polygon q = p;
      q.x[i] += off[s] * h;
      const Eigen::MatrixXd g = metric_matrix(q, m);
      const double c = w[s] / (60.0 * h);
      dinv_row += c * g.inverse().row(i).transpose();
      dlog += c * 0.5 * std::log(g.determinant());
    }
    b += 0.5 * dinv_row + 0.5 * dlog * ginv.row(i).transpose();
  }
  return b;
}

/// ∂G/∂x_i by complex step: Im G(x + iε e_i) / ε, exact to rounding.
inline Eigen::MatrixXd metric_derivative(const Polygon& p, int m, std::size_t i) {
  constexpr double eps = 1e-30;
  BasicPolygon<std::complex<double>> q{p.d, p.n, {p.x.begin(), p.x.end()}};
  q.x[i] += std::complex<double>(0.0, eps);
  return metric_matrix(q, m).imag() / eps;
}

/// The drift from complex-step derivatives, using ∂G⁻¹ = -G⁻¹ ∂G G⁻¹ and
/// ∂ log √det G = ½ tr(G⁻¹ ∂G).
inline Eigen::VectorXd cs_drift(const Polygon& p, int m) {
  const std::size_t dim = p.d * p.n;
  const Eigen::MatrixXd ginv = metric_matrix(p, m).inverse();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const Eigen::MatrixXd dg = metric_derivative(p, m, i);
    const Eigen::MatrixXd dinv = -ginv * dg * ginv;
    const double dlog = 0.5 * (ginv * dg).trace();
    b += 0.5 * dinv.row(i).transpose() + 0.5 * dlog * ginv.row(i).transpose();
  }
  return b;
}

/// Lower-triangular σ with σ σᵀ = G⁻¹ (the unique one with positive diagonal).
inline Eigen::MatrixXd diffusion(const Polygon& p, int m) {
  const Eigen::MatrixXd ginv = metric_matrix(p, m).inverse();
  return Eigen::LLT<Eigen::MatrixXd>(ginv).matrixL();
}

/// x + dt b + √dt σ ξ.
inline std::vector<double> em_step(const Polygon& p, int m, double dt, std::span<const double> xi) {
  const std::size_t dim = p.d * p.n;
  const Eigen::VectorXd b = cs_drift(p, m);
  const Eigen::MatrixXd s = diffusion(p, m);
  const Eigen::Map<const Eigen::VectorXd> noise(xi.data(), static_cast<Eigen::Index>(dim));
  const Eigen::VectorXd step = dt * b + std::sqrt(dt) * s * noise;
  std::vector<double> out(p.x);
  for (std::size_t i = 0; i < dim; ++i) out[i] += step(static_cast<Eigen::Index>(i));
  return out;
}

/// f_m(v) · |h|² with the apex v in the triangle (1,0), v, (-1,0), via the
/// general metric.
inline double triangle_metric(int m, double vx, double vy, double hx, double hy) {
  const Polygon p{2, 3, {1.0, 0.0, vx, vy, -1.0, 0.0}};
  const std::vector<double> h{0.0, 0.0, hx, hy, 0.0, 0.0};
  return metric(p, h, h, m);
}

/// Type-7 quantile on sorted data.
inline double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace oracle
