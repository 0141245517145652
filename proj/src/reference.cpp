#include "curvediff/reference.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "curvediff/detail/sobolev.hpp"

namespace curvediff::reference {

namespace {

using Dense = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const Dense> view(const Matrix& a) {
  return {a.data().data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols())};
}

#ifdef __SIZEOF_FLOAT128__
using Wide = __float128;
#else
using Wide = long double;
#endif

Wide wide_abs(Wide x) { return x < 0 ? -x : x; }

/// Newton refinement from a long double seed: one step reaches full width.
Wide wide_sqrt(Wide x) {
  if (!(x > 0)) return 0;
  Wide r = std::sqrt(static_cast<long double>(x));
  r = (r + x / r) / 2;
  return (r + x / r) / 2;
}

Wide smallest_eigenvalue_jacobi(std::vector<Wide> a, std::size_t n) {
  auto at = [&](std::size_t i, std::size_t j) -> Wide& { return a[i * n + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    Wide off = 0, diag = 0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += at(i, i) * at(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    }
    if (off == 0 || off < diag * Wide(1e-60)) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const Wide apq = at(p, q);
        if (apq == 0) continue;
        const Wide theta = (at(q, q) - at(p, p)) / (2 * apq);
        const Wide t = (theta >= 0 ? Wide(1) : Wide(-1)) / (wide_abs(theta) + wide_sqrt(theta * theta + 1));
        const Wide c = 1 / wide_sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const Wide akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Wide apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
  }
  Wide lo = at(0, 0);
  for (std::size_t i = 1; i < n; ++i) lo = std::min(lo, at(i, i));
  return lo;
}

}  // namespace

std::vector<double> symmetric_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(view(a), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver did not converge");
  const auto& w = es.eigenvalues();
  return {w.data(), w.data() + w.size()};
}

Matrix inverse(const Matrix& a) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(view(a));
  if (!lu.isInvertible()) throw std::runtime_error("matrix is singular");
  const Eigen::MatrixXd inv = lu.inverse();
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

double log_abs_det(const Matrix& a) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(view(a));
  const auto& u = lu.matrixLU();
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) s += std::log(std::abs(u(i, i)));
  return s;
}

double metric_min_eigenvalue_extended(const DiscreteCurve& c, MetricOrder m, MuRule rule) {
  const std::size_t d = c.dim(), n = c.size();
  const auto x = c.coords();
  detail::EdgeGeometry<Wide> g;
  g.length.resize(n);
  g.total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    Wide s = 0;
    for (std::size_t a = 0; a < d; ++a) {
      const Wide diff = Wide(x[j * d + a]) - Wide(x[i * d + a]);
      s += diff * diff;
    }
    g.length[i] = wide_sqrt(s);
    g.total += g.length[i];
  }
  return static_cast<double>(smallest_eigenvalue_jacobi(detail::metric_block(g, m.value(), rule), n));
}

}  // namespace curvediff::reference
