#include "kernels/isa.hpp"

#include "kernels/blocked.hpp"

namespace curvediff::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  detail::gemv<dot>(a, rows, cols, x, y);
}

bool cholesky(double* a, std::size_t n) { return detail::cholesky<dot>(a, n); }

}  // namespace curvediff::kernels::scalar
