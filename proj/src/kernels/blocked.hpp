#pragma once

// ISA-independent kernel bodies, instantiated once per ISA translation unit
// with that unit's dot product.

#include <cmath>
#include <cstddef>

namespace curvediff::kernels::detail {

template <auto Dot>
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = Dot(a + i * cols, x, cols);
}

template <auto Dot>
bool cholesky(double* a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double* rj = a + j * n;
    const double d = rj[j] - Dot(rj, rj, j);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    rj[j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double* ri = a + i * n;
      ri[j] = (ri[j] - Dot(ri, rj, j)) / ljj;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
  return true;
}

}  // namespace curvediff::kernels::detail
