#pragma once

#include <cstddef>

namespace curvediff::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
bool cholesky(double* a, std::size_t n);
}  // namespace scalar

#if defined(CURVEDIFF_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
bool cholesky(double* a, std::size_t n);
}  // namespace avx2
#endif

}  // namespace curvediff::kernels
