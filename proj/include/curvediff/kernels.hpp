#pragma once

// Dense kernels behind the metric, drift and diffusion computations.
//
// Each kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2+FMA variant. The variant is picked once at first use from CPU
// features; CURVEDIFF_KERNELS=scalar|avx2 in the environment overrides the
// choice. Variants agree to rounding, not bit-for-bit (FMA contraction and
// lane-wise summation order differ), so a run is reproducible only for a
// fixed ISA. The active ISA is recorded in every run manifest.

#include <cstddef>
#include <span>
#include <string_view>

#include "curvediff/matrix.hpp"

namespace curvediff::kernels {

enum class Isa { Scalar, Avx2 };

struct Table {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y = A x for row-major A (rows x cols)
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  /// In-place lower Cholesky of a row-major n x n SPD matrix; the strict
  /// upper triangle is zeroed. Returns false if a pivot is not positive.
  bool (*cholesky)(double* a, std::size_t n);
};

bool supported(Isa isa) noexcept;
std::string_view name(Isa isa) noexcept;

/// Table for a specific ISA. Requesting an unsupported ISA returns scalar.
const Table& table(Isa isa) noexcept;

/// Table used by the library.
const Table& active() noexcept;
void set_active(Isa isa);

// Convenience wrappers over active().
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void gemv(const Matrix& a, std::span<const double> x, std::span<double> y);

/// Lower Cholesky factor L with A = L Lᵀ. Returns false on a non-positive pivot.
bool cholesky(const Matrix& a, Matrix& lower);

/// Solves L y = b in place (L lower triangular).
void solve_lower(const Matrix& lower, std::span<double> b);
/// Solves Lᵀ x = b in place (L lower triangular).
void solve_lower_transposed(const Matrix& lower, std::span<double> b);

}  // namespace curvediff::kernels
