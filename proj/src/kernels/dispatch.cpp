#include "curvediff/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels/isa.hpp"

namespace curvediff::kernels {

namespace {

constexpr Table kScalar{Isa::Scalar, scalar::dot, scalar::axpy, scalar::gemv, scalar::cholesky};
#if defined(CURVEDIFF_HAVE_AVX2)
constexpr Table kAvx2{Isa::Avx2, avx2::dot, avx2::axpy, avx2::gemv, avx2::cholesky};
#endif

Isa detect() noexcept {
  if (const char* env = std::getenv("CURVEDIFF_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && supported(Isa::Avx2)) return Isa::Avx2;
  }
  return supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const Table*>& slot() {
  static std::atomic<const Table*> current{&table(detect())};
  return current;
}

}  // namespace

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(CURVEDIFF_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

std::string_view name(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

const Table& table(Isa isa) noexcept {
#if defined(CURVEDIFF_HAVE_AVX2)
  if (isa == Isa::Avx2 && supported(Isa::Avx2)) return kAvx2;
#endif
  (void)isa;
  return kScalar;
}

const Table& active() noexcept { return *slot().load(std::memory_order_acquire); }

void set_active(Isa isa) {
  if (!supported(isa)) throw std::invalid_argument("kernel ISA not supported on this CPU: " + std::string(name(isa)));
  slot().store(&table(isa), std::memory_order_release);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(const Matrix& a, std::span<const double> x, std::span<double> y) {
  active().gemv(a.data().data(), a.rows(), a.cols(), x.data(), y.data());
}

bool cholesky(const Matrix& a, Matrix& lower) {
  lower = a;
  return active().cholesky(lower.data().data(), lower.rows());
}

void solve_lower(const Matrix& lower, std::span<double> b) {
  const auto& k = active();
  const std::size_t n = lower.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = lower.row(i);
    b[i] = (b[i] - k.dot(r.data(), b.data(), i)) / r[i];
  }
}

void solve_lower_transposed(const Matrix& lower, std::span<double> b) {
  const auto& k = active();
  const std::size_t n = lower.rows();
  for (std::size_t i = n; i-- > 0;) {
    const auto r = lower.row(i);
    b[i] /= r[i];
    // column i of Lᵀ above the diagonal is row i of L left of the diagonal
    k.axpy(-b[i], r.data(), b.data(), i);
  }
}

}  // namespace curvediff::kernels

namespace curvediff {

double frobenius_norm(const Matrix& m) {
  const auto d = m.data();
  return std::sqrt(kernels::dot(d, d));
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: shape mismatch");
  const Matrix bt = b.transposed();
  Matrix c(a.rows(), b.cols());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < a.rows(); ++i)
    k.gemv(bt.data().data(), bt.rows(), bt.cols(), a.row(i).data(), c.row(i).data());
  return c;
}

}  // namespace curvediff
