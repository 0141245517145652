#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "curvediff/kernels.hpp"
#include "curvediff/matrix.hpp"
#include "curvediff/rng.hpp"

using namespace curvediff;
namespace k = curvediff::kernels;

namespace {

std::vector<double> normals(CounterRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

Matrix random_spd(CounterRng& rng, std::size_t n) {
  Matrix b(n, n);
  for (double& x : b.data()) x = rng.normal();
  Matrix a = multiply(b, b.transposed());
  for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
  return a;
}

std::vector<k::Isa> isas() {
  std::vector<k::Isa> out{k::Isa::Scalar};
  if (k::supported(k::Isa::Avx2)) out.push_back(k::Isa::Avx2);
  return out;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("every ISA agrees with the scalar reference on all lengths") {
    CounterRng rng(11);
    const auto& ref = k::table(k::Isa::Scalar);
    for (const auto isa : isas()) {
      const auto& t = k::table(isa);
      CAPTURE(k::name(isa));
      for (std::size_t n = 0; n <= 37; ++n) {
        const auto a = normals(rng, n), b = normals(rng, n);
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]);
        CHECK(std::abs(t.dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= 1e-14 * (scale + 1.0));

        auto y1 = normals(rng, n);
        auto y2 = y1;
        t.axpy(0.7, a.data(), y1.data(), n);
        ref.axpy(0.7, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
      }
    }
  }

  TEST_CASE("gemv and Cholesky match across ISAs") {
    CounterRng rng(12);
    for (const auto isa : isas()) {
      const auto& t = k::table(isa);
      for (std::size_t n = 1; n <= 24; ++n) {
        const Matrix a = random_spd(rng, n);
        const auto x = normals(rng, n);
        std::vector<double> y(n), y_ref(n, 0.0);
        t.gemv(a.data().data(), n, n, x.data(), y.data());
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) y_ref[i] += a(i, j) * x[j];
        for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(y_ref[i]).epsilon(1e-13));

        Matrix l = a;
        REQUIRE(t.cholesky(l.data().data(), n));
        const Matrix back = multiply(l, l.transposed());
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            CHECK(back(i, j) == doctest::Approx(a(i, j)).epsilon(1e-12));
            if (j > i) CHECK(l(i, j) == 0.0);
          }
      }
    }
  }

  TEST_CASE("Cholesky rejects indefinite and non-finite input") {
    for (const auto isa : isas()) {
      Matrix a(2, 2);
      a(0, 0) = 1.0;
      a(0, 1) = a(1, 0) = 2.0;
      a(1, 1) = 1.0;
      CHECK_FALSE(k::table(isa).cholesky(a.data().data(), 2));
      Matrix b = Matrix::identity(3);
      b(2, 2) = std::nan("");
      CHECK_FALSE(k::table(isa).cholesky(b.data().data(), 3));
    }
  }

  TEST_CASE("triangular solves invert the factor") {
    CounterRng rng(13);
    const Matrix a = random_spd(rng, 9);
    Matrix l;
    REQUIRE(k::cholesky(a, l));
    auto b = normals(rng, 9);
    auto x = b;
    k::solve_lower(l, x);
    k::solve_lower_transposed(l, x);
    std::vector<double> ax(9);
    k::gemv(a, x, ax);
    for (std::size_t i = 0; i < 9; ++i) CHECK(ax[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }

  TEST_CASE("the active table can be switched and restored") {
    const auto before = k::active().isa;
    k::set_active(k::Isa::Scalar);
    CHECK(k::active().isa == k::Isa::Scalar);
    if (k::supported(k::Isa::Avx2)) {
      k::set_active(k::Isa::Avx2);
      CHECK(k::active().isa == k::Isa::Avx2);
    } else {
      CHECK_THROWS_AS(k::set_active(k::Isa::Avx2), std::invalid_argument);
    }
    k::set_active(before);
    CHECK(k::name(k::Isa::Scalar) == "scalar");
  }
}
