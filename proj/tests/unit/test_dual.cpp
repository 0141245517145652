#include <doctest.h>

#include <cmath>

#include "curvediff/dual.hpp"

using curvediff::Dual;

TEST_SUITE("dual") {
  TEST_CASE("arithmetic follows the product and quotient rules") {
    const auto x = Dual<double>::variable(3.0);
    const Dual<double> c(2.0);
    const auto f = (x * x + c) / x;  // x + 2/x
    CHECK(f.val == doctest::Approx(3.0 + 2.0 / 3.0));
    CHECK(f.eps == doctest::Approx(1.0 - 2.0 / 9.0));
    const auto g = -(x - c) * c;
    CHECK(g.val == doctest::Approx(-2.0));
    CHECK(g.eps == doctest::Approx(-2.0));
  }

  TEST_CASE("sqrt and log") {
    const auto x = Dual<double>::variable(4.0);
    const auto r = sqrt(x);
    CHECK(r.val == doctest::Approx(2.0));
    CHECK(r.eps == doctest::Approx(0.25));
    const auto l = log(x);
    CHECK(l.val == doctest::Approx(std::log(4.0)));
    CHECK(l.eps == doctest::Approx(0.25));
  }

  TEST_CASE("integer powers, including negative exponents") {
    const auto x = Dual<double>::variable(2.0);
    const auto p = curvediff::ipow(x, 3);
    CHECK(p.val == doctest::Approx(8.0));
    CHECK(p.eps == doctest::Approx(12.0));
    const auto q = curvediff::ipow(x, -2);
    CHECK(q.val == doctest::Approx(0.25));
    CHECK(q.eps == doctest::Approx(-0.25));
    CHECK(curvediff::ipow(5.0, 0) == 1.0);
  }

  TEST_CASE("structural zeros need both parts zero") {
    CHECK(curvediff::structurally_zero(Dual<double>(0.0)));
    CHECK_FALSE(curvediff::structurally_zero(Dual<double>(0.0, 1.0)));
    CHECK(curvediff::structurally_zero(0.0));
    CHECK(curvediff::value_of(Dual<double>(1.5, 2.0)) == 1.5);
  }
}
