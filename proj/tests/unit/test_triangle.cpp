#include <doctest.h>

#include <cmath>
#include <vector>

#include "curvediff/error.hpp"
#include "curvediff/rng.hpp"
#include "curvediff/triangle.hpp"
#include "support/oracles.hpp"

using namespace curvediff;

TEST_SUITE("triangle") {
  TEST_CASE("closed forms at the apex (0,1)") {
    const TrianglePoint v(0.0, 1.0);
    const double l = 2.0 + 2.0 * std::sqrt(2.0);
    CHECK(conformal_factor(0, v) == doctest::Approx(2.0 * std::sqrt(2.0) / (l * l * l)).epsilon(1e-15));
    CHECK(conformal_factor(1, v) == doctest::Approx(0.3054563517369943).epsilon(1e-15));
    CHECK(conformal_factor(1, v) == doctest::Approx(std::sqrt(2.0) / (l * l * l) + std::sqrt(2.0) / l).epsilon(1e-15));
    CHECK(oracle::triangle_metric(0, 0.0, 1.0, 1.0, 0.0) == doctest::Approx(conformal_factor(0, v)).epsilon(1e-14));
    CHECK_THROWS_AS((void)conformal_factor(3, v), std::invalid_argument);
  }

  TEST_CASE("the general metric restricted to the apex is conformal") {
    CounterRng rng(41);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int m = static_cast<int>(rng.index(3));
      const double x = rng.uniform(-3, 3), y = rng.uniform(-3, 3);
      if (std::hypot(x - 1, y) < 1e-3 || std::hypot(x + 1, y) < 1e-3) continue;
      const double hx = rng.normal(), hy = rng.normal();
      const double want = oracle::triangle_metric(m, x, y, hx, hy);
      const double got = conformal_factor(m, TrianglePoint(x, y)) * (hx * hx + hy * hy);
      worst = std::max(worst, std::abs(got - want) / want);
    }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("restricted oracle and anisotropy") {
    const TrianglePoint v(0.3, -0.8);
    for (int m = 0; m <= 2; ++m) {
      CHECK(restricted_metric_oracle(MetricOrder(m), v, {0.0, 2.0}) ==
            doctest::Approx(4.0 * conformal_factor(m, v)).epsilon(1e-12));
      CHECK(anisotropy(MetricOrder(m), v) <= 1e-12);
      CHECK(restricted_factor(MetricOrder(m), v) == conformal_factor(m, v));
    }
    // a wrong μ parity breaks conformality or the closed form
    const double flipped = restricted_metric_oracle(MetricOrder(1), v, {1.0, 0.0}, MuRule::Flipped);
    CHECK(std::abs(flipped - conformal_factor(1, v)) > 1e-3 * conformal_factor(1, v));
  }

  TEST_CASE("singular points are outside the domain") {
    CHECK_THROWS_AS(TrianglePoint(1.0, 0.0), DomainViolation);
    CHECK_THROWS_AS(TrianglePoint(-1.0, 1e-14), DomainViolation);
    CHECK_NOTHROW(TrianglePoint(1.0, 1e-6));
  }

  TEST_CASE("near-vertex asymptotics") {
    CHECK(conformal_factor(0, TrianglePoint(1.0 - 1e-7, 0.0)) == doctest::Approx(1.0 / 32.0).epsilon(1e-5));
    const auto radii = log_spaced_radii(1e-2, 1e-5, 30);
    CHECK(radii.size() == 30);
    CHECK(radii.front() == doctest::Approx(1e-2));
    CHECK(radii.back() == doctest::Approx(1e-5));
    const double constants[] = {1.0 / 32.0, 0.25, 8.0};
    for (int m = 0; m <= 2; ++m) {
      const auto fit = estimate_blowup_exponent(MetricOrder(m), radii);
      CHECK(fit.from_closed_form);
      CHECK(fit.exponent == doctest::Approx(-m).epsilon(0.05).scale(1.0));
      CHECK(fit.constant == doctest::Approx(constants[m]).epsilon(0.02));
    }
    const auto fit3 = estimate_blowup_exponent(MetricOrder(3), log_spaced_radii(1e-2, 1e-4, 12));
    CHECK_FALSE(fit3.from_closed_form);
    CHECK(fit3.exponent == doctest::Approx(-3.0).epsilon(0.02));
  }

  TEST_CASE("radial length classifies cone and cylinder ends") {
    const auto r0 = radial_length(MetricOrder(0), 0.5);
    CHECK(r0.classification == RadialClass::Convergent);
    CHECK(r0.value == doctest::Approx(0.5 / std::sqrt(32.0)).epsilon(1e-3));
    CHECK(radial_length(MetricOrder(1), 0.5).classification == RadialClass::Convergent);
    const auto r2 = radial_length(MetricOrder(2), 0.5);
    CHECK(r2.classification == RadialClass::Divergent);
    CHECK(r2.value > kRadialDivergenceThreshold);
    CHECK(to_string(RadialClass::Undecided) == "UNDECIDED");
  }

  TEST_CASE("grid export") {
    const auto g = conformal_grid(1, 40, 2.0);
    CHECK(g.f.size() == 1600);
    CHECK(g.x.front() == doctest::Approx(-2.0 + 0.05));
    CHECK(g.clamped_cells >= 2);
    for (double f : g.f) {
      CHECK(std::isfinite(f));
      CHECK(f <= g.clamp);
    }
    const auto capped = conformal_grid(2, 40, 2.0, 1.0);
    CHECK(capped.clamp == 1.0);
    CHECK(capped.clamped_cells > g.clamped_cells);
  }

  TEST_CASE("planar Brownian motion is reproducible") {
    const TrianglePoint v0(0.0, 1.0);
    const auto a = simulate_triangle_bm(1, v0, 0.01, 500, 5);
    const auto b = simulate_triangle_bm(1, v0, 0.01, 500, 5);
    CHECK(a.points == b.points);
    CHECK(a.steps.front() == 0);
    CHECK(a.completed_steps == 500);
    CHECK(a.min_singularity_distance <= a.min_distance.front());

    const auto e1 = triangle_bm_ensemble(1, v0, 0.01, 200, 8, 9, 1e-8, 1);
    const auto e2 = triangle_bm_ensemble(1, v0, 0.01, 200, 8, 9, 1e-8, 4);
    CHECK(e1.min_distance == e2.min_distance);
    CHECK(e1.max_excursion == e2.max_excursion);
    CHECK(e1.seeds[3] == derive_seed(9, 3));
    const auto single = simulate_triangle_bm(1, v0, 0.01, 200, derive_seed(9, 3), 1e-8);
    CHECK(e1.min_distance[3] == single.min_singularity_distance);
  }

  TEST_CASE("a large edge floor triggers a singularity approach") {
    const auto t = simulate_triangle_bm(1, TrianglePoint(0.7, 0.0), 0.01, 10000, 1, 0.2);
    REQUIRE(t.singularity_approach_step.has_value());
    CHECK(t.completed_steps == *t.singularity_approach_step);
  }
}
