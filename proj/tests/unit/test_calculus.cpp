#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "curvediff/calculus.hpp"
#include "curvediff/checks.hpp"
#include "curvediff/curve.hpp"
#include "curvediff/kernels.hpp"
#include "curvediff/sampling.hpp"
#include "curvediff/triangle.hpp"
#include "support/oracles.hpp"

using namespace curvediff;

namespace {

oracle::Polygon as_polygon(const DiscreteCurve& c) {
  return {c.dim(), c.size(), {c.coords().begin(), c.coords().end()}};
}

double max_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

/// G⁻¹ p
std::vector<double> velocity(const DiscreteCurve& c, std::vector<double> p, MetricOrder m) {
  Matrix l;
  REQUIRE(kernels::cholesky(metric_tensor(c, m).matrix, l));
  kernels::solve_lower(l, p);
  kernels::solve_lower_transposed(l, p);
  return p;
}

}  // namespace

TEST_SUITE("calculus") {
  TEST_CASE("drift matches complex-step and finite-difference oracles") {
    CounterRng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 3 + rng.index(5);
      const int m = static_cast<int>(rng.index(3));
      const auto c = random_curve(rng, n, 2);
      const auto b = drift(c, MetricOrder(m)).components;
      const auto p = as_polygon(c);
      const Eigen::VectorXd cs = oracle::cs_drift(p, m);
      const auto edges = edge_lengths(c);
      const Eigen::VectorXd fd = oracle::fd_drift(p, m, 1e-2 * *std::min_element(edges.begin(), edges.end()));
      const double scale = cs.norm();
      double err_cs = 0.0, err_fd = 0.0;
      for (std::size_t j = 0; j < b.size(); ++j) {
        err_cs = std::max(err_cs, std::abs(b[j] - cs(static_cast<Eigen::Index>(j))));
        err_fd = std::max(err_fd, std::abs(b[j] - fd(static_cast<Eigen::Index>(j))));
      }
      CHECK(err_cs <= 1e-9 * scale);
      CHECK(err_fd <= 1e-5 * scale);
    }
  }

  TEST_CASE("drift at m = 2 on a pentagon agrees with finite differences") {
    CounterRng rng(22);
    const auto c = random_curve(rng, 5, 2);
    const SobolevMetric model(2, 5, MetricOrder(2));
    const auto b = drift(model, c.coords()).components;
    const auto e = edge_lengths(c);
    const auto fd = checks::finite_difference_drift(model, c.coords(), 1e-2 * std::ranges::min(e));
    double err = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) err = std::max(err, std::abs(b[j] - fd[j]));
    CHECK(err <= 1e-5 * max_abs(b));
  }

  TEST_CASE("constant metrics have zero drift and trivial diffusion") {
    const std::vector<double> x{0.3, -1.0, 2.0, 5.0};
    const FlatMetric flat(4);
    for (double v : drift(flat, x).components) CHECK(v == 0.0);
    CHECK(diffusion_factor(flat, x).full() == Matrix::identity(4));

    for (int m = 0; m <= 2; ++m) {
      const ConformalPlaneMetric conformal(m);
      const std::vector<double> v{0.2, 0.7};
      const auto b = drift(conformal, v).components;
      CHECK(max_abs(b) <= 1e-10);
      const double f = conformal_factor(m, TrianglePoint(v[0], v[1]));
      const auto s = diffusion_factor(conformal, v).full();
      CHECK(s(0, 0) == doctest::Approx(1.0 / std::sqrt(f)).epsilon(1e-14));
      CHECK(s(1, 1) == doctest::Approx(1.0 / std::sqrt(f)).epsilon(1e-14));
      CHECK(s(0, 1) == 0.0);
      CHECK(s(1, 0) == 0.0);
    }
  }

  TEST_CASE("diffusion factor is the lower Cholesky factor of the inverse") {
    CounterRng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 3 + rng.index(8), d = 2 + rng.index(2);
      const int m = static_cast<int>(rng.index(5));
      const auto c = random_curve(rng, n, d);
      const auto s = diffusion_factor(c, MetricOrder(m)).full();
      const auto g = metric_tensor(c, MetricOrder(m)).matrix;
      const std::size_t dim = c.dof();
      Matrix residual = multiply(multiply(s, s.transposed()), g);
      for (std::size_t i = 0; i < dim; ++i) residual(i, i) -= 1.0;
      // binary64 limits the residual to about eps cond(G), which passes 1e-10
      // only for moderate orders
      if (m <= 2) CHECK(frobenius_norm(residual) <= 1e-10 * std::sqrt(static_cast<double>(dim)));
      const Eigen::MatrixXd ge = oracle::metric_matrix(as_polygon(c), m);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ge, Eigen::EigenvaluesOnly);
      const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
      CHECK(frobenius_norm(residual) <= 100.0 * 0x1.0p-52 * cond * std::sqrt(static_cast<double>(dim)));
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i + 1; j < dim; ++j) CHECK(s(i, j) == 0.0);
      if (m <= 2) {
        const Eigen::MatrixXd ref = oracle::diffusion(as_polygon(c), m);
        double err = 0.0;
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j)
            err = std::max(err, std::abs(s(i, j) - ref(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        CHECK(err <= 1e-8 * ref.norm());
      }
    }
  }

  TEST_CASE("drift is rotation equivariant and translation derivatives vanish") {
    CounterRng rng(24);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 3 + rng.index(5), d = 2 + rng.index(2);
      const MetricOrder m(static_cast<int>(rng.index(3)));
      const auto c = random_curve(rng, n, d);
      const auto r = random_rotation(rng, d);
      const auto b = drift(c, m).components;
      const auto br = drift(rotated(c, r), m).components;
      const double scale = max_abs(b);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a) {
          double want = 0.0;
          for (std::size_t k = 0; k < d; ++k) want += r(a, k) * b[i * d + k];
          CHECK(std::abs(br[i * d + a] - want) <= 1e-8 * scale);
        }
      const SobolevMetric model(d, n, m);
      for (std::size_t a = 0; a < d; ++a) {
        const auto t = translation_derivatives(model, c.coords(), a);
        CHECK(t.inverse_metric_norm <= 1e-8);
        CHECK(t.log_density <= 1e-8);
      }
    }
  }

  TEST_CASE("flat geodesics are straight lines") {
    const FlatMetric flat(6, 2.0);
    const std::vector<double> x0{1, 2, 3, 4, 5, 6}, h0{0.5, -1, 0, 2, 1, -0.25};
    const auto path = geodesic_shoot(flat, x0, h0, 1.0, 1000);
    REQUIRE(path.size() == 1001);
    for (const auto& s : path)
      for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(s.position[j] - (x0[j] + s.t * h0[j])) <= 1e-12);
  }

  TEST_CASE("geodesic invariants") {
    CounterRng rng(25);
    for (int trial = 0; trial < 5; ++trial) {
      const auto c = random_curve(rng, 5, 2);
      const MetricOrder m(2);
      const auto h = unit_normalized(c, random_tangent(rng, 5, 2), m);
      const auto path = geodesic_shoot(c, h, 1.0, 1000, m);
      const double h0 = path.front().hamiltonian;
      CHECK(h0 == doctest::Approx(0.5).epsilon(1e-12));
      const auto e0 = edge_lengths(c);
      for (const auto& s : path) {
        CHECK(std::abs(s.hamiltonian - h0) <= 1e-6 * h0);
        const auto e = edge_lengths(DiscreteCurve(2, 5, s.position));
        for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(std::log(e[i] / e0[i])) <= s.t / 2.0 * (1 + 1e-6));
      }

      std::vector<double> back(h.components().begin(), h.components().end());
      for (double& x : back) x = -x;
      const auto rev = geodesic_shoot(c, TangentVector(2, 5, back), 0.3, 300, m);
      const DiscreteCurve end(2, 5, rev.back().position);
      auto v = velocity(end, rev.back().momentum, m);
      for (double& x : v) x = -x;
      const auto fwd = geodesic_shoot(end, TangentVector(2, 5, v), 0.3, 300, m);
      for (std::size_t j = 0; j < 10; ++j) CHECK(std::abs(fwd.back().position[j] - c.coords()[j]) <= 1e-8);
    }
  }

  TEST_CASE("log edge rate vanishes on translations and obeys the bound") {
    CounterRng rng(26);
    const auto c = random_curve(rng, 6, 2);
    const std::vector<double> t{1.0, 2.0};
    const auto trans = unit_normalized(c, TangentVector::constant(6, t), MetricOrder(2));
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(log_edge_rate(c, trans, i, MetricOrder(2))) <= 1e-12);

    for (int m : {2, 3}) {
      const double bound = 1.0 / std::pow(2.0, m - 1);
      double worst = 0.0;
      for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng.index(8);
        const auto cc = random_curve(rng, n, 2);
        const auto h = unit_normalized(cc, random_tangent(rng, n, 2), MetricOrder(m));
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(log_edge_rate(cc, h, i, MetricOrder(m))));
      }
      CHECK(worst <= bound + 1e-9);
    }
  }

  TEST_CASE("volume probe: flat has zero slope, m = 2 grows at most linearly") {
    const std::vector<double> radii{0.5, 1.0, 1.5, 2.0};
    const FlatMetric flat(6);
    const std::vector<double> x0(6, 0.0);
    ProbeOptions flat_options;
    flat_options.step = 1e-2;
    const auto g = probe_volume_growth(flat, x0, radii, 4, 1, flat_options);
    CHECK(std::abs(g.fit_slope) <= 1e-12);

    ProbeOptions options;
    options.step = 1e-2;
    const std::vector<double> r2{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    const auto rep = probe_volume_growth(make_circle(5), MetricOrder(2), r2, 6, 5, options);
    CHECK(rep.samples == 6);
    CHECK(rep.fit_relative_residual <= kLinearFitTolerance);
    CHECK(rep.edge_bound_violations == 0);
    CHECK(rep.edge_bound_checks > 0);
  }
}
