#include "curvediff/triangle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "curvediff/error.hpp"
#include "curvediff/rng.hpp"

namespace curvediff {

TrianglePoint::TrianglePoint(double x, double y) : x_(x), y_(y) {
  if (!std::isfinite(x) || !std::isfinite(y)) throw DomainViolation("non-finite triangle apex");
  if (!(e0() > kEdgeEpsilon) || !(e1() > kEdgeEpsilon))
    throw DomainViolation("triangle apex coincides with a fixed vertex");
}

DiscreteCurve TrianglePoint::curve() const { return {2, 3, {1.0, 0.0, x_, y_, -1.0, 0.0}}; }

double conformal_factor(int m, const TrianglePoint& v) {
  if (m < 0 || m > 2) throw std::invalid_argument("closed-form conformal factor exists only for m = 0, 1, 2");
  return conformal_factor_closed_form<double>(m, v.x(), v.y());
}

double restricted_metric_oracle(MetricOrder m, const TrianglePoint& v, std::array<double, 2> h, MuRule rule) {
  const TangentVector t(2, 3, {0.0, 0.0, h[0], h[1], 0.0, 0.0});
  return metric_eval(v.curve(), t, t, m, rule);
}

double restricted_factor(MetricOrder m, const TrianglePoint& v) {
  if (m.value() <= 2) return conformal_factor(m.value(), v);
  return restricted_metric_oracle(m, v, {1.0, 0.0});
}

double anisotropy(MetricOrder m, const TrianglePoint& v) {
  const DiscreteCurve c = v.curve();
  const TangentVector u(2, 3, {0, 0, 1, 0, 0, 0});
  const TangentVector w(2, 3, {0, 0, 0, 1, 0, 0});
  const double guu = metric_eval(c, u, u, m);
  const double gww = metric_eval(c, w, w, m);
  const double guw = metric_eval(c, u, w, m);
  return std::max(std::abs(guu - gww), std::abs(guw)) / guu;
}

std::vector<double> log_spaced_radii(double hi, double lo, std::size_t num) {
  if (num < 2 || !(hi > lo) || !(lo > 0.0)) throw std::invalid_argument("need hi > lo > 0 and at least two radii");
  std::vector<double> r(num);
  for (std::size_t k = 0; k < num; ++k)
    r[k] = std::exp(std::log(hi) + (std::log(lo) - std::log(hi)) * static_cast<double>(k) /
                                       static_cast<double>(num - 1));
  return r;
}

BlowupFit estimate_blowup_exponent(MetricOrder m, std::span<const double> radii) {
  if (radii.size() < 2) throw std::invalid_argument("need at least two radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0 && radii[k] < 1.0)) throw std::invalid_argument("radii must lie in (0, 1)");
    if (k > 0 && !(radii[k] < radii[k - 1])) throw std::invalid_argument("radii must decrease");
  }
  BlowupFit fit;
  fit.from_closed_form = m.value() <= 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double r : radii) {
    const TrianglePoint v(1.0 - r, 0.0);
    const double lx = std::log(r), ly = std::log(restricted_factor(m, v));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    fit.max_anisotropy = std::max(fit.max_anisotropy, anisotropy(m, v));
  }
  const auto n = static_cast<double>(radii.size());
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.constant = std::exp((sy - fit.exponent * sx) / n);
  return fit;
}

std::string to_string(RadialClass c) {
  switch (c) {
    case RadialClass::Convergent:
      return "CONVERGENT";
    case RadialClass::Divergent:
      return "DIVERGENT";
    case RadialClass::Undecided:
      break;
  }
  return "UNDECIDED";
}

namespace {

using Integrand = std::function<long double(long double)>;

long double simpson(long double a, long double b, long double fa, long double fm,
                    long double fb) {
  return (b - a) / 6.0L * (fa + 4.0L * fm + fb);
}

long double adaptive_simpson(const Integrand& g, long double a, long double b, long double fa, long double fm,
                             long double fb, long double whole, long double tol, int depth) {
  const long double m = 0.5L * (a + b);
  const long double lm = 0.5L * (a + m), rm = 0.5L * (m + b);
  const long double flm = g(lm), frm = g(rm);
  const long double left = simpson(a, m, fa, flm, fm);
  const long double right = simpson(m, b, fm, frm, fb);
  const long double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0L * tol) return left + right + delta / 15.0L;
  return adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5L * tol, depth - 1) +
         adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5L * tol, depth - 1);
}

/// ∫_a^b g(s) ds
long double integrate(const Integrand& g, long double a, long double b, long double rel_tol) {
  const long double fa = g(a), fb = g(b), fm = g(0.5L * (a + b));
  const long double whole = simpson(a, b, fa, fm, fb);
  const long double tol = std::max(1e-13L, rel_tol * std::fabs(whole));
  return adaptive_simpson(g, a, b, fa, fm, fb, whole, tol, 30);
}

}  // namespace

RadialResult radial_length(MetricOrder m, double r0, std::size_t max_levels) {
  if (!(r0 > 0.0 && r0 < 1.0)) throw std::invalid_argument("r0 must lie in (0, 1)");
  // sqrt(f) along v(r) = (1 - r, 0), where e0 = r and e1 = 2 - r; long double
  // keeps f_2 ~ 8/r² finite deep into the geometric sequence.
  const int order = m.value();
  // The oracle is only accurate to a few ulps of double.
  const long double rel_tol = order <= 2 ? 1e-12L : 1e-8L;
  std::function<long double(long double)> root_f;
  if (order <= 2) {
    root_f = [order](long double r) {
      return std::sqrt(conformal_factor_from_edges<long double>(order, r, 2.0L - r));
    };
  } else {
    root_f = [m](long double r) {
      return static_cast<long double>(std::sqrt(restricted_factor(m, TrianglePoint(1.0 - static_cast<double>(r), 0.0))));
    };
  }
  // r = e^s, dr = r ds
  const Integrand g = [&](long double s) {
    const long double r = std::exp(s);
    return root_f(r) * r;
  };

  RadialResult res;
  long double sum = 0.0L, prev = 0.0L;
  long double upper = std::log(static_cast<long double>(r0));
  const long double step = std::log(2.0L);
  // The oracle needs 1 - r to stay distinct from 1 in double.
  const long double oracle_floor = std::log(1e-10L);
  for (std::size_t k = 0; k < max_levels; ++k) {
    if (order > 2 && upper - step < oracle_floor) {
      if (sum > kRadialDivergenceThreshold) res.classification = RadialClass::Divergent;
      return res;
    }
    const long double inc = integrate(g, upper - step, upper, rel_tol);
    upper -= step;
    sum += inc;
    res.levels = k + 1;
    res.last_increment = static_cast<double>(inc);
    res.value = static_cast<double>(sum);
    if (!std::isfinite(static_cast<double>(sum))) break;
    if (res.levels >= kRadialMinLevels && sum > kRadialDivergenceThreshold) {
      res.classification = RadialClass::Divergent;
      return res;
    }
    if (k > 0 && prev > 0.0L) {
      const long double ratio = inc / prev;
      if (ratio < 1.0L) {
        const long double tail = inc * ratio / (1.0L - ratio);
        if (inc < kRadialTailTolerance && tail < kRadialTailTolerance) {
          res.classification = RadialClass::Convergent;
          res.value = static_cast<double>(sum + tail);
          return res;
        }
      }
    }
    prev = inc;
  }
  return res;
}

ConformalPlaneMetric::ConformalPlaneMetric(int m) : m_(m) {
  if (m < 0 || m > 2) throw std::invalid_argument("conformal plane metric needs m in {0,1,2}");
}

MetricJet ConformalPlaneMetric::jet(std::span<const double> x, bool with_derivatives) const {
  if (x.size() != 2) throw BadShape("conformal plane metric is two-dimensional");
  MetricJet jet;
  jet.block = 2;
  jet.base = Matrix(1, 1, conformal_factor_closed_form<double>(m_, x[0], x[1]));
  if (with_derivatives) {
    using D = Dual<double>;
    const D fx = conformal_factor_closed_form<D>(m_, D::variable(x[0]), D(x[1]));
    const D fy = conformal_factor_closed_form<D>(m_, D(x[0]), D::variable(x[1]));
    jet.dbase = {Matrix(1, 1, fx.eps), Matrix(1, 1, fy.eps)};
  }
  return jet;
}

void ConformalPlaneMetric::check_domain(std::span<const double> x) const {
  if (!(std::hypot(x[0] - 1.0, x[1]) > kEdgeEpsilon)) throw RegularityViolation("apex reached (1,0)", 0);
  if (!(std::hypot(x[0] + 1.0, x[1]) > kEdgeEpsilon)) throw RegularityViolation("apex reached (-1,0)", 1);
}

TriangleTrajectory simulate_triangle_bm(int m, const TrianglePoint& v0, double dt, std::size_t n_steps,
                                        std::uint64_t seed, double edge_floor, std::size_t record_every) {
  if (m < 0 || m > 2) throw std::invalid_argument("triangle Brownian motion needs m in {0,1,2}");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (record_every == 0) throw std::invalid_argument("record_every must be at least 1");

  TriangleTrajectory tr;
  const NoiseStream noise(seed);
  std::array<double, 2> v{v0.x(), v0.y()};
  double running_min = v0.singularity_distance();
  tr.max_excursion = std::hypot(v[0], v[1]);
  auto record = [&](std::size_t k) {
    tr.steps.push_back(k);
    tr.times.push_back(static_cast<double>(k) * dt);
    tr.points.push_back(v);
    tr.min_distance.push_back(running_min);
  };
  record(0);
  const double sdt = std::sqrt(dt);
  std::array<double, 2> xi{};
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double f = conformal_factor_closed_form<double>(m, v[0], v[1]);
    noise.draw(k, xi);
    const double s = sdt / std::sqrt(f);
    v = {v[0] + s * xi[0], v[1] + s * xi[1]};
    const double dist = std::min(std::hypot(v[0] - 1.0, v[1]), std::hypot(v[0] + 1.0, v[1]));
    running_min = std::min(running_min, dist);
    tr.max_excursion = std::max(tr.max_excursion, std::hypot(v[0], v[1]));
    tr.completed_steps = k + 1;
    if (!(dist >= edge_floor) || !std::isfinite(dist)) {
      tr.singularity_approach_step = k + 1;
      record(k + 1);
      break;
    }
    if ((k + 1) % record_every == 0 || k + 1 == n_steps) record(k + 1);
  }
  tr.min_singularity_distance = running_min;
  return tr;
}

TriangleBmReport triangle_bm_ensemble(int m, const TrianglePoint& v0, double dt, std::size_t n_steps,
                                      std::size_t runs, std::uint64_t seed, double edge_floor,
                                      std::size_t threads) {
  if (runs == 0) throw std::invalid_argument("need at least one run");
  TriangleBmReport rep;
  rep.m = m;
  rep.runs = runs;
  rep.seeds.resize(runs);
  rep.min_distance.resize(runs);
  rep.max_excursion.resize(runs);
  std::vector<char> approached(runs, 0);
  std::size_t workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, runs);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < runs; k += workers) {
            const auto s = derive_seed(seed, k);
            const auto tr = simulate_triangle_bm(m, v0, dt, n_steps, s, edge_floor, n_steps ? n_steps : 1);
            rep.seeds[k] = s;
            rep.min_distance[k] = tr.min_singularity_distance;
            rep.max_excursion[k] = tr.max_excursion;
            approached[k] = tr.singularity_approach_step.has_value();
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (char a : approached) rep.singularity_approaches += a ? 1 : 0;
  rep.approach_fraction = static_cast<double>(rep.singularity_approaches) / static_cast<double>(runs);
  return rep;
}

ConformalGrid conformal_grid(int m, std::size_t resolution, double extent, std::optional<double> clamp) {
  if (m < 0 || m > 2) throw std::invalid_argument("grid export needs m in {0,1,2}");
  if (resolution == 0 || !(extent > 0.0)) throw std::invalid_argument("bad grid specification");
  ConformalGrid g;
  g.m = m;
  g.resolution = resolution;
  g.extent = extent;
  const double h = 2.0 * extent / static_cast<double>(resolution);
  const std::size_t cells = resolution * resolution;
  g.x.resize(cells);
  g.y.resize(cells);
  g.f.resize(cells);
  std::vector<char> singular(cells, 0);
  double largest = 0.0;
  for (std::size_t j = 0; j < resolution; ++j) {
    for (std::size_t i = 0; i < resolution; ++i) {
      const std::size_t c = j * resolution + i;
      const double x = -extent + (static_cast<double>(i) + 0.5) * h;
      const double y = -extent + (static_cast<double>(j) + 0.5) * h;
      g.x[c] = x;
      g.y[c] = y;
      for (double sx : {1.0, -1.0})
        if (std::abs(x - sx) <= 0.5 * h && std::abs(y) <= 0.5 * h) singular[c] = 1;
      const double e0 = std::hypot(x - 1.0, y), e1 = std::hypot(x + 1.0, y);
      if (singular[c] || !(e0 > kEdgeEpsilon) || !(e1 > kEdgeEpsilon)) {
        singular[c] = 1;
        continue;
      }
      g.f[c] = conformal_factor_closed_form<double>(m, x, y);
      largest = std::max(largest, g.f[c]);
    }
  }
  g.clamp = clamp.value_or(largest);
  for (std::size_t c = 0; c < cells; ++c) {
    if (singular[c] || g.f[c] > g.clamp) {
      g.f[c] = g.clamp;
      ++g.clamped_cells;
    }
  }
  return g;
}

}  // namespace curvediff
