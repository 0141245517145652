#include "curvediff/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "curvediff/error.hpp"
#include "curvediff/kernels.hpp"
#include "curvediff/rng.hpp"

namespace curvediff {

namespace {

struct Factorized {
  Matrix lower;  // A = L Lᵀ
  double log_sqrt_det = 0.0;
  double condition_estimate = 1.0;
};

Factorized factorize(const MetricJet& jet) {
  Factorized f;
  if (!kernels::cholesky(jet.base, f.lower))
    throw SingularMetric("metric tensor is not numerically positive definite");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, logdet = 0.0;
  for (std::size_t i = 0; i < f.lower.rows(); ++i) {
    const double v = f.lower(i, i);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    logdet += std::log(v);
  }
  f.log_sqrt_det = static_cast<double>(jet.block) * logdet;
  f.condition_estimate = (hi / lo) * (hi / lo);
  return f;
}

Matrix inverse_from_factor(const Matrix& lower) {
  const std::size_t r = lower.rows();
  Matrix inv(r, r);
  std::vector<double> col(r);
  for (std::size_t k = 0; k < r; ++k) {
    std::fill(col.begin(), col.end(), 0.0);
    col[k] = 1.0;
    kernels::solve_lower(lower, col);
    kernels::solve_lower_transposed(lower, col);
    for (std::size_t i = 0; i < r; ++i) inv(i, k) = col[i];
  }
  return inv;
}

/// σ_A = J L'^{-T} J where J A J = L' L'ᵀ (J reverses indices).
Matrix lower_inverse_factor(const Matrix& a) {
  const std::size_t r = a.rows();
  Matrix reversed(r, r);
  for (std::size_t p = 0; p < r; ++p)
    for (std::size_t q = 0; q < r; ++q) reversed(p, q) = a(r - 1 - p, r - 1 - q);
  Matrix lp;
  if (!kernels::cholesky(reversed, lp)) throw SingularMetric("metric tensor is not numerically positive definite");
  Matrix sigma(r, r);
  std::vector<double> col(r);
  for (std::size_t k = 0; k < r; ++k) {
    std::fill(col.begin(), col.end(), 0.0);
    col[k] = 1.0;
    kernels::solve_lower_transposed(lp, col);  // column k of L'^{-T}
    for (std::size_t i = 0; i <= k; ++i) sigma(r - 1 - i, r - 1 - k) = col[i];
  }
  return sigma;
}

DriftVector drift_from(const MetricJet& jet, const Matrix& inv) {
  const std::size_t r = jet.base.rows(), s = jet.block;
  if (jet.dbase.size() != r * s) throw std::logic_error("drift needs metric derivatives");
  const auto& k = kernels::active();
  DriftVector b{std::vector<double>(r * s, 0.0)};
  std::vector<double> t(r), w(r);
  for (std::size_t p = 0; p < r; ++p) {
    for (std::size_t c = 0; c < s; ++c) {
      const Matrix& da = jet.dbase[p * s + c];
      // ½ ∂_i g^{ij}: row p of -A^{-1} ∂A A^{-1}, on channel c
      k.gemv(da.data().data(), r, r, inv.row(p).data(), t.data());
      k.gemv(inv.data().data(), r, r, t.data(), w.data());
      // ∂_i log √det G = (s/2) tr(A^{-1} ∂A)
      const double dlog = 0.5 * static_cast<double>(s) * k.dot(inv.data().data(), da.data().data(), r * r);
      for (std::size_t q = 0; q < r; ++q) b.components[q * s + c] += -0.5 * w[q] + 0.5 * inv(q, p) * dlog;
    }
  }
  return b;
}

}  // namespace

std::vector<double> DiffusionFactor::apply(std::span<const double> xi) const {
  const std::size_t r = base.rows(), s = block;
  if (xi.size() != r * s) throw BadShape("noise vector has wrong size");
  std::vector<double> out(r * s, 0.0);
  for (std::size_t p = 0; p < r; ++p)
    for (std::size_t q = 0; q <= p; ++q) {
      const double v = base(p, q);
      for (std::size_t c = 0; c < s; ++c) out[p * s + c] += v * xi[q * s + c];
    }
  return out;
}

ThirdOrderTensor metric_tensor_derivative(const DiscreteCurve& c, MetricOrder m) {
  const SobolevMetric model(c.dim(), c.size(), m);
  const auto jet = model.jet(c.coords(), true);
  const std::size_t dim = c.dof(), s = jet.block;
  ThirdOrderTensor t(dim);
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t p = 0; p < jet.base.rows(); ++p)
      for (std::size_t q = 0; q < jet.base.rows(); ++q)
        for (std::size_t a = 0; a < s; ++a) t(p * s + a, q * s + a, j) = jet.dbase[j](p, q);
  return t;
}

GeneratorTerms generator_terms(const MetricModel& model, std::span<const double> x) {
  const auto jet = model.jet(x, true);
  const auto f = factorize(jet);
  const Matrix inv = inverse_from_factor(f.lower);
  GeneratorTerms g;
  g.drift = drift_from(jet, inv);
  g.sigma = DiffusionFactor{jet.block, lower_inverse_factor(jet.base)};
  g.log_sqrt_det = f.log_sqrt_det;
  g.condition_estimate = f.condition_estimate;
  return g;
}

DriftVector drift(const MetricModel& model, std::span<const double> x) {
  const auto jet = model.jet(x, true);
  const auto f = factorize(jet);
  return drift_from(jet, inverse_from_factor(f.lower));
}

DriftVector drift(const DiscreteCurve& c, MetricOrder m) {
  return drift(SobolevMetric(c.dim(), c.size(), m), c.coords());
}

DiffusionFactor diffusion_factor(const MetricModel& model, std::span<const double> x) {
  const auto jet = model.jet(x, false);
  return {jet.block, lower_inverse_factor(jet.base)};
}

DiffusionFactor diffusion_factor(const DiscreteCurve& c, MetricOrder m) {
  return diffusion_factor(SobolevMetric(c.dim(), c.size(), m), c.coords());
}

double log_sqrt_det(const MetricModel& model, std::span<const double> x) {
  return factorize(model.jet(x, false)).log_sqrt_det;
}

TranslationDerivatives translation_derivatives(const MetricModel& model, std::span<const double> x,
                                               std::size_t direction) {
  const auto jet = model.jet(x, true);
  const std::size_t r = jet.base.rows(), s = jet.block;
  if (direction >= s) throw BadShape("translation direction out of range");
  Matrix dt(r, r);
  for (std::size_t p = 0; p < r; ++p) kernels::axpy(1.0, jet.dbase[p * s + direction].data(), dt.data());
  const Matrix inv = inverse_from_factor(factorize(jet).lower);
  const Matrix dinv = multiply(multiply(inv, dt), inv);  // up to sign
  TranslationDerivatives out;
  out.inverse_metric_norm = frobenius_norm(dinv) / frobenius_norm(inv);
  out.log_density = std::abs(0.5 * static_cast<double>(s) * kernels::dot(inv.data(), dt.data()));
  return out;
}

// ---- geodesics --------------------------------------------------------------

namespace {

struct PhasePoint {
  std::vector<double> x, p;
};

struct Velocity {
  PhasePoint d;
  double hamiltonian;
};

/// u = G^{-1} p for G = A ⊗ I_s; U[q][c] = u_{q s + c}.
std::vector<double> solve_metric(const Matrix& lower, std::size_t s, std::span<const double> p) {
  const std::size_t r = lower.rows();
  std::vector<double> u(p.size()), col(r);
  for (std::size_t c = 0; c < s; ++c) {
    for (std::size_t q = 0; q < r; ++q) col[q] = p[q * s + c];
    kernels::solve_lower(lower, col);
    kernels::solve_lower_transposed(lower, col);
    for (std::size_t q = 0; q < r; ++q) u[q * s + c] = col[q];
  }
  return u;
}

Velocity hamilton_rhs(const MetricModel& model, const PhasePoint& z) {
  const auto jet = model.jet(z.x, true);
  const auto f = factorize(jet);
  const std::size_t r = jet.base.rows(), s = jet.block;
  Velocity v;
  v.d.x = solve_metric(f.lower, s, z.p);
  v.hamiltonian = 0.5 * kernels::dot(z.p, v.d.x);
  v.d.p.assign(z.p.size(), 0.0);
  std::vector<double> uc(r), tmp(r);
  for (std::size_t c = 0; c < s; ++c) {
    for (std::size_t q = 0; q < r; ++q) uc[q] = v.d.x[q * s + c];
    for (std::size_t j = 0; j < model.dim(); ++j) {
      kernels::gemv(jet.dbase[j], uc, tmp);
      v.d.p[j] += 0.5 * kernels::dot(uc, tmp);
    }
  }
  return v;
}

PhasePoint advance(const PhasePoint& z, const PhasePoint& dz, double h) {
  PhasePoint out = z;
  kernels::axpy(h, dz.x, out.x);
  kernels::axpy(h, dz.p, out.p);
  return out;
}

}  // namespace

std::vector<GeodesicState> geodesic_shoot(const MetricModel& model, std::span<const double> x0,
                                          std::span<const double> h0, double duration, std::size_t steps,
                                          const GeodesicOptions& options) {
  if (steps == 0) throw std::invalid_argument("geodesic_shoot needs at least one step");
  if (x0.size() != model.dim() || h0.size() != model.dim()) throw BadShape("geodesic initial data has wrong size");
  if (std::all_of(h0.begin(), h0.end(), [](double v) { return v == 0.0; }))
    throw std::invalid_argument("geodesic_shoot needs a nonzero initial velocity");
  model.check_domain(x0);

  PhasePoint z{{x0.begin(), x0.end()}, std::vector<double>(x0.size())};
  {
    const auto jet = model.jet(x0, false);
    const Matrix g = jet.full();
    kernels::gemv(g, h0, z.p);
  }

  const double h = duration / static_cast<double>(steps);
  std::vector<GeodesicState> path;
  path.reserve(steps + 1);

  auto k1 = hamilton_rhs(model, z);
  const double h_initial = k1.hamiltonian;
  path.push_back({0.0, z.x, z.p, h_initial});

  for (std::size_t k = 0; k < steps; ++k) {
    const double t_next = static_cast<double>(k + 1) * h;
    try {
      const auto k2 = hamilton_rhs(model, advance(z, k1.d, 0.5 * h));
      const auto k3 = hamilton_rhs(model, advance(z, k2.d, 0.5 * h));
      const auto k4 = hamilton_rhs(model, advance(z, k3.d, h));
      for (std::size_t i = 0; i < z.x.size(); ++i) {
        z.x[i] += h / 6.0 * (k1.d.x[i] + 2.0 * k2.d.x[i] + 2.0 * k3.d.x[i] + k4.d.x[i]);
        z.p[i] += h / 6.0 * (k1.d.p[i] + 2.0 * k2.d.p[i] + 2.0 * k3.d.p[i] + k4.d.p[i]);
      }
      model.check_domain(z.x);
      k1 = hamilton_rhs(model, z);
    } catch (const RegularityViolation& e) {
      throw RegularityViolation(e.what(), e.edge(), t_next);
    } catch (const SingularMetric&) {
      throw RegularityViolation("metric degenerated along geodesic", 0, t_next);
    }
    const double rel = std::abs(k1.hamiltonian - h_initial) / std::abs(h_initial);
    if (rel > options.energy_guard)
      throw StepTooLarge("Hamiltonian drift " + std::to_string(rel) + " exceeds guard", rel);
    path.push_back({t_next, z.x, z.p, k1.hamiltonian});
  }
  return path;
}

std::vector<GeodesicState> geodesic_shoot(const DiscreteCurve& c0, const TangentVector& h0, double duration,
                                          std::size_t steps, MetricOrder m, const GeodesicOptions& options) {
  if (h0.dim() != c0.dim() || h0.size() != c0.size()) throw BadShape("tangent vector shape does not match curve");
  return geodesic_shoot(SobolevMetric(c0.dim(), c0.size(), m), c0.coords(), h0.components(), duration, steps,
                        options);
}

double log_edge_rate(const DiscreteCurve& c, const TangentVector& h, std::size_t i, MetricOrder /*m*/) {
  if (h.dim() != c.dim() || h.size() != c.size()) throw BadShape("tangent vector shape does not match curve");
  const std::size_t d = c.dim(), n = c.size();
  i %= n;
  const std::size_t j = (i + 1) % n;
  double num = 0.0, len2 = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    const double e = c.vertex(j)[a] - c.vertex(i)[a];
    num += e * (h.at(j)[a] - h.at(i)[a]);
    len2 += e * e;
  }
  return num / len2;
}

TangentVector unit_normalized(const DiscreteCurve& c, const TangentVector& h, MetricOrder m) {
  const double norm = std::sqrt(metric_eval(c, h, h, m));
  if (!(norm > 0.0)) throw std::invalid_argument("cannot normalize a zero tangent vector");
  std::vector<double> v(h.components().begin(), h.components().end());
  for (double& x : v) x /= norm;
  return {h.dim(), h.size(), std::move(v)};
}

// ---- volume growth ----------------------------------------------------------

namespace {

struct ShootSummary {
  std::vector<double> log_sqrt_det_max;  // per radius
  std::size_t checks = 0;
  std::size_t violations = 0;
};

ShootSummary probe_one(const MetricModel& model, std::span<const double> x0, std::span<const double> radii,
                       std::uint64_t seed, const ProbeOptions& options) {
  const std::size_t dim = model.dim();
  const double r_max = radii.back();
  const auto steps = static_cast<std::size_t>(std::ceil(r_max / options.step - 1e-9));

  // random direction, normalized to unit speed
  auto h = NoiseStream(seed).draw(0, dim);
  const auto jet = model.jet(x0, false);
  std::vector<double> gh(dim);
  kernels::gemv(jet.full(), h, gh);
  const double norm = std::sqrt(kernels::dot(h, gh));
  for (double& v : h) v /= norm;

  const auto path = geodesic_shoot(model, x0, h, static_cast<double>(steps) * options.step, steps);

  ShootSummary out;
  out.log_sqrt_det_max.assign(radii.size(), -std::numeric_limits<double>::infinity());

  std::vector<double> e0;
  const std::size_t cd = options.curve_dim.value_or(0);
  auto lengths = [&](std::span<const double> x) {
    const std::size_t n = x.size() / cd;
    std::vector<double> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t a = 0; a < cd; ++a) {
        const double v = x[((i + 1) % n) * cd + a] - x[i * cd + a];
        s += v * v;
      }
      l[i] = std::sqrt(s);
    }
    return l;
  };
  double c0 = 0.0, c1 = 0.0, rate = 0.0;
  const bool check_edges = options.curve_dim && options.edge_bound_order;
  if (check_edges) {
    e0 = lengths(x0);
    c0 = *std::min_element(e0.begin(), e0.end());
    c1 = *std::max_element(e0.begin(), e0.end());
    rate = std::ldexp(1.0, -(options.edge_bound_order->value() - 1));
  }

  for (const auto& state : path) {
    const double lsd = log_sqrt_det(model, state.position);
    for (std::size_t k = 0; k < radii.size(); ++k)
      if (state.t <= radii[k] + 1e-12) out.log_sqrt_det_max[k] = std::max(out.log_sqrt_det_max[k], lsd);
    if (check_edges) {
      const double lo = c0 * std::exp(-rate * state.t) * (1.0 - 1e-9);
      const double hi = c1 * std::exp(rate * state.t) * (1.0 + 1e-9);
      for (double l : lengths(state.position)) {
        ++out.checks;
        if (l < lo || l > hi) ++out.violations;
      }
    }
  }
  return out;
}

}  // namespace

GrowthReport probe_volume_growth(const MetricModel& model, std::span<const double> x0,
                                 std::span<const double> radii, std::size_t samples, std::uint64_t seed,
                                 const ProbeOptions& options) {
  if (radii.empty()) throw std::invalid_argument("probe needs at least one radius");
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (!(radii[k] > 0.0) || (k > 0 && !(radii[k] > radii[k - 1])))
      throw std::invalid_argument("radii must be positive and increasing");
  if (samples == 0) throw std::invalid_argument("probe needs at least one sample");

  std::vector<ShootSummary> results(samples);
  std::size_t workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, samples);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < samples; k += workers)
            results[k] = probe_one(model, x0, radii, derive_seed(seed, k + 1), options);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  GrowthReport rep;
  rep.radii.assign(radii.begin(), radii.end());
  rep.samples = samples;
  rep.log_sqrt_det_max.assign(radii.size(), -std::numeric_limits<double>::infinity());
  for (const auto& r : results) {
    for (std::size_t k = 0; k < radii.size(); ++k)
      rep.log_sqrt_det_max[k] = std::max(rep.log_sqrt_det_max[k], r.log_sqrt_det_max[k]);
    rep.edge_bound_checks += r.checks;
    rep.edge_bound_violations += r.violations;
  }

  // least squares y = a + b r
  const auto n = static_cast<double>(radii.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    sx += radii[k];
    sy += rep.log_sqrt_det_max[k];
    sxx += radii[k] * radii[k];
    sxy += radii[k] * rep.log_sqrt_det_max[k];
  }
  const double denom = n * sxx - sx * sx;
  rep.fit_slope = denom > 0 ? (n * sxy - sx * sy) / denom : 0.0;
  rep.fit_intercept = (sy - rep.fit_slope * sx) / n;
  double ss = 0.0;
  const auto [ymin, ymax] = std::minmax_element(rep.log_sqrt_det_max.begin(), rep.log_sqrt_det_max.end());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double res = rep.log_sqrt_det_max[k] - rep.fit_intercept - rep.fit_slope * radii[k];
    ss += res * res;
  }
  const double range = *ymax - *ymin;
  rep.fit_relative_residual = range > 1e-12 ? std::sqrt(ss / n) / range : 0.0;
  // log V(r) ≲ dn log(2r) + (linear in r) makes ∫ r dr / log V(r) diverge.
  rep.grigoryan_divergent = std::isfinite(rep.fit_slope) && rep.fit_relative_residual <= kLinearFitTolerance;
  return rep;
}

GrowthReport probe_volume_growth(const DiscreteCurve& c0, MetricOrder m, std::span<const double> radii,
                                 std::size_t samples, std::uint64_t seed, ProbeOptions options) {
  if (m.value() < 2) throw std::invalid_argument("volume growth probe requires m >= 2 (geodesic completeness)");
  options.curve_dim = c0.dim();
  options.edge_bound_order = m;
  return probe_volume_growth(SobolevMetric(c0.dim(), c0.size(), m), c0.coords(), radii, samples, seed, options);
}

}  // namespace curvediff
