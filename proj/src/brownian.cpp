#include "curvediff/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "curvediff/calculus.hpp"
#include "curvediff/error.hpp"
#include "curvediff/kernels.hpp"
#include "curvediff/rng.hpp"

namespace curvediff {

void SimulationConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (record_every == 0) throw std::invalid_argument("record_every must be at least 1");
  if (!(edge_floor > 0.0)) throw std::invalid_argument("edge_floor must be positive");
  if (metric && metric->dim() != initial.dof())
    throw std::invalid_argument("metric dimension does not match the initial curve");
}

std::vector<double> em_step(const MetricModel& model, std::span<const double> x, double dt,
                            std::span<const double> xi) {
  if (xi.size() != x.size()) throw BadShape("noise vector has wrong size");
  const auto terms = generator_terms(model, x);
  std::vector<double> next(x.begin(), x.end());
  kernels::axpy(dt, terms.drift.components, next);
  kernels::axpy(std::sqrt(dt), terms.sigma.apply(xi), next);
  return next;
}

namespace {

std::pair<std::size_t, double> shortest_edge(std::span<const double> x, std::size_t d) {
  const std::size_t n = x.size() / d;
  std::size_t arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const double v = x[((i + 1) % n) * d + a] - x[i * d + a];
      s += v * v;
    }
    if (std::sqrt(s) < best) {
      best = std::sqrt(s);
      arg = i;
    }
  }
  return {arg, best};
}

DiscreteCurve checked_curve(std::size_t d, std::size_t n, std::vector<double> x, double edge_floor,
                            std::size_t step) {
  const auto [edge, len] = shortest_edge(x, d);
  if (!(len > edge_floor))
    throw EdgeCollapse("edge " + std::to_string(edge) + " fell to " + std::to_string(len) + " at step " +
                           std::to_string(step),
                       step, edge, len);
  return {d, n, std::move(x)};
}

}  // namespace

DiscreteCurve em_step(const MetricModel& model, const DiscreteCurve& v, double dt, std::span<const double> xi,
                      double edge_floor, std::size_t step) {
  return checked_curve(v.dim(), v.size(), em_step(model, v.coords(), dt, xi), edge_floor, step);
}

DiscreteCurve em_step(const DiscreteCurve& v, MetricOrder m, double dt, std::span<const double> xi,
                      double edge_floor, std::size_t step) {
  return em_step(SobolevMetric(v.dim(), v.size(), m), v, dt, xi, edge_floor, step);
}

TrajectoryRecord simulate(const SimulationConfig& config) {
  config.validate();
  const std::size_t d = config.initial.dim(), n = config.initial.size();
  std::shared_ptr<const MetricModel> model = config.metric;
  if (!model) model = std::make_shared<SobolevMetric>(d, n, config.order);

  TrajectoryRecord rec;
  rec.d = d;
  auto record = [&](std::size_t step, const DiscreteCurve& c) {
    rec.steps.push_back(step);
    rec.times.push_back(static_cast<double>(step) * config.dt);
    rec.centroid_series.push_back(centroid(c));
    const auto lens = edge_lengths(c);
    rec.min_edge_series.push_back(*std::min_element(lens.begin(), lens.end()));
    rec.length_series.push_back(total_length(c));
    rec.curves.push_back(c);
  };

  const NoiseStream noise(config.seed);
  std::vector<double> xi(d * n);
  std::vector<double> x(config.initial.coords().begin(), config.initial.coords().end());
  std::size_t ill_conditioned = 0;
  DiscreteCurve current = config.initial;
  record(0, current);

  for (std::size_t k = 0; k < config.n_steps; ++k) {
    try {
      const auto terms = generator_terms(*model, x);
      if (terms.condition_estimate > kIllConditioned && ill_conditioned++ == 0)
        rec.events.push_back({"ill_conditioned", k, std::nullopt,
                              "condition estimate " + std::to_string(terms.condition_estimate)});
      noise.draw(k, xi);
      kernels::axpy(config.dt, terms.drift.components, x);
      kernels::axpy(std::sqrt(config.dt), terms.sigma.apply(xi), x);
      current = checked_curve(d, n, x, config.edge_floor, k + 1);
    } catch (const EdgeCollapse& e) {
      rec.events.push_back({"edge_collapse", e.step(), e.edge(), e.what()});
      rec.terminated_early = true;
      break;
    } catch (const SingularMetric& e) {
      rec.events.push_back({"singular_metric", k, std::nullopt, e.what()});
      rec.terminated_early = true;
      break;
    }
    rec.completed_steps = k + 1;
    if ((k + 1) % config.record_every == 0 || k + 1 == config.n_steps) record(k + 1, current);
  }
  if (rec.terminated_early && rec.steps.back() != rec.completed_steps) record(rec.completed_steps, current);
  if (ill_conditioned > 1)
    rec.events.push_back({"ill_conditioned", rec.completed_steps, std::nullopt,
                          std::to_string(ill_conditioned) + " steps above the condition threshold"});
  return rec;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EnsembleReport ensemble(const SimulationConfig& config, std::size_t n_runs, std::size_t threads) {
  if (n_runs == 0) throw std::invalid_argument("ensemble needs at least one run");
  config.validate();

  struct Series {
    std::vector<std::size_t> steps;
    std::vector<double> min_edge, length, displacement;
    RunSummary summary;
  };
  std::vector<Series> runs(n_runs);
  std::size_t workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n_runs);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < n_runs; k += workers) {
            SimulationConfig cfg = config;
            cfg.seed = derive_seed(config.seed, k);
            const auto rec = simulate(cfg);
            Series s;
            s.steps = rec.steps;
            s.min_edge = rec.min_edge_series;
            s.length = rec.length_series;
            for (const auto& c : rec.centroid_series) {
              double acc = 0.0;
              for (std::size_t a = 0; a < c.size(); ++a) {
                const double v = c[a] - rec.centroid_series.front()[a];
                acc += v * v;
              }
              s.displacement.push_back(std::sqrt(acc));
            }
            s.summary = {cfg.seed, rec.completed_steps, rec.terminated_early, rec.events};
            runs[k] = std::move(s);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Recording grid of a run that completes every step.
  EnsembleReport rep;
  for (std::size_t k = 0; k <= config.n_steps; ++k)
    if (k % config.record_every == 0 || k == config.n_steps) rep.steps.push_back(k);
  for (std::size_t k : rep.steps) rep.times.push_back(static_cast<double>(k) * config.dt);

  for (std::size_t t = 0; t < rep.steps.size(); ++t) {
    std::vector<double> me, len, disp;
    for (const auto& r : runs) {
      const auto it = std::find(r.steps.begin(), r.steps.end(), rep.steps[t]);
      if (it == r.steps.end()) continue;
      const auto idx = static_cast<std::size_t>(it - r.steps.begin());
      me.push_back(r.min_edge[idx]);
      len.push_back(r.length[idx]);
      disp.push_back(r.displacement[idx]);
    }
    rep.alive.push_back(me.size());
    for (auto [series, data] : {std::pair{&rep.min_edge, &me}, {&rep.length, &len}, {&rep.centroid_displacement, &disp}}) {
      series->q10.push_back(quantile(*data, 0.1));
      series->q50.push_back(quantile(*data, 0.5));
      series->q90.push_back(quantile(*data, 0.9));
    }
  }
  for (auto& r : runs) rep.runs.push_back(std::move(r.summary));
  return rep;
}

}  // namespace curvediff
