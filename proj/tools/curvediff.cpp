// curvediff: Brownian motion and related experiments on discrete closed curves.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "curvediff/brownian.hpp"
#include "curvediff/calculus.hpp"
#include "curvediff/checks.hpp"
#include "curvediff/curve.hpp"
#include "curvediff/error.hpp"
#include "curvediff/io.hpp"
#include "curvediff/kernels.hpp"
#include "curvediff/rng.hpp"
#include "curvediff/sampling.hpp"
#include "curvediff/triangle.hpp"
#include "curvediff/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace curvediff;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// Runs above either limit need --extended.
constexpr std::size_t kMaxDefaultVertices = 32;
constexpr std::size_t kMaxDefaultSteps = 10000;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat JSON objects map keys to long option names of the selected
/// subcommand; nested objects address subcommands, e.g. {"simulate": {"m": 2}}.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<std::string> parents;
    if (const auto subs = app_->get_subcommands(); !subs.empty()) parents.push_back(subs.front()->get_name());
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object())
        collect(value, {key}, items);
      else
        collect(json{{key, value}}, parents, items);
    }
    return items;
  }

 private:
  const CLI::App* app_;

  static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  static void collect(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        collect(value, next, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(value));
      out.push_back(std::move(item));
    }
  }
};

struct Common {
  std::string out = "out";
  std::uint64_t seed = 0;
  std::string kernels = "auto";
  std::size_t threads = 0;
};

struct ShapeArgs {
  std::string shape = "circle";
  std::string curve_file;
  std::size_t n = 12;
  std::size_t d = 2;
  double radius = 1.0;
};

struct SimArgs {
  ShapeArgs shape;
  int m = 2;
  double dt = kDefaultDt;
  std::size_t steps = 1000;
  std::optional<double> t_end;
  std::size_t record_every = kDefaultRecordEvery;
  double edge_floor = kDefaultEdgeFloor;
  std::string metric = "sobolev";
  bool svg = false;
  std::size_t svg_stride = 1;
  bool extended = false;
  std::size_t runs = 10;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "Base seed (CURVEDIFF_SEED overrides)")->capture_default_str();
  sub->add_option("--kernels", c.kernels, "Numeric kernels")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads (0: hardware concurrency)")->capture_default_str();
}

void add_shape(CLI::App* sub, ShapeArgs& s) {
  sub->add_option("--shape", s.shape, "Initial shape")
      ->check(CLI::IsMember({"circle", "square", "file"}))
      ->capture_default_str();
  sub->add_option("--curve", s.curve_file, "Curve JSON file (implies --shape file)");
  sub->add_option("--n", s.n, "Vertices for --shape circle")->capture_default_str();
  sub->add_option("--d", s.d, "Ambient dimension for --shape circle")->capture_default_str();
  sub->add_option("--radius", s.radius, "Circumradius for --shape circle")->capture_default_str();
}

void add_sim(CLI::App* sub, SimArgs& a) {
  add_shape(sub, a.shape);
  sub->add_option("--m", a.m, "Metric order")->capture_default_str();
  sub->add_option("--dt", a.dt, "Time step")->capture_default_str();
  auto* steps = sub->add_option("--steps", a.steps, "Number of steps")->capture_default_str();
  auto* t_end = sub->add_option("--t-end", a.t_end, "Horizon; sets steps = round(t_end / dt)");
  steps->excludes(t_end);
  sub->add_option("--record-every", a.record_every, "Snapshot stride in steps")->capture_default_str();
  sub->add_option("--edge-floor", a.edge_floor, "Edge collapse threshold")->capture_default_str();
  sub->add_option("--metric", a.metric, "Metric tensor")
      ->check(CLI::IsMember({"sobolev", "flat"}))
      ->capture_default_str();
  sub->add_flag("--extended", a.extended, "Allow n > 32 or more than 10000 steps");
}

DiscreteCurve resolve_shape(const ShapeArgs& s, CLI::App* sub) {
  if (!s.curve_file.empty() || s.shape == "file") {
    if (s.curve_file.empty()) throw ConfigError("--shape file needs --curve");
    return io::load_curve(s.curve_file);
  }
  if (s.shape == "square") {
    if (sub->count("--n") && s.n != 4) throw ConfigError("--shape square has n = 4");
    return make_square();
  }
  return make_circle(s.n, s.radius, s.d);
}

SimulationConfig resolve_sim(const SimArgs& a, const Common& c, CLI::App* sub) {
  SimulationConfig cfg{.initial = resolve_shape(a.shape, sub), .metric = nullptr};
  cfg.order = MetricOrder(a.m);
  cfg.dt = a.dt;
  cfg.n_steps = a.steps;
  if (a.t_end) {
    if (!(*a.t_end > 0.0) || !(a.dt > 0.0)) throw ConfigError("--t-end and --dt must be positive");
    cfg.n_steps = static_cast<std::size_t>(std::llround(*a.t_end / a.dt));
  }
  cfg.seed = c.seed;
  cfg.record_every = a.record_every;
  cfg.edge_floor = a.edge_floor;
  if (a.metric == "flat") cfg.metric = std::make_shared<FlatMetric>(cfg.initial.dof());
  if (!a.extended && (cfg.initial.size() > kMaxDefaultVertices || cfg.n_steps > kMaxDefaultSteps))
    throw ConfigError(fmt::format("runs with n > {} or more than {} steps need --extended", kMaxDefaultVertices,
                                  kMaxDefaultSteps));
  cfg.validate();
  return cfg;
}

json sim_json(const SimulationConfig& cfg, const SimArgs& a) {
  return {{"d", cfg.initial.dim()},
          {"n", cfg.initial.size()},
          {"shape", a.shape.curve_file.empty() ? a.shape.shape : "file"},
          {"curve_file", a.shape.curve_file},
          {"initial", json::parse(io::curve_to_json(cfg.initial))},
          {"m", cfg.order.value()},
          {"metric", a.metric},
          {"dt", cfg.dt},
          {"n_steps", cfg.n_steps},
          {"t_end", cfg.horizon()},
          {"record_every", cfg.record_every},
          {"edge_floor", cfg.edge_floor},
          {"extended", a.extended}};
}

/// Shared lifecycle: manifest bookkeeping and error-to-exit-code mapping.
class Run {
 public:
  Run(std::string command, const Common& common, std::vector<std::string> argv)
      : command_(std::move(command)), common_(common) {
    manifest_.command_line = std::move(argv);
    manifest_.started = io::utc_timestamp();
  }

  fs::path out() const { return common_.out; }
  io::RunManifest& manifest() { return manifest_; }

  template <class Writer>
  fs::path emit(const std::string& name, Writer&& write) {
    const fs::path p = out() / name;
    fs::create_directories(out());
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    write(os);
    os.close();
    manifest_.outputs.push_back(p);
    return p;
  }

  fs::path emit_json(const std::string& name, const json& j) {
    return emit(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }

  int execute(const std::function<int()>& body) {
    int code = 0;
    try {
      apply_seed_and_kernels();
      code = body();
      if (manifest_.status == "running") manifest_.status = code == 0 ? "ok" : "check_failed";
    } catch (const ConfigError& e) {
      code = fail("config_error", e.what(), kExitConfig);
    } catch (const BadShape& e) {
      code = fail("config_error", e.what(), kExitConfig);
    } catch (const std::invalid_argument& e) {
      code = fail("config_error", e.what(), kExitConfig);
    } catch (const Error& e) {
      code = fail("numerical_error", e.what(), kExitNumerical);
    } catch (const std::exception& e) {
      code = fail("numerical_error", e.what(), kExitNumerical);
    }
    try {
      manifest_.seed = common_.seed;
      manifest_.write(out() / "manifest.json");
    } catch (const std::exception& e) {
      std::cerr << "curvediff: cannot write manifest: " << e.what() << '\n';
      if (code == 0) code = kExitNumerical;
    }
    return code;
  }

  int numerical_failure(const std::string& what) { return fail("numerical_error", what, kExitNumerical); }

 private:
  void apply_seed_and_kernels() {
    if (const char* env = std::getenv("CURVEDIFF_SEED")) {
      try {
        std::size_t used = 0;
        const std::string s(env);
        common_.seed = std::stoull(s, &used, 0);
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("CURVEDIFF_SEED is not an unsigned integer: '{}'", env));
      }
      manifest_.config["seed_source"] = "CURVEDIFF_SEED";
    }
    manifest_.config["seed"] = common_.seed;
    if (common_.kernels == "scalar")
      kernels::set_active(kernels::Isa::Scalar);
    else if (common_.kernels == "avx2")
      kernels::set_active(kernels::Isa::Avx2);
    manifest_.config["command"] = command_;
  }

  int fail(const std::string& status, const std::string& what, int code) {
    manifest_.status = status;
    manifest_.error = what;
    std::cerr << "curvediff " << command_ << ": " << what << '\n';
    return code;
  }

  std::string command_;
  Common common_;
  io::RunManifest manifest_;

 public:
  const Common& common() const { return common_; }
};

void record_events(io::RunManifest& m, const std::vector<SimulationEvent>& events, std::optional<std::uint64_t> seed = {}) {
  for (const auto& e : events) {
    json j = io::to_json(e);
    if (seed) j["seed"] = *seed;
    m.events.push_back(j);
  }
}

// ---- subcommands -------------------------------------------------------------------

int cmd_simulate(Run& run, const SimArgs& a, CLI::App* sub) {
  const auto cfg = resolve_sim(a, run.common(), sub);
  run.manifest().config.update(sim_json(cfg, a));
  const auto rec = simulate(cfg);
  run.emit("trajectory.jsonl", [&](std::ostream& os) { io::write_trajectory_jsonl(os, rec); });
  run.emit("stats.csv", [&](std::ostream& os) { io::write_statistics_csv(os, rec); });
  io::save_curve(run.out() / "final_curve.json", rec.curves.back());
  run.manifest().outputs.push_back(run.out() / "final_curve.json");
  if (a.svg) run.emit("snapshots.svg", [&](std::ostream& os) { io::write_svg(os, rec, a.svg_stride); });
  record_events(run.manifest(), rec.events);
  run.manifest().config["completed_steps"] = rec.completed_steps;
  std::cout << fmt::format("simulate: {} of {} steps, {} snapshots, min edge {:.6g}\n", rec.completed_steps,
                           cfg.n_steps, rec.curves.size(), rec.min_edge_series.back());
  if (rec.terminated_early)
    return run.numerical_failure(fmt::format("run ended at step {}: {}", rec.completed_steps,
                                             rec.events.empty() ? "" : rec.events.back().detail));
  return 0;
}

int cmd_ensemble(Run& run, const SimArgs& a, CLI::App* sub) {
  const auto cfg = resolve_sim(a, run.common(), sub);
  if (a.runs == 0) throw ConfigError("--runs must be positive");
  run.manifest().config.update(sim_json(cfg, a));
  run.manifest().config["runs"] = a.runs;
  const auto rep = ensemble(cfg, a.runs, run.common().threads);
  run.emit("ensemble.csv", [&](std::ostream& os) { io::write_ensemble_csv(os, rep); });
  run.emit_json("ensemble.json", io::to_json(rep));
  std::size_t early = 0;
  for (const auto& r : rep.runs) {
    record_events(run.manifest(), r.events, r.seed);
    early += r.terminated_early ? 1 : 0;
  }
  double final_min = rep.min_edge.q10.empty() ? 0.0 : rep.min_edge.q10.back();
  std::cout << fmt::format("ensemble: {} runs, {} ended early, final min-edge q10 {:.6g}\n", a.runs, early, final_min);
  return 0;
}

struct CheckArgs {
  std::vector<std::string> properties;
  std::optional<int> m;
  std::size_t samples = 0;
  std::string mutate;
};

int cmd_check(Run& run, const CheckArgs& a) {
  checks::Options opts;
  opts.seed = run.common().seed;
  opts.samples = a.samples;
  opts.order = a.m;
  if (a.mutate == "mu-parity") opts.rule = MuRule::Flipped;
  const auto names = a.properties.empty() ? checks::property_names() : a.properties;
  run.manifest().config.update({{"properties", names}, {"samples", a.samples}, {"mutate", a.mutate}});
  if (a.m) run.manifest().config["m"] = *a.m;

  json results = json::array();
  std::vector<std::string> failed;
  for (const auto& name : names) {
    const auto r = checks::run(name, opts);
    results.push_back({{"property", r.name},
                       {"passed", r.passed},
                       {"observed", r.observed},
                       {"threshold", r.threshold},
                       {"samples", r.samples},
                       {"detail", r.detail}});
    std::cout << fmt::format("{:<24} {}  {}\n", r.name, r.passed ? "PASS" : "FAIL", r.detail);
    if (!r.passed) failed.push_back(r.name);
  }
  run.emit_json("check.json", {{"passed", failed.empty()}, {"results", results}, {"failed", failed}});
  if (!failed.empty()) {
    std::string list;
    for (const auto& f : failed) list += (list.empty() ? "" : ", ") + f;
    std::cerr << "failing properties: " << list << '\n';
    return kExitCheckFailed;
  }
  return 0;
}

struct TriangleArgs {
  int m = 1;
  bool grid = false, radial = false, fit = false, bm = false;
  std::size_t resolution = 400;
  double extent = 2.0;
  std::optional<double> clamp;
  double r0 = 0.5;
  std::size_t max_levels = 4000;
  double r_hi = 1e-2, r_lo = 1e-5;
  std::size_t fit_points = 31;
  std::size_t runs = 100;
  double dt = 0.01;
  double t_end = 100.0;
  double x0 = 0.0, y0 = 1.0;
  double edge_floor = kDefaultEdgeFloor;
  std::size_t record_every = kDefaultRecordEvery;
};

int cmd_triangle(Run& run, const TriangleArgs& a) {
  if (!(a.grid || a.radial || a.fit || a.bm)) throw ConfigError("choose at least one of --grid, --radial, --fit, --bm");
  if (a.m < 0) throw ConfigError("--m must be non-negative");
  run.manifest().config.update({{"m", a.m}, {"grid", a.grid}, {"radial", a.radial}, {"fit", a.fit}, {"bm", a.bm}});

  if (a.grid) {
    if (a.m > 2) throw ConfigError("--grid has closed forms for m <= 2 only");
    const auto g = conformal_grid(a.m, a.resolution, a.extent, a.clamp);
    run.emit(fmt::format("grid_m{}.csv", a.m), [&](std::ostream& os) { io::write_grid_csv(os, g); });
    run.emit_json(fmt::format("grid_m{}.json", a.m), io::grid_metadata(g));
    run.manifest().config["grid_spec"] = io::grid_metadata(g);
    std::cout << fmt::format("grid: {}x{} cells on [-{},{}]^2, clamp {:.6g}\n", g.resolution, g.resolution, g.extent,
                             g.extent, g.clamp);
  }
  if (a.fit) {
    const auto radii = log_spaced_radii(a.r_hi, a.r_lo, a.fit_points);
    const auto fit = estimate_blowup_exponent(MetricOrder(a.m), radii);
    const std::string kind = fit.from_closed_form ? "closed-form" : "estimate";
    run.emit_json(fmt::format("fit_m{}.json", a.m), {{"m", a.m},
                                                     {"radii", radii},
                                                     {"exponent", fit.exponent},
                                                     {"constant", fit.constant},
                                                     {"max_anisotropy", fit.max_anisotropy},
                                                     {"kind", kind}});
    std::cout << fmt::format("fit: f_{} ~ {:.6g} r^{:.6f} ({})\n", a.m, fit.constant, fit.exponent, kind);
  }
  if (a.radial) {
    const auto r = radial_length(MetricOrder(a.m), a.r0, a.max_levels);
    run.emit_json(fmt::format("radial_m{}.json", a.m), {{"m", a.m},
                                                        {"r0", a.r0},
                                                        {"classification", to_string(r.classification)},
                                                        {"value", r.value},
                                                        {"levels", r.levels},
                                                        {"last_increment", r.last_increment}});
    std::cout << to_string(r.classification) << '\n';
  }
  if (a.bm) {
    if (a.m > 2) throw ConfigError("--bm has closed forms for m <= 2 only");
    if (!(a.dt > 0.0) || !(a.t_end > 0.0)) throw ConfigError("--dt and --t-end must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(a.t_end / a.dt));
    const TrianglePoint v0(a.x0, a.y0);
    const auto seed = run.common().seed;
    const auto rep = triangle_bm_ensemble(a.m, v0, a.dt, steps, a.runs, seed, a.edge_floor, run.common().threads);
    const auto first = simulate_triangle_bm(a.m, v0, a.dt, steps, derive_seed(seed, 0), a.edge_floor, a.record_every);
    run.emit(fmt::format("bm_m{}_run0.jsonl", a.m), [&](std::ostream& os) { io::write_triangle_jsonl(os, first); });
    run.emit_json(fmt::format("bm_m{}.json", a.m), {{"m", a.m},
                                                    {"runs", rep.runs},
                                                    {"dt", a.dt},
                                                    {"steps", steps},
                                                    {"start", {a.x0, a.y0}},
                                                    {"edge_floor", a.edge_floor},
                                                    {"singularity_approaches", rep.singularity_approaches},
                                                    {"approach_fraction", rep.approach_fraction},
                                                    {"seeds", rep.seeds},
                                                    {"min_distance", rep.min_distance},
                                                    {"max_excursion", rep.max_excursion}});
    for (std::size_t k = 0; k < rep.runs; ++k)
      if (rep.min_distance[k] < a.edge_floor)
        run.manifest().events.push_back({{"kind", "singularity_approach"}, {"seed", rep.seeds[k]}, {"run", k}});
    std::cout << fmt::format("bm: {} of {} runs approached a singular point (fraction {:.4f})\n",
                             rep.singularity_approaches, rep.runs, rep.approach_fraction);
  }
  return 0;
}

struct GeodesicArgs {
  ShapeArgs shape;
  int m = 2;
  double duration = 1.0;
  double step = 1e-3;
  std::size_t record_every = 10;
};

int cmd_geodesic(Run& run, const GeodesicArgs& a, CLI::App* sub) {
  const auto c0 = resolve_shape(a.shape, sub);
  if (!(a.duration > 0.0) || !(a.step > 0.0)) throw ConfigError("--duration and --step must be positive");
  if (a.record_every == 0) throw ConfigError("--record-every must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(a.duration / a.step));
  CounterRng rng(run.common().seed);
  const MetricOrder m(a.m);
  const auto h0 = unit_normalized(c0, random_tangent(rng, c0.size(), c0.dim()), m);
  run.manifest().config.update({{"initial", json::parse(io::curve_to_json(c0))},
                                {"m", a.m},
                                {"duration", a.duration},
                                {"step", a.step},
                                {"h0", std::vector<double>(h0.components().begin(), h0.components().end())}});
  std::vector<GeodesicState> path;
  try {
    path = geodesic_shoot(c0, h0, a.duration, steps, m);
  } catch (const RegularityViolation& e) {
    json ev = {{"kind", "regularity_violation"}, {"detail", e.what()}};
    if (e.time()) ev["t"] = *e.time();
    ev["edge"] = e.edge();
    run.manifest().events.push_back(ev);
    throw;
  }
  const double h_start = path.front().hamiltonian;
  double worst = 0.0;
  run.emit("geodesic.jsonl", [&](std::ostream& os) {
    for (std::size_t k = 0; k < path.size(); ++k) {
      worst = std::max(worst, std::abs(path[k].hamiltonian - h_start) / h_start);
      if (k % a.record_every != 0 && k + 1 != path.size()) continue;
      const DiscreteCurve c(c0.dim(), c0.size(), path[k].position);
      os << fmt::format("{{\"step\":{},\"t\":{},\"hamiltonian\":{},\"vertices\":{}}}\n", k,
                        io::format_number(path[k].t), io::format_number(path[k].hamiltonian), io::vertices_json(c));
    }
  });
  run.manifest().config["hamiltonian_relative_drift"] = worst;
  std::cout << fmt::format("geodesic: {} steps, relative Hamiltonian drift {:.3e}\n", steps, worst);
  return 0;
}

struct ProbeArgs {
  ShapeArgs shape;
  int m = 2;
  std::size_t samples = 20;
  std::vector<double> radii{0.25, 0.5, 1.0, 1.5, 2.0};
  double step = 1e-3;
};

int cmd_probe(Run& run, const ProbeArgs& a, CLI::App* sub) {
  const auto c0 = resolve_shape(a.shape, sub);
  ProbeOptions opts;
  opts.step = a.step;
  opts.threads = run.common().threads;
  run.manifest().config.update({{"initial", json::parse(io::curve_to_json(c0))},
                                {"m", a.m},
                                {"samples", a.samples},
                                {"radii", a.radii},
                                {"step", a.step}});
  const auto rep = probe_volume_growth(c0, MetricOrder(a.m), a.radii, a.samples, run.common().seed, opts);
  run.emit_json("growth.json", io::to_json(rep));
  std::cout << fmt::format("probe-volume: slope {:.6g}, relative residual {:.3g}, linear growth {}\n", rep.fit_slope,
                           rep.fit_relative_residual, rep.grigoryan_divergent ? "yes" : "no");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brownian motion on spaces of discrete closed curves", "curvediff"};
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON config; explicit flags take precedence");
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  SimArgs sim, ens;
  CheckArgs chk;
  TriangleArgs tri;
  GeodesicArgs geo;
  ProbeArgs probe;

  auto* simulate_cmd = app.add_subcommand("simulate", "Euler-Maruyama Brownian motion of one curve");
  add_common(simulate_cmd, common);
  add_sim(simulate_cmd, sim);
  simulate_cmd->add_flag("--svg", sim.svg, "Also write snapshots.svg");
  simulate_cmd->add_option("--svg-stride", sim.svg_stride, "Draw every k-th snapshot")->capture_default_str();

  auto* ensemble_cmd = app.add_subcommand("ensemble", "Independent runs with quantile statistics");
  add_common(ensemble_cmd, common);
  add_sim(ensemble_cmd, ens);
  ensemble_cmd->add_option("--runs", ens.runs, "Number of runs")->capture_default_str();

  auto* check_cmd = app.add_subcommand("check", "Property suites over random curves");
  add_common(check_cmd, common);
  check_cmd->add_option("--property", chk.properties, "Property to run (repeatable; default all)")
      ->check(CLI::IsMember(checks::property_names()));
  check_cmd->add_option("--m", chk.m, "Restrict to one metric order");
  check_cmd->add_option("--samples", chk.samples, "Samples per property (0: default)");
  check_cmd->add_option("--mutate", chk.mutate)->check(CLI::IsMember({"", "mu-parity"}))->group("");

  auto* triangle_cmd = app.add_subcommand("triangle", "Experiments on the space of triangles");
  add_common(triangle_cmd, common);
  triangle_cmd->add_option("--m", tri.m, "Metric order")->capture_default_str();
  triangle_cmd->add_flag("--grid", tri.grid, "Conformal factor on a grid");
  triangle_cmd->add_option("--resolution", tri.resolution, "Grid cells per side")->capture_default_str();
  triangle_cmd->add_option("--extent", tri.extent, "Grid half-width")->capture_default_str();
  triangle_cmd->add_option("--clamp", tri.clamp, "Upper clamp for grid values");
  triangle_cmd->add_flag("--fit", tri.fit, "Log-log blow-up fit near a singular point");
  triangle_cmd->add_option("--r-hi", tri.r_hi, "Largest fit radius")->capture_default_str();
  triangle_cmd->add_option("--r-lo", tri.r_lo, "Smallest fit radius")->capture_default_str();
  triangle_cmd->add_option("--fit-points", tri.fit_points, "Fit radii")->capture_default_str();
  triangle_cmd->add_flag("--radial", tri.radial, "Classify radial length to a singular point");
  triangle_cmd->add_option("--r0", tri.r0, "Radial start distance")->capture_default_str();
  triangle_cmd->add_option("--max-levels", tri.max_levels, "Dyadic levels before UNDECIDED")->capture_default_str();
  triangle_cmd->add_flag("--bm", tri.bm, "Brownian motion ensemble in the conformal metric");
  triangle_cmd->add_option("--runs", tri.runs, "Brownian runs")->capture_default_str();
  triangle_cmd->add_option("--dt", tri.dt, "Time step")->capture_default_str();
  triangle_cmd->add_option("--t-end", tri.t_end, "Horizon")->capture_default_str();
  triangle_cmd->add_option("--x0", tri.x0, "Start apex x")->capture_default_str();
  triangle_cmd->add_option("--y0", tri.y0, "Start apex y")->capture_default_str();
  triangle_cmd->add_option("--edge-floor", tri.edge_floor, "Singularity approach distance")->capture_default_str();
  triangle_cmd->add_option("--record-every", tri.record_every, "Trajectory stride")->capture_default_str();

  auto* geodesic_cmd = app.add_subcommand("geodesic", "Shoot a unit-speed geodesic in a random direction");
  add_common(geodesic_cmd, common);
  add_shape(geodesic_cmd, geo.shape);
  geodesic_cmd->add_option("--m", geo.m, "Metric order")->capture_default_str();
  geodesic_cmd->add_option("--duration", geo.duration, "Geodesic time")->capture_default_str();
  geodesic_cmd->add_option("--step", geo.step, "RK4 step")->capture_default_str();
  geodesic_cmd->add_option("--record-every", geo.record_every, "Output stride")->capture_default_str();

  auto* probe_cmd = app.add_subcommand("probe-volume", "Heuristic volume-growth probe along geodesics");
  add_common(probe_cmd, common);
  add_shape(probe_cmd, probe.shape);
  probe_cmd->add_option("--m", probe.m, "Metric order (>= 2)")->capture_default_str();
  probe_cmd->add_option("--samples", probe.samples, "Geodesics")->capture_default_str();
  probe_cmd->add_option("--radii", probe.radii, "Radii")->capture_default_str();
  probe_cmd->add_option("--step", probe.step, "RK4 step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    if (sub) {
      io::RunManifest m;
      m.command_line.assign(argv, argv + argc);
      m.started = io::utc_timestamp();
      m.status = "config_error";
      m.error = e.what();
      try {
        m.write(fs::path(common.out) / "manifest.json");
      } catch (const std::exception&) {
      }
    }
    return kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  Run run(sub->get_name(), common, std::vector<std::string>(argv, argv + argc));
  return run.execute([&]() -> int {
    if (sub == simulate_cmd) return cmd_simulate(run, sim, sub);
    if (sub == ensemble_cmd) return cmd_ensemble(run, ens, sub);
    if (sub == check_cmd) return cmd_check(run, chk);
    if (sub == triangle_cmd) return cmd_triangle(run, tri);
    if (sub == geodesic_cmd) return cmd_geodesic(run, geo, sub);
    return cmd_probe(run, probe, sub);
  });
}
