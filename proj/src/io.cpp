#include "curvediff/io.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "curvediff/error.hpp"
#include "curvediff/kernels.hpp"
#include "curvediff/rng.hpp"
#include "curvediff/version.hpp"

namespace curvediff::io {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
  return fmt::format("{:.17g}", x);
}

namespace {

void append_point(std::string& out, std::span<const double> p) {
  out += '[';
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (a) out += ',';
    out += format_number(p[a]);
  }
  out += ']';
}

void append_vertices(std::string& out, const DiscreteCurve& c) {
  out += '[';
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += ',';
    append_point(out, c.vertex(i));
  }
  out += ']';
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// JSON has no literal for non-finite values; they become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json numbers(std::span<const double> xs) {
  json a = json::array();
  for (double x : xs) a.push_back(number(x));
  return a;
}

}  // namespace

// ---- curves ------------------------------------------------------------------

std::string vertices_json(const DiscreteCurve& c) {
  std::string out;
  append_vertices(out, c);
  return out;
}

std::string curve_to_json(const DiscreteCurve& c) {
  std::string out = fmt::format("{{\"d\":{},\"n\":{},\"vertices\":", c.dim(), c.size());
  append_vertices(out, c);
  out += "}\n";
  return out;
}

DiscreteCurve curve_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw BadShape(std::string("curve file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("d") || !j.contains("n") || !j.contains("vertices"))
    throw BadShape("curve file needs \"d\", \"n\" and \"vertices\"");
  if (!j["d"].is_number_integer() || !j["n"].is_number_integer() || !j["vertices"].is_array())
    throw BadShape("curve file has fields of the wrong type");
  const auto d = j["d"].get<std::int64_t>(), n = j["n"].get<std::int64_t>();
  if (d < 2 || n < 3) throw BadShape(fmt::format("curve file needs d >= 2 and n >= 3, got d={} n={}", d, n));
  const auto& rows = j["vertices"];
  if (rows.size() != static_cast<std::size_t>(n))
    throw BadShape(fmt::format("curve file declares n={} but lists {} vertices", n, rows.size()));
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(d * n));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(d))
      throw BadShape(fmt::format("vertex {} must have {} coordinates", i, d));
    for (const auto& x : row) {
      if (!x.is_number()) throw BadShape(fmt::format("vertex {} has a non-numeric coordinate", i));
      coords.push_back(x.get<double>());
    }
  }
  return DiscreteCurve(static_cast<std::size_t>(d), static_cast<std::size_t>(n), std::move(coords));
}

void save_curve(const std::filesystem::path& path, const DiscreteCurve& c) { write_file(path, curve_to_json(c)); }

DiscreteCurve load_curve(const std::filesystem::path& path) { return curve_from_json(read_file(path)); }

// ---- trajectories --------------------------------------------------------------

void write_trajectory_jsonl(std::ostream& os, const TrajectoryRecord& r) {
  std::string line;
  for (std::size_t k = 0; k < r.curves.size(); ++k) {
    line = fmt::format("{{\"step\":{},\"t\":{},\"vertices\":", r.steps[k], format_number(r.times[k]));
    append_vertices(line, r.curves[k]);
    line += "}\n";
    os << line;
  }
}

void write_statistics_csv(std::ostream& os, const TrajectoryRecord& r) {
  std::string line = "step,t,min_edge,length";
  for (std::size_t a = 0; a < r.d; ++a) line += fmt::format(",centroid_{}", a);
  os << line << '\n';
  for (std::size_t k = 0; k < r.steps.size(); ++k) {
    line = fmt::format("{},{},{},{}", r.steps[k], format_number(r.times[k]), format_number(r.min_edge_series[k]),
                       format_number(r.length_series[k]));
    for (double x : r.centroid_series[k]) line += "," + format_number(x);
    os << line << '\n';
  }
}

void write_svg(std::ostream& os, const TrajectoryRecord& r, std::size_t stride, double size_px) {
  if (stride == 0) throw std::invalid_argument("svg stride must be positive");
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  for (const auto& c : r.curves)
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto v = c.vertex(i);
      lo_x = std::min(lo_x, v[0]);
      hi_x = std::max(hi_x, v[0]);
      lo_y = std::min(lo_y, v[1]);
      hi_y = std::max(hi_y, v[1]);
    }
  if (r.curves.empty()) lo_x = lo_y = 0.0, hi_x = hi_y = 1.0;
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double pad = 0.05 * span;
  const double scale = size_px / (span + 2.0 * pad);

  os << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n", size_px);
  os << fmt::format("<rect width=\"{0}\" height=\"{0}\" fill=\"white\"/>\n", size_px);
  const std::size_t shown = (r.curves.size() + stride - 1) / stride;
  std::size_t drawn = 0;
  for (std::size_t k = 0; k < r.curves.size(); k += stride, ++drawn) {
    const auto& c = r.curves[k];
    // Older snapshots are lighter.
    const double shade = shown > 1 ? 0.8 * (1.0 - static_cast<double>(drawn) / static_cast<double>(shown - 1)) : 0.0;
    const int grey = static_cast<int>(std::lround(255.0 * shade));
    std::string pts;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto v = c.vertex(i);
      const double px = (v[0] - lo_x + pad) * scale;
      const double py = size_px - (v[1] - lo_y + pad) * scale;
      pts += fmt::format("{}{:.3f},{:.3f}", i ? " " : "", px, py);
    }
    os << fmt::format(
        "<polygon data-step=\"{}\" points=\"{}\" fill=\"none\" stroke=\"rgb({},{},{})\" stroke-width=\"1\"/>\n",
        r.steps[k], pts, grey, grey, grey);
  }
  os << "</svg>\n";
}

void write_ensemble_csv(std::ostream& os, const EnsembleReport& e) {
  os << "step,t,alive,min_edge_q10,min_edge_q50,min_edge_q90,length_q10,length_q50,length_q90,"
        "centroid_displacement_q10,centroid_displacement_q50,centroid_displacement_q90\n";
  for (std::size_t k = 0; k < e.steps.size(); ++k) {
    std::string line = fmt::format("{},{},{}", e.steps[k], format_number(e.times[k]), e.alive[k]);
    for (const QuantileSeries* q : {&e.min_edge, &e.length, &e.centroid_displacement})
      line += fmt::format(",{},{},{}", format_number(q->q10[k]), format_number(q->q50[k]), format_number(q->q90[k]));
    os << line << '\n';
  }
}

json to_json(const SimulationEvent& e) {
  json j = {{"kind", e.kind}, {"step", e.step}, {"detail", e.detail}};
  j["edge"] = e.edge ? json(*e.edge) : json(nullptr);
  return j;
}

json to_json(const GrowthReport& g) {
  return {{"radii", numbers(g.radii)},
          {"log_sqrt_det_max", numbers(g.log_sqrt_det_max)},
          {"fit_slope", number(g.fit_slope)},
          {"fit_intercept", number(g.fit_intercept)},
          {"fit_relative_residual", number(g.fit_relative_residual)},
          {"grigoryan_divergent", g.grigoryan_divergent},
          {"samples", g.samples},
          {"edge_bound_checks", g.edge_bound_checks},
          {"edge_bound_violations", g.edge_bound_violations}};
}

json to_json(const EnsembleReport& e) {
  json runs = json::array();
  for (const auto& r : e.runs) {
    json events = json::array();
    for (const auto& ev : r.events) events.push_back(to_json(ev));
    runs.push_back({{"seed", r.seed},
                    {"completed_steps", r.completed_steps},
                    {"terminated_early", r.terminated_early},
                    {"events", events}});
  }
  return {{"runs", runs}, {"recorded_steps", e.steps.size()}};
}

// ---- triangle space --------------------------------------------------------------

void write_grid_csv(std::ostream& os, const ConformalGrid& g) {
  os << "x,y,f\n";
  std::string line;
  for (std::size_t k = 0; k < g.f.size(); ++k) {
    line = fmt::format("{},{},{}\n", format_number(g.x[k]), format_number(g.y[k]), format_number(g.f[k]));
    os << line;
  }
}

json grid_metadata(const ConformalGrid& g) {
  return {{"m", g.m},
          {"resolution", g.resolution},
          {"extent", g.extent},
          {"domain", {-g.extent, g.extent}},
          {"sampling", "cell-centre"},
          {"clamp", number(g.clamp)},
          {"clamped_cells", g.clamped_cells},
          {"columns", {"x", "y", "f"}}};
}

void write_triangle_jsonl(std::ostream& os, const TriangleTrajectory& t) {
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    std::string line = fmt::format("{{\"step\":{},\"t\":{},\"vertices\":", t.steps[k], format_number(t.times[k]));
    line += '[';
    append_point(line, t.points[k]);
    line += fmt::format("],\"min_singularity_distance\":{}}}\n", format_number(t.min_distance[k]));
    os << line;
  }
}

// ---- artifacts -------------------------------------------------------------------

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string utc_timestamp() {
  const auto now = std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}Z", now);
}

json RunManifest::finalize() {
  if (finished.empty()) finished = utc_timestamp();
  json outs = json::array();
  json evs = json::array();
  for (const auto& e : events) evs.push_back(e);
  for (const auto& p : outputs) {
    if (!std::filesystem::exists(p)) {
      evs.push_back({{"kind", "missing_output"}, {"path", p.string()}});
      continue;
    }
    outs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}, {"bytes", std::filesystem::file_size(p)}});
  }
  return {{"command_line", command_line},
          {"config", config},
          {"seed", seed},
          {"generator", std::string(kGeneratorId)},
          {"kernels", std::string(kernels::name(kernels::active().isa))},
          {"version", kVersion},
          {"started", started},
          {"finished", finished},
          {"status", status},
          {"error", error},
          {"events", evs},
          {"outputs", outs}};
}

void RunManifest::write(const std::filesystem::path& path) { write_file(path, finalize().dump(2) + "\n"); }

}  // namespace curvediff::io
