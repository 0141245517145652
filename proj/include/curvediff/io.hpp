#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "curvediff/brownian.hpp"
#include "curvediff/calculus.hpp"
#include "curvediff/curve.hpp"
#include "curvediff/triangle.hpp"

namespace curvediff::io {

/// 17 significant digits: parses back to the identical double.
std::string format_number(double x);

// ---- curves ------------------------------------------------------------------

/// [[x_1..x_d], ...] at full precision.
std::string vertices_json(const DiscreteCurve& c);

/// {"d": int, "n": int, "vertices": [[x_1..x_d], ...]}. Loading validates
/// shape and regularity (BadShape / RegularityViolation); an unreadable file
/// is std::invalid_argument.
std::string curve_to_json(const DiscreteCurve& c);
DiscreteCurve curve_from_json(std::string_view text);
void save_curve(const std::filesystem::path& path, const DiscreteCurve& c);
DiscreteCurve load_curve(const std::filesystem::path& path);

// ---- trajectories --------------------------------------------------------------

/// One line per snapshot: {"step": k, "t": t, "vertices": [[...], ...]}.
void write_trajectory_jsonl(std::ostream& os, const TrajectoryRecord& r);

/// Header step,t,min_edge,length,centroid_0,...,centroid_{d-1}.
void write_statistics_csv(std::ostream& os, const TrajectoryRecord& r);

/// Closed polyline per snapshot (every `stride`-th recorded curve) in a
/// viewport fixed by the bounding box of all snapshots. Uses the first two
/// coordinates.
void write_svg(std::ostream& os, const TrajectoryRecord& r, std::size_t stride = 1, double size_px = 600.0);

/// step,t,alive,<quantity>_q{10,50,90} for min_edge, length and centroid
/// displacement.
void write_ensemble_csv(std::ostream& os, const EnsembleReport& e);

nlohmann::json to_json(const GrowthReport& g);
nlohmann::json to_json(const EnsembleReport& e);
nlohmann::json to_json(const SimulationEvent& e);

// ---- triangle space --------------------------------------------------------------

/// Header x,y,f; row-major over cell centres.
void write_grid_csv(std::ostream& os, const ConformalGrid& g);
nlohmann::json grid_metadata(const ConformalGrid& g);

/// Trajectory JSONL with d = 2, n = 1 vertex payload plus
/// "min_singularity_distance" (running minimum).
void write_triangle_jsonl(std::ostream& os, const TriangleTrajectory& t);

// ---- artifacts -------------------------------------------------------------------

/// Lower-case hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

struct RunManifest {
  std::vector<std::string> command_line;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string started;  // ISO 8601 UTC
  std::string finished;
  std::vector<nlohmann::json> events;
  std::vector<std::filesystem::path> outputs;
  std::string status = "running";  // "ok", "config_error", "numerical_error", "check_failed"
  std::string error;

  /// Hashes every existing output (missing ones are dropped and recorded
  /// as an event) and serializes the manifest.
  nlohmann::json finalize();
  void write(const std::filesystem::path& path);
};

std::string utc_timestamp();

}  // namespace curvediff::io
