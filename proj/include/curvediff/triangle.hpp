#pragma once

// Triangles in the plane modulo translation, rotation and scaling, normalized
// to v0 = (1,0), v2 = (-1,0). The free apex v lives in R² minus the two fixed
// vertices, and the restriction of g^m is conformal: f_m(v) |h|².

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curvediff/curve.hpp"
#include "curvediff/dual.hpp"
#include "curvediff/metric_model.hpp"

namespace curvediff {

class TrianglePoint {
 public:
  /// Throws DomainViolation within kEdgeEpsilon of (±1, 0).
  TrianglePoint(double x, double y);

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  double e0() const noexcept { return std::hypot(x_ - 1.0, y_); }
  double e1() const noexcept { return std::hypot(x_ + 1.0, y_); }
  double length() const noexcept { return e0() + e1() + 2.0; }
  double singularity_distance() const noexcept { return std::min(e0(), e1()); }
  /// The triangle (1,0), v, (-1,0) as a curve.
  DiscreteCurve curve() const;

 private:
  double x_;
  double y_;
};

/// Closed forms for f_0, f_1, f_2 in terms of e0 = |v - (1,0)| and
/// e1 = |v + (1,0)|, on a scalar type T (double, long double, Dual).
template <class T>
T conformal_factor_from_edges(int m, const T& e0, const T& e1) {
  const T l = e0 + e1 + T(2);
  const T l3 = l * l * l;
  switch (m) {
    case 0:
      return (e0 + e1) / l3;
    case 1:
      return (e0 + e1) / (T(2) * l3) + (T(1) / e0 + T(1) / e1) / l;
    case 2:
      return (e0 + e1) / (T(2) * l3) +
             (T(2) / (e0 * e0 * (e0 + T(2))) + T(2) * (e0 + e1) / (e0 * e0 * e1 * e1) +
              T(2) / (e1 * e1 * (e1 + T(2)))) *
                 l;
    default:
      return T(-1);
  }
}

template <class T>
T conformal_factor_closed_form(int m, const T& x, const T& y) {
  using std::sqrt;
  const T e0 = sqrt((x - T(1)) * (x - T(1)) + y * y);
  const T e1 = sqrt((x + T(1)) * (x + T(1)) + y * y);
  return conformal_factor_from_edges(m, e0, e1);
}

/// f_m(v) for m ∈ {0,1,2}; std::invalid_argument otherwise.
double conformal_factor(int m, const TrianglePoint& v);

/// g^m of the apex perturbation (0, h, 0) computed by the general curve
/// metric on the triangle (1,0), v, (-1,0).
double restricted_metric_oracle(MetricOrder m, const TrianglePoint& v, std::array<double, 2> h,
                                MuRule rule = MuRule::OrderParity);

/// Closed form for m ≤ 2, restricted_metric_oracle with h = (1,0) otherwise.
double restricted_factor(MetricOrder m, const TrianglePoint& v);

/// Relative spread of the restricted metric over directions at v:
/// max |g(u,u) - g(w,w)| and |g(u,w)| over the unit axes, divided by g(u,u).
double anisotropy(MetricOrder m, const TrianglePoint& v);

struct BlowupFit {
  double exponent = 0.0;  // slope of log f against log r
  double constant = 0.0;  // exp(intercept)
  double max_anisotropy = 0.0;
  bool from_closed_form = false;  // false means an estimate from the oracle
};

/// Fits log f_m(1 - r, 0) against log r. Radii must lie in (0, 1) and decrease.
BlowupFit estimate_blowup_exponent(MetricOrder m, std::span<const double> radii);

/// num log-spaced radii from hi down to lo.
std::vector<double> log_spaced_radii(double hi, double lo, std::size_t num);

enum class RadialClass { Convergent, Divergent, Undecided };
std::string to_string(RadialClass c);

struct RadialResult {
  RadialClass classification = RadialClass::Undecided;
  double value = 0.0;   // partial sum at termination
  std::size_t levels = 0;
  double last_increment = 0.0;
};

inline constexpr double kRadialTailTolerance = 1e-6;
inline constexpr double kRadialDivergenceThreshold = 1e3;
inline constexpr std::size_t kRadialMinLevels = 40;

/// ∫ √f_m along v(r) = (1 - r, 0) for r ∈ (δ, r0], δ = r0 2^{-k}, k → ∞.
RadialResult radial_length(MetricOrder m, double r0, std::size_t max_levels = 4000);

/// f_m · I₂ on the punctured plane, with exact derivatives of f_m (m ≤ 2).
class ConformalPlaneMetric final : public MetricModel {
 public:
  explicit ConformalPlaneMetric(int m);

  std::size_t dim() const override { return 2; }
  MetricJet jet(std::span<const double> x, bool with_derivatives) const override;
  void check_domain(std::span<const double> x) const override;
  std::string name() const override { return "triangle-conformal(m=" + std::to_string(m_) + ")"; }

 private:
  int m_;
};

// ---- planar Brownian motion in the conformal metric ------------------------

struct TriangleTrajectory {
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<std::array<double, 2>> points;
  /// Running minimum of the distance to the singular points.
  std::vector<double> min_distance;
  double min_singularity_distance = 0.0;
  double max_excursion = 0.0;  // max Euclidean radius reached
  std::optional<std::size_t> singularity_approach_step;
  std::size_t completed_steps = 0;
};

/// v_{k+1} = v_k + √dt f_m(v_k)^{-1/2} ξ_k (the drift of a 2-d conformal
/// metric vanishes). Stops with a SingularityApproach record when the
/// distance to (±1,0) drops below edge_floor.
TriangleTrajectory simulate_triangle_bm(int m, const TrianglePoint& v0, double dt, std::size_t n_steps,
                                        std::uint64_t seed, double edge_floor = 1e-8,
                                        std::size_t record_every = 10);

struct TriangleBmReport {
  int m = 0;
  std::size_t runs = 0;
  std::size_t singularity_approaches = 0;
  double approach_fraction = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> min_distance;  // per run
  std::vector<double> max_excursion;  // per run
};

TriangleBmReport triangle_bm_ensemble(int m, const TrianglePoint& v0, double dt, std::size_t n_steps,
                                      std::size_t runs, std::uint64_t seed, double edge_floor = 1e-8,
                                      std::size_t threads = 0);

// ---- grid export -----------------------------------------------------------

struct ConformalGrid {
  int m = 0;
  std::size_t resolution = 0;
  double extent = 0.0;
  std::vector<double> x, y, f;  // row-major cell centers
  double clamp = 0.0;
  std::size_t clamped_cells = 0;
};

/// Cell-centre samples of f_m on [-extent, extent]². Cells touching a
/// singular point, and values above `clamp` when given, are set to the clamp;
/// the default clamp is the largest value among the other cells.
ConformalGrid conformal_grid(int m, std::size_t resolution = 400, double extent = 2.0,
                             std::optional<double> clamp = std::nullopt);

}  // namespace curvediff
