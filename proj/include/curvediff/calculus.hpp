#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "curvediff/curve.hpp"
#include "curvediff/matrix.hpp"
#include "curvediff/metric_model.hpp"

namespace curvediff {

/// cond(G) above which a near-degeneracy diagnostic is raised.
inline constexpr double kIllConditioned = 1e12;

/// ∂G_{kℓ}/∂x_j as a dense dim × dim × dim array.
class ThirdOrderTensor {
 public:
  explicit ThirdOrderTensor(std::size_t dim) : dim_(dim), data_(dim * dim * dim, 0.0) {}
  std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t k, std::size_t l, std::size_t j) { return data_[(j * dim_ + k) * dim_ + l]; }
  double operator()(std::size_t k, std::size_t l, std::size_t j) const { return data_[(j * dim_ + k) * dim_ + l]; }

 private:
  std::size_t dim_;
  std::vector<double> data_;
};

ThirdOrderTensor metric_tensor_derivative(const DiscreteCurve& c, MetricOrder m);

struct DriftVector {
  std::vector<double> components;
};

/// Lower-triangular σ with σσᵀ = G^{-1}, stored in Kronecker form σ = base ⊗ I_block.
struct DiffusionFactor {
  std::size_t block = 1;
  Matrix base;

  Matrix full() const { return kron_identity(base, block); }
  /// σ ξ
  std::vector<double> apply(std::span<const double> xi) const;
};

/// Everything one Euler–Maruyama step needs, from a single factorization.
struct GeneratorTerms {
  DriftVector drift;
  DiffusionFactor sigma;
  double log_sqrt_det = 0.0;
  /// (max L_ii / min L_ii)^2 of the Cholesky factor: a lower bound on cond(G).
  double condition_estimate = 1.0;
};

/// Throws SingularMetric when G is not numerically SPD.
GeneratorTerms generator_terms(const MetricModel& model, std::span<const double> x);

/// b^j = ½ ∂_i g^{ij} + ½ g^{ij} ∂_i log √det g
DriftVector drift(const MetricModel& model, std::span<const double> x);
DriftVector drift(const DiscreteCurve& c, MetricOrder m);

/// σ = U^{-T} where G = U Uᵀ with U upper triangular: the Cholesky factor of
/// G^{-1}, obtained from a factorization of G and triangular solves only.
DiffusionFactor diffusion_factor(const MetricModel& model, std::span<const double> x);
DiffusionFactor diffusion_factor(const DiscreteCurve& c, MetricOrder m);

double log_sqrt_det(const MetricModel& model, std::span<const double> x);

/// Derivatives of G^{-1} and of log √det G along the constant translation
/// field in coordinate direction a (block models only).
struct TranslationDerivatives {
  double inverse_metric_norm = 0.0;  // ‖∂_T G^{-1}‖_F / ‖G^{-1}‖_F
  double log_density = 0.0;          // |∂_T log √det G|
};
TranslationDerivatives translation_derivatives(const MetricModel& model, std::span<const double> x,
                                               std::size_t direction);

// ---- geodesics ------------------------------------------------------------

struct GeodesicState {
  double t = 0.0;
  std::vector<double> position;
  std::vector<double> momentum;
  double hamiltonian = 0.0;
};

struct GeodesicOptions {
  /// Relative Hamiltonian drift that raises StepTooLarge.
  double energy_guard = 1e-3;
};

/// Classical RK4 on ẋ = G^{-1}p, ṗ = -½ ∂_x(pᵀG^{-1}p) with p0 = G(x0) h0.
/// Returns steps + 1 states. Throws RegularityViolation (with exit time) if
/// the path leaves the model's domain and StepTooLarge on energy drift.
std::vector<GeodesicState> geodesic_shoot(const MetricModel& model, std::span<const double> x0,
                                          std::span<const double> h0, double duration, std::size_t steps,
                                          const GeodesicOptions& options = {});

std::vector<GeodesicState> geodesic_shoot(const DiscreteCurve& c0, const TangentVector& h0, double duration,
                                          std::size_t steps, MetricOrder m, const GeodesicOptions& options = {});

/// d/dt log|e_i(v + t h)| at t = 0. The edge-growth bound 2^{-(m-1)} applies
/// when g^m(h,h) = 1; see unit_normalized().
double log_edge_rate(const DiscreteCurve& c, const TangentVector& h, std::size_t i, MetricOrder m);

/// h / sqrt(g^m_c(h,h)).
TangentVector unit_normalized(const DiscreteCurve& c, const TangentVector& h, MetricOrder m);

// ---- volume growth probe -------------------------------------------------

struct ProbeOptions {
  double step = 1e-3;
  std::size_t threads = 0;  // 0: hardware concurrency
  /// When set, edge lengths are checked against C0 e^{-r/2^{m-1}} ≤ |e_i| ≤ C1 e^{r/2^{m-1}}.
  std::optional<std::size_t> curve_dim;
  std::optional<MetricOrder> edge_bound_order;
};

struct GrowthReport {
  std::vector<double> radii;
  std::vector<double> log_sqrt_det_max;
  double fit_slope = 0.0;
  double fit_intercept = 0.0;
  /// RMS fit residual over the range of the data (0 for constant data).
  double fit_relative_residual = 0.0;
  bool grigoryan_divergent = false;
  std::size_t samples = 0;
  std::size_t edge_bound_checks = 0;
  std::size_t edge_bound_violations = 0;
};

/// Upper bound on how well a straight line must fit log √det G for the
/// growth to count as linear in r.
inline constexpr double kLinearFitTolerance = 0.2;

/// Shoots `samples` unit-speed geodesics in random directions and records the
/// maximum of log √det G reached within each radius. Heuristic, not a proof.
GrowthReport probe_volume_growth(const MetricModel& model, std::span<const double> x0,
                                 std::span<const double> radii, std::size_t samples, std::uint64_t seed,
                                 const ProbeOptions& options = {});

GrowthReport probe_volume_growth(const DiscreteCurve& c0, MetricOrder m, std::span<const double> radii,
                                 std::size_t samples, std::uint64_t seed, ProbeOptions options = {});

}  // namespace curvediff
