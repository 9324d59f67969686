#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "fracrd/field.hpp"
#include "fracrd/grid.hpp"

namespace fracrd {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Kernel of d/dt + mu (-Delta)^alpha on a periodic grid: K_{alpha,mu}(x,t) = K_alpha(x, mu t).
class KernelSpec {
 public:
  KernelSpec(double alpha, double mu, Grid grid);

  double alpha() const noexcept { return alpha_; }
  double mu() const noexcept { return mu_; }
  const Grid& grid() const noexcept { return grid_; }

  /// exp(-mu t |xi|^(2 alpha)) from |xi|^2.
  double symbol(double xi2, double t) const noexcept;
  /// Kernel width (mu t)^(1/(2 alpha)).
  double width(double t) const noexcept;

 private:
  double alpha_;
  double mu_;
  Grid grid_;
};

/// Inverse transform of the heat symbol, i.e. S(t) applied to a unit-mass
/// discrete delta at the origin. Throws NonPositiveTime.
Field heat_kernel_field(const KernelSpec& spec, double t);

/// S(t)u; t = 0 is the identity. Throws NegativeTime.
Field semigroup_apply(const Field& u, double alpha, double mu, double t);
Field semigroup_apply(const Field& u, const KernelSpec& spec, double t);

struct NormMonotonicity {
  bool non_increasing = true;
  /// Largest relative increase of ||S(t)u||_p between consecutive times, p in {1, 2, inf}.
  double worst_increase = 0.0;
};

/// Checks that the L^1, L^2 and L^inf norms of S(t)u do not grow along `times`
/// (sorted internally). `tolerance` is relative.
NormMonotonicity check_norm_monotone(const Field& u, const KernelSpec& spec, std::vector<double> times,
                                     double tolerance = 1e-12);

/// Periodized comparison function t (t^{1/alpha} + |x|^2)^{-(N+2 alpha)/2}
/// evaluated at kernel time mu*t on every node.
Field periodized_envelope(const KernelSpec& spec, double t);

struct KernelDiagnosticsOptions {
  /// Restrict the envelope ratios to |x| < radius; unset means the whole grid.
  std::optional<double> envelope_radius;
};

struct KernelTimeDiagnostics {
  double time = 0.0;
  double envelope_min = 0.0;
  double envelope_max = 0.0;
  double self_similarity_residual = 0.0;
  /// Kernel mass at nodes with |x| >= L/4.
  double tail_mass = 0.0;
  double peak = 0.0;
  double mass = 0.0;
  double min_value = 0.0;
};

struct KernelDiagnostics {
  std::vector<KernelTimeDiagnostics> per_time;
  double envelope_min = 0.0;
  double envelope_max = 0.0;
  double self_similarity_residual = 0.0;
  double tail_mass = 0.0;
};

/// Estimated continuum mass outside the box from the L/4 monitor: power-law
/// tails scale like R^{-2 alpha}.
double estimated_outside_mass(double tail_mass, double alpha);

/// Envelope comparability, self-similarity against the t = 1 profile and the
/// wrap-around monitor. Throws NonPositiveTime, TailMassTooLarge (estimated
/// outside-box mass above 1%).
KernelDiagnostics kernel_diagnostics(const KernelSpec& spec, const std::vector<double>& times,
                                     const KernelDiagnosticsOptions& options = {});

struct SmoothingReport {
  double alpha = 0.0;
  double mu = 0.0;
  double r = 1.0;
  double p = 1.0;
  /// Order of the fractional derivative applied after the semigroup.
  double beta = 0.0;
  double fitted_slope = 0.0;
  double predicted_slope = 0.0;
  double relative_error = 0.0;
  /// Largest kernel tail mass over the fitted times.
  double tail_mass = 0.0;
  std::vector<double> times;
  std::vector<double> ratios;
};

/// -beta/alpha - (N/(2 alpha)) (1/r - 1/p).
double predicted_smoothing_slope(int dims, double alpha, double r, double p, double beta = 0.0);

/// Fits the log-log decay of ||(-Delta)^beta S(t) phi||_p / ||phi||_r.
///
/// For r = 1 the probe is the discrete delta normalized in L^1, which is
/// extremal. For r > 1 the probe is a Gaussian whose width follows the kernel
/// width, so the ratio samples the dilation-covariant operator norm. Only
/// times whose kernel width lies in [4h, L/8] are used.
SmoothingReport smoothing_rate_fit(const KernelSpec& spec, double r, double p,
                                   const std::vector<double>& times, double beta = 0.0);

/// n logarithmically spaced values in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int n);

}  // namespace fracrd
