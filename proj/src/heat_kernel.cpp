#include "fracrd/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracrd/error.hpp"
#include "fracrd/spectral.hpp"

namespace fracrd {

KernelSpec::KernelSpec(double alpha, double mu, Grid grid) : alpha_(alpha), mu_(mu), grid_(grid) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "kernel order alpha must lie in (0, 1]");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorCode::InvalidArgument, "diffusivity mu must be positive");
  }
}

double KernelSpec::symbol(double xi2, double t) const noexcept {
  if (xi2 == 0.0 || t == 0.0) return 1.0;
  const double power = alpha_ == 1.0 ? xi2 : std::pow(xi2, alpha_);
  return std::exp(-mu_ * t * power);
}

double KernelSpec::width(double t) const noexcept { return std::pow(mu_ * t, 1.0 / (2.0 * alpha_)); }

Field heat_kernel_field(const KernelSpec& spec, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "kernel time must be positive");
  const Grid& grid = spec.grid();
  // The delta of unit mass has a flat spectrum 1/h^N.
  Spectrum s(grid.spectrum_size());
  auto xi2 = squared_wavenumbers(grid);
  const double height = 1.0 / grid.cell_volume();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = height * spec.symbol(xi2[i], t);
  return inverse(grid, std::move(s));
}

Field semigroup_apply(const Field& u, double alpha, double mu, double t) {
  return semigroup_apply(u, KernelSpec(alpha, mu, u.grid()), t);
}

Field semigroup_apply(const Field& u, const KernelSpec& spec, double t) {
  if (t < 0.0) throw Error(ErrorCode::NegativeTime, "semigroup time must be non-negative");
  if (!(u.grid() == spec.grid())) throw Error(ErrorCode::GridMismatch, "field and kernel grids differ");
  if (t == 0.0) return u;
  return apply_multiplier(u, [&](double xi2) { return spec.symbol(xi2, t); });
}

NormMonotonicity check_norm_monotone(const Field& u, const KernelSpec& spec, std::vector<double> times,
                                     double tolerance) {
  std::sort(times.begin(), times.end());
  NormMonotonicity result;
  std::array<double, 3> previous{lp_norm(u, 1.0), lp_norm(u, 2.0), sup_norm(u)};
  for (double t : times) {
    Field st = semigroup_apply(u, spec, t);
    std::array<double, 3> now{lp_norm(st, 1.0), lp_norm(st, 2.0), sup_norm(st)};
    for (int k = 0; k < 3; ++k) {
      double increase = previous[k] > 0.0 ? (now[k] - previous[k]) / previous[k] : now[k];
      result.worst_increase = std::max(result.worst_increase, increase);
      if (increase > tolerance) result.non_increasing = false;
    }
    previous = now;
  }
  return result;
}

namespace {

double ball_volume(int dims) {
  return std::pow(std::numbers::pi, 0.5 * dims) / std::tgamma(0.5 * dims + 1.0);
}

double sphere_area(int dims) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dims) / std::tgamma(0.5 * dims);
}

}  // namespace

Field periodized_envelope(const KernelSpec& spec, double t) {
  const Grid& grid = spec.grid();
  const int dims = grid.dims();
  const double tau = spec.mu() * t;
  const double alpha = spec.alpha();
  const double core = std::pow(tau, 1.0 / alpha);
  const double expo = -0.5 * (dims + 2.0 * alpha);
  const double L = grid.extent();
  const int images = dims == 1 ? 64 : (dims == 2 ? 8 : 2);
  // Images outside the explicit cube enter through the continuum far field.
  const double r_far = (2.0 * images + 1.0) * L / std::pow(ball_volume(dims), 1.0 / dims);
  const double far = tau * sphere_area(dims) * std::pow(r_far, -2.0 * alpha) /
                     (2.0 * alpha * grid.volume());

  std::vector<double> out(grid.node_count());
  const int zr = dims >= 3 ? images : 0;
  const int yr = dims >= 2 ? images : 0;
  for (std::size_t node = 0; node < out.size(); ++node) {
    auto x = grid.position(node);
    double sum = 0.0;
    for (int i = -zr; i <= zr; ++i) {
      for (int j = -yr; j <= yr; ++j) {
        for (int k = -images; k <= images; ++k) {
          std::array<int, 3> shift{k, 0, 0};
          if (dims == 2) shift = {j, k, 0};
          if (dims == 3) shift = {i, j, k};
          double r2 = 0.0;
          for (int a = 0; a < dims; ++a) {
            double z = x[a] + shift[a] * L;
            r2 += z * z;
          }
          sum += tau * std::pow(core + r2, expo);
        }
      }
    }
    out[node] = sum + far;
  }
  return Field(grid, std::move(out));
}

double estimated_outside_mass(double tail_mass, double alpha) {
  return tail_mass * std::pow(2.0, -2.0 * alpha);
}

KernelDiagnostics kernel_diagnostics(const KernelSpec& spec, const std::vector<double>& times,
                                     const KernelDiagnosticsOptions& options) {
  if (times.empty()) throw Error(ErrorCode::InvalidArgument, "kernel_diagnostics needs at least one time");
  for (double t : times) {
    if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "diagnostic times must be positive");
  }
  const Grid& grid = spec.grid();
  const double radius = options.envelope_radius.value_or(kInfinity);
  const double quarter = 0.25 * grid.extent();

  KernelDiagnostics diag;
  diag.envelope_min = kInfinity;
  diag.envelope_max = 0.0;
  for (double t : times) {
    KernelTimeDiagnostics row;
    row.time = t;
    Field k = heat_kernel_field(spec, t);
    row.peak = k[0];
    row.mass = integral(k);
    row.min_value = min_value(k);

    double tail = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (grid.radius(i) >= quarter) tail += k[i];
    }
    row.tail_mass = tail * grid.cell_volume();
    if (estimated_outside_mass(row.tail_mass, spec.alpha()) > 0.01) {
      throw Error(ErrorCode::TailMassTooLarge,
                  "kernel mass near the box boundary is too large for t = " + std::to_string(t));
    }

    Field env = periodized_envelope(spec, t);
    row.envelope_min = kInfinity;
    row.envelope_max = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (grid.radius(i) >= radius) continue;
      double ratio = k[i] / env[i];
      row.envelope_min = std::min(row.envelope_min, ratio);
      row.envelope_max = std::max(row.envelope_max, ratio);
    }

    // K(x,t) = s^{-N} Ktilde(x/s) with s the kernel width; sampling Ktilde on
    // the grid shrunk by s puts x/s on its nodes.
    const double s = spec.width(t);
    KernelSpec unit(spec.alpha(), 1.0, rescaled(grid, 1.0 / s));
    Field profile = heat_kernel_field(unit, 1.0);
    const double scale = std::pow(s, -grid.dims());
    double residual = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      residual = std::max(residual, std::abs(k[i] - scale * profile[i]));
    }
    row.self_similarity_residual = residual / row.peak;

    diag.envelope_min = std::min(diag.envelope_min, row.envelope_min);
    diag.envelope_max = std::max(diag.envelope_max, row.envelope_max);
    diag.self_similarity_residual = std::max(diag.self_similarity_residual, row.self_similarity_residual);
    diag.tail_mass = std::max(diag.tail_mass, row.tail_mass);
    diag.per_time.push_back(row);
  }
  return diag;
}

double predicted_smoothing_slope(int dims, double alpha, double r, double p, double beta) {
  const double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  return -beta / alpha - (dims / (2.0 * alpha)) * (inv_r - inv_p);
}

SmoothingReport smoothing_rate_fit(const KernelSpec& spec, double r, double p,
                                   const std::vector<double>& times, double beta) {
  if (!(r >= 1.0)) throw Error(ErrorCode::InvalidArgument, "source exponent r must be >= 1");
  if (r > p) throw Error(ErrorCode::ExponentOrder, "smoothing estimate needs r <= p");
  if (beta < 0.0 || beta > 1.0) throw Error(ErrorCode::InvalidArgument, "derivative order must lie in [0, 1]");
  const Grid& grid = spec.grid();
  const double h = grid.spacing();

  SmoothingReport report;
  report.alpha = spec.alpha();
  report.mu = spec.mu();
  report.r = r;
  report.p = p;
  report.beta = beta;
  report.predicted_slope = predicted_smoothing_slope(grid.dims(), spec.alpha(), r, p, beta);

  for (double t : times) {
    if (!(t > 0.0)) continue;
    const double w = spec.width(t);
    if (w < 4.0 * h || w > grid.extent() / 8.0) continue;
    report.times.push_back(t);
  }
  if (report.times.size() < 5) {
    throw Error(ErrorCode::DegenerateFit,
                "fewer than 5 times with kernel width in [4h, L/8]; got " + std::to_string(report.times.size()));
  }

  auto derivative = [&](const Field& f) {
    return beta > 0.0 ? frac_power(f, FracPower(beta)) : f;
  };

  for (double t : report.times) {
    double ratio = 0.0;
    if (r == 1.0) {
      Field k = heat_kernel_field(spec, t);
      ratio = lp_norm(derivative(k), p);
      double tail = 0.0;
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (grid.radius(i) >= 0.25 * grid.extent()) tail += k[i];
      }
      report.tail_mass = std::max(report.tail_mass, tail * grid.cell_volume());
    } else {
      const double w = spec.width(t);
      Field probe = Field::from_function(grid, [w](const std::array<double, 3>& x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * w * w));
      });
      ratio = lp_norm(derivative(semigroup_apply(probe, spec, t)), p) / lp_norm(probe, r);
    }
    report.ratios.push_back(ratio);
  }

  // Least squares slope of log(ratio) against log(t).
  const double n = static_cast<double>(report.times.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    double x = std::log(report.times[i]);
    double y = std::log(report.ratios[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  report.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  report.relative_error = report.predicted_slope != 0.0
                              ? std::abs(report.fitted_slope - report.predicted_slope) /
                                    std::abs(report.predicted_slope)
                              : std::abs(report.fitted_slope);
  return report;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 0) return out;
  if (n == 1) return {lo};
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out.push_back(std::exp(a + (b - a) * i / (n - 1)));
  return out;
}

}  // namespace fracrd
