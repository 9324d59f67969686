#include "fracrd/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "fracrd/error.hpp"

namespace fracrd {

namespace {

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

// FFTW's planner is not thread-safe; execution with new-array calls is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(const Grid& grid) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(grid.dims(), grid.points_per_axis());
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    int shape[3] = {grid.points_per_axis(), grid.points_per_axis(), grid.points_per_axis()};
    auto* real = fftw_alloc_real(grid.node_count());
    auto* cplx = fftw_alloc_complex(grid.spectrum_size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair pair;
    pair.r2c = fftw_plan_dft_r2c(grid.dims(), shape, real, cplx, flags);
    pair.c2r = fftw_plan_dft_c2r(grid.dims(), shape, cplx, real, flags);
    fftw_free(real);
    fftw_free(cplx);
    plans_.emplace(key, pair);
    return pair;
  }

  ~PlanCache() {
    for (auto& [key, pair] : plans_) {
      fftw_destroy_plan(pair.r2c);
      fftw_destroy_plan(pair.c2r);
    }
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, PlanPair> plans_;
};

// Visits the half spectrum in storage order with the signed mode per axis.
template <typename Fn>
void for_each_mode(const Grid& grid, Fn&& fn) {
  const int n = grid.points_per_axis();
  const int half = n / 2 + 1;
  const int dims = grid.dims();
  std::size_t idx = 0;
  const int outer0 = dims >= 3 ? n : 1;
  const int outer1 = dims >= 2 ? n : 1;
  for (int a = 0; a < outer0; ++a) {
    for (int b = 0; b < outer1; ++b) {
      for (int c = 0; c < half; ++c, ++idx) {
        std::array<int, 3> modes{0, 0, 0};
        // The last (halved) axis never exceeds n/2, so its mode is c itself.
        if (dims == 1) {
          modes[0] = c;
        } else if (dims == 2) {
          modes[0] = grid.mode(b);
          modes[1] = c;
        } else {
          modes[0] = grid.mode(a);
          modes[1] = grid.mode(b);
          modes[2] = c;
        }
        fn(idx, modes);
      }
    }
  }
}

}  // namespace

Spectrum forward(const Field& u) {
  const Grid& grid = u.grid();
  auto plans = PlanCache::instance().get(grid);
  std::vector<double> in(u.values().begin(), u.values().end());
  Spectrum out(grid.spectrum_size());
  fftw_execute_dft_r2c(plans.r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Field inverse(const Grid& grid, Spectrum spectrum) {
  if (spectrum.size() != grid.spectrum_size()) {
    throw Error(ErrorCode::GridMismatch, "spectrum size does not match grid");
  }
  auto plans = PlanCache::instance().get(grid);
  std::vector<double> out(grid.node_count());
  fftw_execute_dft_c2r(plans.c2r, reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
  const double norm = 1.0 / static_cast<double>(grid.node_count());
  for (double& x : out) x *= norm;
  return Field(grid, std::move(out));
}

std::vector<double> squared_wavenumbers(const Grid& grid) {
  std::vector<double> xi2(grid.spectrum_size());
  const double k0 = 2.0 * std::numbers::pi / grid.extent();
  for_each_mode(grid, [&](std::size_t idx, const std::array<int, 3>& modes) {
    double s = 0.0;
    for (int a = 0; a < grid.dims(); ++a) {
      double k = k0 * modes[a];
      s += k * k;
    }
    xi2[idx] = s;
  });
  return xi2;
}

std::vector<double> dealias_mask(const Grid& grid) {
  std::vector<double> mask(grid.spectrum_size());
  const int cutoff = grid.points_per_axis() / 3;
  for_each_mode(grid, [&](std::size_t idx, const std::array<int, 3>& modes) {
    bool keep = true;
    for (int a = 0; a < grid.dims(); ++a) keep = keep && std::abs(modes[a]) <= cutoff;
    mask[idx] = keep ? 1.0 : 0.0;
  });
  return mask;
}

Field apply_multiplier(const Field& u, const std::function<double(double)>& symbol_of_xi2) {
  if (!u.all_finite()) throw Error(ErrorCode::NonFiniteInput, "field contains NaN or Inf");
  Spectrum s = forward(u);
  auto xi2 = squared_wavenumbers(u.grid());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= symbol_of_xi2(xi2[i]);
  return inverse(u.grid(), std::move(s));
}

FracPower::FracPower(double beta) : beta_(beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::BetaOutOfRange, "fractional exponent must lie in (0, 1]");
  }
}

double FracPower::symbol(double xi2) const noexcept {
  if (xi2 == 0.0) return 0.0;
  if (beta_ == 1.0) return xi2;
  return std::pow(xi2, beta_);
}

Field frac_power(const Field& u, const FracPower& p) {
  return apply_multiplier(u, [&p](double xi2) { return p.symbol(xi2); });
}

double fractional_constant(int dims, double beta) {
  return std::pow(4.0, beta) * std::tgamma(0.5 * dims + beta) /
         (std::pow(std::numbers::pi, 0.5 * dims) * std::abs(std::tgamma(-beta)));
}

double epstein_zeta(int dims, double s) {
  if (dims == 1) return 2.0 * std::riemann_zeta(s);
  if (s >= dims) {
    throw Error(ErrorCode::InvalidArgument, "epstein_zeta: only the continued branch s < N is provided");
  }
  // Gaussian-regularized lattice sum minus its continuum integral equals
  // Z(s) - t Z(s-2) + t^2/2 Z(s-4) - ...; two Richardson steps remove the
  // O(t) and O(t^2) terms.
  const double surface = 2.0 * std::pow(std::numbers::pi, 0.5 * dims) / std::tgamma(0.5 * dims);
  auto regularized = [&](double t) {
    const int radius = static_cast<int>(std::ceil(std::sqrt(42.0 / t)));
    double sum = 0.0;
    const int zr = dims >= 3 ? radius : 0;
    const int yr = dims >= 2 ? radius : 0;
    for (int i = -zr; i <= zr; ++i) {
      for (int j = -yr; j <= yr; ++j) {
        for (int k = -radius; k <= radius; ++k) {
          double r2 = double(i) * i + double(j) * j + double(k) * k;
          if (r2 == 0.0) continue;
          sum += std::pow(r2, -0.5 * s) * std::exp(-t * r2);
        }
      }
    }
    double continuum = surface * std::tgamma(0.5 * (dims - s)) / (2.0 * std::pow(t, 0.5 * (dims - s)));
    return sum - continuum;
  };
  const double t = 0.04;
  double f1 = regularized(t);
  double f2 = regularized(t / 2);
  double f4 = regularized(t / 4);
  double r1 = 2.0 * f2 - f1;  // error O(t^2)
  double r2 = 2.0 * f4 - f2;
  return (4.0 * r2 - r1) / 3.0;
}

Field frac_power_quadrature(const Field& u, const FracPower& p) {
  const Grid& grid = u.grid();
  const double beta = p.beta();
  if (!(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::BetaOutOfRange,
                "quadrature oracle needs beta strictly inside (0,1); the integral form fails at beta = 1");
  }
  if (grid.points_per_axis() > kQuadratureMaxPoints) {
    throw Error(ErrorCode::GridTooLarge, "quadrature oracle is limited to 64 points per axis");
  }
  if (!u.all_finite()) throw Error(ErrorCode::NonFiniteInput, "field contains NaN or Inf");

  const int dims = grid.dims();
  const int n = grid.points_per_axis();
  const double h = grid.spacing();
  const double L = grid.extent();
  const double c = fractional_constant(dims, beta);
  const double expo = -(dims + 2.0 * beta);
  const int images = dims == 1 ? 64 : (dims == 2 ? 8 : 3);

  // Periodized weight for every lattice offset.
  std::vector<double> weight(grid.node_count(), 0.0);
  for (std::size_t o = 1; o < grid.node_count(); ++o) {
    auto d = grid.position(o);
    const int zr = dims >= 3 ? images : 0;
    const int yr = dims >= 2 ? images : 0;
    double w = 0.0;
    for (int i = -zr; i <= zr; ++i) {
      for (int j = -yr; j <= yr; ++j) {
        for (int k = -images; k <= images; ++k) {
          std::array<int, 3> shift{0, 0, 0};
          if (dims == 1) shift = {k, 0, 0};
          if (dims == 2) shift = {j, k, 0};
          if (dims == 3) shift = {i, j, k};
          double r2 = 0.0;
          for (int a = 0; a < dims; ++a) {
            double z = d[a] + shift[a] * L;
            r2 += z * z;
          }
          w += std::pow(r2, 0.5 * expo);
        }
      }
    }
    weight[o] = c * grid.cell_volume() * w;
  }

  // Images beyond the explicit cube, approximated by the continuum outside the
  // ball of equal volume; they see u(x) - mean(u).
  const double ball_volume = std::pow(std::numbers::pi, 0.5 * dims) / std::tgamma(0.5 * dims + 1.0);
  const double cube_side = (2.0 * images + 1.0) * L;
  const double r_far = cube_side / std::pow(ball_volume, 1.0 / dims);
  const double surface = 2.0 * std::pow(std::numbers::pi, 0.5 * dims) / std::tgamma(0.5 * dims);
  const double tail = c * surface * std::pow(r_far, -2.0 * beta) / (2.0 * beta);

  // Leading lattice correction for the excluded singular cell.
  const double singular = c * epstein_zeta(dims, dims + 2.0 * beta - 2.0) *
                          std::pow(h, 2.0 - 2.0 * beta) / (2.0 * dims);

  const double avg = mean(u);
  std::vector<double> out(grid.node_count());
  for (std::size_t x = 0; x < grid.node_count(); ++x) {
    auto ix = grid.unravel(x);
    const double ux = u[x];
    double sum = 0.0;
    for (std::size_t o = 1; o < grid.node_count(); ++o) {
      auto io = grid.unravel(o);
      std::array<int, 3> iy{0, 0, 0};
      for (int a = 0; a < dims; ++a) iy[a] = (ix[a] + io[a]) % n;
      sum += weight[o] * (ux - u[grid.ravel(iy)]);
    }
    // Sixth-order central stencil for -Delta u.
    static constexpr double stencil[4] = {-49.0 / 18.0, 1.5, -0.15, 1.0 / 90.0};
    double neg_lap = 0.0;
    for (int a = 0; a < dims; ++a) {
      double acc = stencil[0] * ux;
      for (int r = 1; r <= 3; ++r) {
        auto ip = ix;
        auto im = ix;
        ip[a] = (ix[a] + r) % n;
        im[a] = (ix[a] + n - r) % n;
        acc += stencil[r] * (u[grid.ravel(ip)] + u[grid.ravel(im)]);
      }
      neg_lap -= acc / (h * h);
    }
    out[x] = sum + tail * (ux - avg) - singular * neg_lap;
  }
  return Field(grid, std::move(out));
}

Field random_band_limited(const Grid& grid, int max_mode, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Spectrum s(grid.spectrum_size(), {0.0, 0.0});
  for_each_mode(grid, [&](std::size_t idx, const std::array<int, 3>& modes) {
    bool inside = true;
    for (int a = 0; a < grid.dims(); ++a) inside = inside && std::abs(modes[a]) <= max_mode;
    // Always draw so the stream position does not depend on max_mode.
    double re = normal(rng);
    double im = normal(rng);
    if (inside) s[idx] = {re, im};
  });
  Field raw = inverse(grid, std::move(s));
  double sup = sup_norm(raw);
  if (sup == 0.0) return raw;
  return (1.0 / sup) * raw;
}

}  // namespace fracrd
