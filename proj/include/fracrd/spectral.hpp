#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "fracrd/field.hpp"
#include "fracrd/grid.hpp"

namespace fracrd {

/// Half spectrum of a real field in FFTW r2c layout (last axis n/2+1 long).
using Spectrum = std::vector<std::complex<double>>;

/// Unnormalized forward transform.
Spectrum forward(const Field& u);
/// Inverse transform including the 1/n^N normalization.
Field inverse(const Grid& grid, Spectrum spectrum);

/// |xi|^2 for every entry of the half spectrum.
std::vector<double> squared_wavenumbers(const Grid& grid);

/// 2/3-rule mask over the half spectrum: 0 where any axis has |mode| > n/3.
std::vector<double> dealias_mask(const Grid& grid);

/// Fourier multiplier with a radial symbol given as a function of |xi|^2.
Field apply_multiplier(const Field& u, const std::function<double(double)>& symbol_of_xi2);

/// Exponent of (-Delta)^beta; the symbol is |xi|^(2 beta).
class FracPower {
 public:
  explicit FracPower(double beta);
  double beta() const noexcept { return beta_; }
  /// |xi|^(2 beta) evaluated from |xi|^2.
  double symbol(double xi2) const noexcept;

 private:
  double beta_;
};

/// (-Delta)^beta u by the spectral multiplier; the zero mode is annihilated.
Field frac_power(const Field& u, const FracPower& p);

/// Largest grid accepted by the O(n^{2N}) quadrature oracle, per dimension.
inline constexpr int kQuadratureMaxPoints = 64;

/// C_{N,beta} = 4^beta Gamma(N/2+beta) / (pi^{N/2} |Gamma(-beta)|).
double fractional_constant(int dims, double beta);

/// Epstein zeta of the cubic lattice, sum over k != 0 of |k|^{-s}, continued
/// analytically to s < N (s == N is the pole).
double epstein_zeta(int dims, double s);

/// Real-space principal-value lattice sum for (-Delta)^beta, beta in (0,1).
///
/// The periodic lattice sum pairs +/- offsets, skips the singular node, sums
/// periodic images explicitly with a continuum tail, and adds the leading
/// lattice-zeta correction for the excluded singular cell. No transforms are
/// used, so it is an independent check of frac_power.
Field frac_power_quadrature(const Field& u, const FracPower& p);

/// Real random field whose Fourier modes satisfy |mode| <= max_mode on every
/// axis; normalized to unit sup norm.
Field random_band_limited(const Grid& grid, int max_mode, std::mt19937_64& rng);

}  // namespace fracrd
