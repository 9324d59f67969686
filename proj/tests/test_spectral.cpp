#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fracrd/error.hpp"
#include "fracrd/spectral.hpp"

using namespace fracrd;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Field sine(const Grid& g, double k) {
  return Field::from_function(g, [k](const std::array<double, 3>& x) { return std::sin(k * x[0]); });
}

double rel_l2(const Field& a, const Field& b) {
  return lp_norm(a - b, 2.0) / lp_norm(b, 2.0);
}

template <typename Fn>
void expect_code(ErrorCode code, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Grid, OneDimensionalLayout) {
  Grid g = make_grid(1, kTwoPi, 64);
  EXPECT_DOUBLE_EQ(g.spacing(), kTwoPi / 64);
  EXPECT_DOUBLE_EQ(g.spacing() * g.points_per_axis(), g.extent());
  EXPECT_EQ(g.mode(0), 0);
  EXPECT_EQ(g.wavenumber(0), 0.0);
  EXPECT_EQ(g.mode(31), 31);
  EXPECT_EQ(g.mode(32), -32);
  EXPECT_EQ(g.mode(63), -1);
  for (int j = 0; j < 64; ++j) {
    EXPECT_GE(g.coordinate(j), -kTwoPi / 2);
    EXPECT_LT(g.coordinate(j), kTwoPi / 2);
  }
}

TEST(Grid, TwoDimensionalFrequencyStep) {
  Grid g = make_grid(2, 40.0, 128);
  EXPECT_EQ(g.node_count(), 128u * 128u);
  EXPECT_DOUBLE_EQ(g.wavenumber(1), kTwoPi / 40.0);
  auto idx = g.unravel(g.ravel({5, 77, 0}));
  EXPECT_EQ(idx[0], 5);
  EXPECT_EQ(idx[1], 77);
}

TEST(Grid, RejectsBadShapes) {
  expect_code(ErrorCode::NotPowerOfTwo, [] { make_grid(1, kTwoPi, 63); });
  expect_code(ErrorCode::NotPowerOfTwo, [] { make_grid(1, kTwoPi, 4); });
  expect_code(ErrorCode::InvalidDims, [] { make_grid(4, 1.0, 8); });
  expect_code(ErrorCode::InvalidDims, [] { make_grid(0, 1.0, 8); });
  expect_code(ErrorCode::MemoryBudgetExceeded, [] { make_grid(3, 1.0, 512, 1u << 20); });
}

TEST(FracPower, RejectsExponentOutsideUnitInterval) {
  expect_code(ErrorCode::BetaOutOfRange, [] { FracPower(0.0); });
  expect_code(ErrorCode::BetaOutOfRange, [] { FracPower(1.5); });
  EXPECT_NO_THROW(FracPower(1.0));
}

TEST(FracPower, ConstantIsAnnihilated) {
  Grid g = make_grid(2, 10.0, 16);
  Field out = frac_power(Field::constant(g, 3.7), FracPower(0.4));
  EXPECT_LT(sup_norm(out), 1e-13);
}

TEST(FracPower, SineEigenfunctions) {
  Grid g = make_grid(1, kTwoPi, 64);
  Field a = frac_power(sine(g, 2.0), FracPower(0.5));
  EXPECT_LT(sup_norm(a - 2.0 * sine(g, 2.0)), 1e-13);
  Field b = frac_power(sine(g, 3.0), FracPower(1.0));
  EXPECT_LT(sup_norm(b - 9.0 * sine(g, 3.0)), 1e-12);
}

TEST(FracPower, EigenfunctionExactnessOnEveryMode) {
  Grid g = make_grid(1, 5.0, 32);
  for (int j = 1; j < 16; ++j) {
    double xi = g.wavenumber(j);
    for (double beta : {0.2, 0.5, 0.77, 1.0}) {
      Field e = Field::from_function(g, [xi](const auto& x) { return std::cos(xi * x[0]); });
      Field out = frac_power(e, FracPower(beta));
      EXPECT_LT(sup_norm(out - std::pow(xi, 2 * beta) * e), 1e-12 * std::pow(xi, 2 * beta))
          << "mode " << j << " beta " << beta;
    }
  }
}

TEST(FracPower, TwoDimensionalModeUsesEuclideanWavenumber) {
  Grid g = make_grid(2, kTwoPi, 32);
  Field e = Field::from_function(g, [](const auto& x) { return std::cos(3 * x[0] + 4 * x[1]); });
  Field out = frac_power(e, FracPower(0.5));
  EXPECT_LT(sup_norm(out - 5.0 * e), 1e-11);
}

TEST(FracPower, LinearityMeanAnnihilationAndComposition) {
  std::mt19937_64 rng(7);
  Grid g = make_grid(2, 12.0, 32);
  for (int trial = 0; trial < 10; ++trial) {
    Field u = random_band_limited(g, 6, rng);
    Field w = random_band_limited(g, 6, rng);
    const double a = 1.7, b = -0.3;
    FracPower p(0.35);
    Field lhs = frac_power(a * u + b * w, p);
    Field rhs = a * frac_power(u, p) + b * frac_power(w, p);
    EXPECT_LT(sup_norm(lhs - rhs), 1e-12 * (1 + sup_norm(rhs)));
    EXPECT_LT(std::abs(mean(frac_power(u, p))), 1e-13);
    Field twice = frac_power(frac_power(u, FracPower(0.3)), FracPower(0.45));
    Field once = frac_power(u, FracPower(0.75));
    EXPECT_LT(sup_norm(twice - once), 1e-12 * sup_norm(once));
  }
}

TEST(FracPower, RejectsNonFiniteInput) {
  Grid g = make_grid(1, 1.0, 8);
  std::vector<double> v(8, 0.0);
  v[3] = std::nan("");
  expect_code(ErrorCode::NonFiniteInput, [&] { frac_power(Field(g, v), FracPower(0.5)); });
}

TEST(FractionalConstant, KnownValues) {
  // N = 1, beta = 1/2 gives 1/pi (Cauchy kernel).
  EXPECT_NEAR(fractional_constant(1, 0.5), 1.0 / std::numbers::pi, 1e-15);
  // N = 3, beta = 1/2 gives 1/(pi^2).
  EXPECT_NEAR(fractional_constant(3, 0.5), 1.0 / (std::numbers::pi * std::numbers::pi), 1e-15);
}

TEST(EpsteinZeta, SquareLatticeMatchesClosedForm) {
  // Square lattice: Z_2(s) = 4 zeta(s/2) beta_D(s/2) with the Dirichlet beta.
  // At s = 0.6 (mpmath): zeta(0.3) = -0.904559257253984, beta_D(0.3) = 0.607183612954786.
  double z2 = epstein_zeta(2, 0.6);
  EXPECT_NEAR(z2, 4.0 * (-0.904559257253984) * 0.607183612954786, 1e-4);
  EXPECT_NEAR(epstein_zeta(1, 0.0), -1.0, 1e-14);
}

TEST(Quadrature, ConstantGivesZero) {
  Grid g = make_grid(1, kTwoPi, 32);
  Field out = frac_power_quadrature(Field::constant(g, 2.5), FracPower(0.5));
  EXPECT_LT(sup_norm(out), 1e-12);
}

TEST(Quadrature, SineAtHalfMatchesSpectral) {
  Grid g = make_grid(1, kTwoPi, 64);
  Field u = sine(g, 1.0);
  Field spectral = frac_power(u, FracPower(0.5));
  Field quad = frac_power_quadrature(u, FracPower(0.5));
  EXPECT_LT(sup_norm(spectral - u), 1e-13);
  EXPECT_LT(rel_l2(quad, spectral), 0.02);
}

TEST(Quadrature, PreconditionsAreEnforced) {
  Grid g = make_grid(1, kTwoPi, 64);
  expect_code(ErrorCode::BetaOutOfRange, [&] { frac_power_quadrature(sine(g, 1), FracPower(1.0)); });
  Grid big = make_grid(1, kTwoPi, 128);
  expect_code(ErrorCode::GridTooLarge, [&] { frac_power_quadrature(sine(big, 1), FracPower(0.5)); });
}

TEST(Quadrature, AgreesWithSpectralOnBandLimitedFields) {
  std::mt19937_64 rng(2024);
  Grid g = make_grid(1, kTwoPi, 64);
  for (double beta : {0.3, 0.5, 0.8}) {
    for (int trial = 0; trial < 5; ++trial) {
      Field u = random_band_limited(g, 8, rng);
      double err = rel_l2(frac_power_quadrature(u, FracPower(beta)), frac_power(u, FracPower(beta)));
      EXPECT_LT(err, 0.05) << "beta " << beta;
    }
  }
}

TEST(Quadrature, TwoDimensionalLowModeAgreement) {
  Grid g = make_grid(2, kTwoPi, 16);
  Field u = Field::from_function(g, [](const auto& x) { return std::cos(x[0]) + 0.5 * std::sin(x[0] + x[1]); });
  for (double beta : {0.3, 0.6}) {
    double err = rel_l2(frac_power_quadrature(u, FracPower(beta)), frac_power(u, FracPower(beta)));
    EXPECT_LT(err, 0.05) << "beta " << beta;
  }
}

TEST(RandomBandLimited, RespectsBandAndIsDeterministic) {
  Grid g = make_grid(1, 10.0, 64);
  std::mt19937_64 a(3), b(3);
  Field u = random_band_limited(g, 5, a);
  Field v = random_band_limited(g, 5, b);
  EXPECT_EQ(sup_norm(u - v), 0.0);
  EXPECT_NEAR(sup_norm(u), 1.0, 1e-15);
  Spectrum s = forward(u);
  for (std::size_t j = 6; j < s.size(); ++j) EXPECT_LT(std::abs(s[j]), 1e-12);
}
