#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fracrd/error.hpp"
#include "fracrd/heat_kernel.hpp"
#include "fracrd/spectral.hpp"

using namespace fracrd;

namespace {

constexpr double kPi = std::numbers::pi;

template <typename Fn>
void expect_code(ErrorCode code, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Times whose kernel width spans [4h, L/32].
std::vector<double> fit_times(const Grid& g, double alpha, int count = 7) {
  double lo = std::pow(4.0 * g.spacing() * 1.001, 2 * alpha);
  double hi = std::pow(g.extent() / 32.0, 2 * alpha);
  return log_spaced(lo, hi, count);
}

}  // namespace

TEST(HeatKernel, GaussianPeakMatchesClosedForm) {
  Grid g = make_grid(1, 200.0, 1024);
  Field k = heat_kernel_field(KernelSpec(1.0, 1.0, g), 1.0);
  // (4 pi t)^{-1/2} at t = 1.
  EXPECT_NEAR(k[0] / (1.0 / std::sqrt(4.0 * kPi)) - 1.0, 0.0, 1e-10);
}

TEST(HeatKernel, PoissonPeakMatchesClosedForm) {
  Grid g = make_grid(1, 200.0, 1024);
  Field k = heat_kernel_field(KernelSpec(0.5, 1.0, g), 1.0);
  // t / (pi (t^2 + x^2)) at x = 0, t = 1; periodic images add about 8e-5.
  EXPECT_NEAR(k[0] * kPi - 1.0, 0.0, 1e-4);
}

TEST(HeatKernel, DiffusivityRescalesTime) {
  Grid g = make_grid(1, 100.0, 512);
  Field a = heat_kernel_field(KernelSpec(0.6, 2.5, g), 0.4);
  Field b = heat_kernel_field(KernelSpec(0.6, 1.0, g), 1.0);
  EXPECT_LT(sup_norm(a - b), 1e-14);
}

TEST(HeatKernel, UnitMassPositivityAndPeakAtOrigin) {
  for (int dims : {1, 2}) {
    Grid g = make_grid(dims, 60.0, dims == 1 ? 512 : 128);
    for (double alpha : {0.3, 0.5, 0.8, 1.0}) {
      KernelSpec spec(alpha, 1.0, g);
      Field k = heat_kernel_field(spec, 2.0);
      EXPECT_NEAR(integral(k), 1.0, 1e-12);
      EXPECT_GE(min_value(k), -1e-12 * k[0]);
      EXPECT_DOUBLE_EQ(sup_norm(k), k[0]);
    }
  }
}

TEST(HeatKernel, RejectsNonPositiveTime) {
  Grid g = make_grid(1, 10.0, 64);
  expect_code(ErrorCode::NonPositiveTime, [&] { heat_kernel_field(KernelSpec(0.5, 1.0, g), 0.0); });
  expect_code(ErrorCode::NegativeTime,
              [&] { semigroup_apply(Field::constant(g, 1.0), 0.5, 1.0, -1.0); });
}

TEST(Semigroup, IdentityEigenfunctionAndComposition) {
  Grid g = make_grid(1, 2 * kPi, 64);
  Field u = Field::from_function(g, [](const auto& x) { return std::sin(3 * x[0]); });
  EXPECT_EQ(sup_norm(semigroup_apply(u, 0.7, 1.3, 0.0) - u), 0.0);
  Field s = semigroup_apply(u, 0.7, 1.3, 0.2);
  EXPECT_LT(sup_norm(s - std::exp(-1.3 * 0.2 * std::pow(3.0, 1.4)) * u), 1e-14);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> time(0.0, 2.0);
  Grid g2 = make_grid(2, 10.0, 32);
  KernelSpec spec(0.45, 0.8, g2);
  Field w = random_band_limited(g2, 10, rng);
  for (int i = 0; i < 100; ++i) {
    double a = time(rng), b = time(rng);
    Field lhs = semigroup_apply(semigroup_apply(w, spec, a), spec, b);
    Field rhs = semigroup_apply(w, spec, a + b);
    ASSERT_LT(sup_norm(lhs - rhs), 1e-13);
    ASSERT_NEAR(mean(lhs), mean(w), 1e-14);
  }
}

TEST(Semigroup, NormsDoNotIncrease) {
  std::mt19937_64 rng(5);
  Grid g = make_grid(1, 20.0, 256);
  Field bump = Field::from_function(g, [](const auto& x) { return std::exp(-x[0] * x[0]); });
  Field noise = random_band_limited(g, 40, rng);
  Field u = bump + 0.3 * noise;
  for (double alpha : {0.25, 0.5, 0.9}) {
    auto check = check_norm_monotone(u, KernelSpec(alpha, 1.0, g), log_spaced(1e-3, 10.0, 12));
    EXPECT_TRUE(check.non_increasing) << "alpha " << alpha << " worst " << check.worst_increase;
  }
}

TEST(KernelDiagnostics, PoissonEnvelopeRatioIsInversePi) {
  Grid g = make_grid(1, 200.0, 1024);
  KernelDiagnosticsOptions opts;
  opts.envelope_radius = g.extent() / 8.0;
  auto d = kernel_diagnostics(KernelSpec(0.5, 1.0, g), {1.0}, opts);
  EXPECT_NEAR(d.envelope_min * kPi, 1.0, 1e-3);
  EXPECT_NEAR(d.envelope_max * kPi, 1.0, 1e-3);
}

TEST(KernelDiagnostics, SelfSimilarityIsExactUpToRoundOff) {
  Grid g = make_grid(1, 400.0, 2048);
  for (double alpha : {0.5, 0.75, 1.0}) {
    auto d = kernel_diagnostics(KernelSpec(alpha, 1.0, g), {0.5, 1.0, 2.0});
    EXPECT_LT(d.self_similarity_residual, 1e-6) << "alpha " << alpha;
  }
}

TEST(KernelDiagnostics, EnvelopeRatiosStayInAFixedBandOverADecade) {
  Grid g = make_grid(1, 800.0, 8192);
  for (double alpha : {0.5, 0.75, 0.9}) {
    auto d = kernel_diagnostics(KernelSpec(alpha, 1.0, g), log_spaced(0.5, 5.0, 5));
    EXPECT_GT(d.envelope_min, 0.0);
    EXPECT_TRUE(std::isfinite(d.envelope_max));
    // Each time's band agrees with the others to a few percent.
    for (const auto& row : d.per_time) {
      EXPECT_NEAR(row.envelope_min / d.per_time.front().envelope_min, 1.0, 0.05);
      EXPECT_NEAR(row.envelope_max / d.per_time.front().envelope_max, 1.0, 0.05);
    }
  }
}

TEST(KernelDiagnostics, TailMassGuard) {
  Grid g = make_grid(1, 50.0, 256);
  expect_code(ErrorCode::TailMassTooLarge, [&] { kernel_diagnostics(KernelSpec(0.5, 1.0, g), {20.0}); });
  expect_code(ErrorCode::NonPositiveTime, [&] { kernel_diagnostics(KernelSpec(0.5, 1.0, g), {-1.0}); });
}

TEST(Smoothing, PredictedSlopeArithmetic) {
  EXPECT_DOUBLE_EQ(predicted_smoothing_slope(1, 0.5, 1, kInfinity), -1.0);
  EXPECT_DOUBLE_EQ(predicted_smoothing_slope(1, 0.75, 1, 2), -1.0 / 3.0);
  EXPECT_DOUBLE_EQ(predicted_smoothing_slope(2, 0.5, 1, 2), -1.0);
  EXPECT_DOUBLE_EQ(predicted_smoothing_slope(1, 0.5, 2, 2, 0.25), -0.5);
  EXPECT_DOUBLE_EQ(predicted_smoothing_slope(3, 0.5, 4, 4), 0.0);
}

TEST(Smoothing, DeltaProbeRecoversOneToInfinityRate) {
  Grid g = make_grid(1, 200.0, 1024);
  KernelSpec spec(0.5, 1.0, g);
  auto rep = smoothing_rate_fit(spec, 1.0, kInfinity, fit_times(g, 0.5));
  EXPECT_DOUBLE_EQ(rep.predicted_slope, -1.0);
  EXPECT_LT(rep.relative_error, 0.05) << rep.fitted_slope;
}

TEST(Smoothing, EqualExponentsHaveNoDecay) {
  Grid g = make_grid(1, 200.0, 1024);
  KernelSpec spec(0.5, 1.0, g);
  auto l1 = smoothing_rate_fit(spec, 1.0, 1.0, fit_times(g, 0.5));
  EXPECT_LT(std::abs(l1.fitted_slope), 0.02);
  auto l2 = smoothing_rate_fit(spec, 2.0, 2.0, fit_times(g, 0.5));
  EXPECT_LT(std::abs(l2.fitted_slope), 0.02);
}

TEST(Smoothing, DerivativeShiftsSlope) {
  Grid g = make_grid(1, 200.0, 1024);
  KernelSpec spec(0.5, 1.0, g);
  auto rep = smoothing_rate_fit(spec, 2.0, 2.0, fit_times(g, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(rep.predicted_slope, -0.5);
  EXPECT_LT(rep.relative_error, 0.05) << rep.fitted_slope;
}

TEST(Smoothing, ErrorsOnBadExponentsOrTooFewTimes) {
  Grid g = make_grid(1, 200.0, 1024);
  KernelSpec spec(0.5, 1.0, g);
  expect_code(ErrorCode::ExponentOrder, [&] { smoothing_rate_fit(spec, 2.0, 1.0, fit_times(g, 0.5)); });
  expect_code(ErrorCode::DegenerateFit, [&] { smoothing_rate_fit(spec, 1.0, 2.0, {1.0, 2.0, 3.0}); });
  // Widths below 4h are dropped before counting.
  expect_code(ErrorCode::DegenerateFit,
              [&] { smoothing_rate_fit(spec, 1.0, 2.0, log_spaced(1e-3, 0.1, 10)); });
}
