#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fracrd/error.hpp"
#include "fracrd/estimate_lab.hpp"
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

Trajectory constant_trajectory(const Grid& g, std::vector<double> values, std::vector<double> times) {
  Trajectory t;
  t.times = times;
  for (std::size_t k = 0; k < times.size(); ++k) {
    SpeciesState s;
    for (double v : values) s.push_back(Field::constant(g, v));
    t.states.push_back(s);
  }
  return t;
}

Field bump(const Grid& g, double height, double width, double shift = 0.0) {
  return Field::from_function(g, [=](const std::array<double, 3>& x) {
    double r = x[0] - shift;
    return height * std::exp(-r * r / (2 * width * width));
  });
}

Trajectory bimolecular_run(int n) {
  Grid g = make_grid(1, 40.0, n);
  SpeciesState u0{bump(g, 2, 1.5, -2), bump(g, 1, 2), bump(g, 1.5, 1, 3), bump(g, 0.5, 2.5, 1)};
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.horizon = 1.0;
  cfg.alpha = 0.5;
  return solve_mild(make_model("bimolecular"), u0, cfg);
}

}  // namespace

TEST(AccumulateV, ZeroTrajectoryLeavesBUndefined) {
  Grid g = make_grid(1, 10.0, 16);
  auto vd = accumulate_v(constant_trajectory(g, {0.0, 0.0}, {0.0, 0.5, 1.0}), {1.0, 2.0});
  for (const auto& v : vd.v) EXPECT_EQ(sup_norm(v), 0.0);
  EXPECT_EQ(vd.defined_nodes, 0u);
  for (const auto& b : vd.b)
    for (double x : b.values()) EXPECT_TRUE(std::isnan(x));
  EXPECT_TRUE(vd.b_bounds_ok);
}

TEST(AccumulateV, ConstantDataGivesLinearV) {
  Grid g = make_grid(1, 10.0, 16);
  std::vector<double> d{1.0, 0.5, 2.0};
  auto vd = accumulate_v(constant_trajectory(g, {1.0, 1.0, 1.0}, {0.0, 0.25, 0.5, 1.0}), d);
  for (std::size_t k = 0; k < vd.times.size(); ++k) {
    EXPECT_NEAR(vd.v[k][3], vd.times[k] * 3.5, 1e-14);
    EXPECT_NEAR(vd.b[k][5], 3.0 / 3.5, 1e-15);
  }
  EXPECT_TRUE(vd.b_bounds_ok);
  EXPECT_DOUBLE_EQ(vd.b_lower, 0.5);
  EXPECT_DOUBLE_EQ(vd.b_upper, 2.0);
}

TEST(AccumulateV, EqualDiffusivitiesCollapseB) {
  Grid g = make_grid(1, 10.0, 16);
  Trajectory t = constant_trajectory(g, {0.3, 2.0}, {0.0, 1.0});
  auto vd = accumulate_v(t, {0.4, 0.4});
  for (const auto& b : vd.b)
    for (double x : b.values()) EXPECT_DOUBLE_EQ(x, 1.0 / 0.4);
}

TEST(AccumulateV, BimolecularRunRespectsBounds) {
  auto traj = bimolecular_run(128);
  auto vd = accumulate_v(traj, traj.diffusivities);
  EXPECT_TRUE(vd.b_bounds_ok) << vd.violations;
  EXPECT_GT(vd.defined_nodes, 0u);
  EXPECT_GE(vd.b_min, vd.b_lower);
  EXPECT_LE(vd.b_max, vd.b_upper);
  expect_code(ErrorCode::EmptyTrajectory, [] { accumulate_v(Trajectory{}, {1.0}); });
}

TEST(Holder, ConstantAndSine) {
  Grid g = make_grid(1, 2 * kPi, 256);
  EXPECT_EQ(holder_space(Field::constant(g, 4.0), 0.5), 0.0);
  Field s = Field::from_function(g, [](const auto& x) { return std::sin(x[0]); });
  EXPECT_NEAR(holder_space(s, 0.99), 1.0, 0.05);
  expect_code(ErrorCode::GammaOutOfRange, [&] { holder_space(s, 1.0); });

  VDiagnostics vd;
  vd.times = {0.0, 1.0};
  vd.v = {Field::constant(g, 2.0), Field::constant(g, 2.0)};
  auto h = holder_seminorm(vd, 0.5);
  EXPECT_EQ(h.space, 0.0);
  EXPECT_EQ(h.parabolic, 0.0);
  vd.v.pop_back();
  vd.times.pop_back();
  expect_code(ErrorCode::TooFewSlices, [&] { holder_seminorm(vd, 0.5); });
}

TEST(Holder, BimolecularVIsRefinementStable) {
  auto a = bimolecular_run(128);
  auto b = bimolecular_run(256);
  auto ha = holder_seminorm(accumulate_v(a, a.diffusivities), 0.5, 7);
  auto hb = holder_seminorm(accumulate_v(b, b.diffusivities), 0.5, 7);
  EXPECT_NEAR(ha.space / hb.space, 1.0, 0.1);
  EXPECT_NEAR(ha.parabolic / hb.parabolic, 1.0, 0.1);
}

TEST(StroockVaropoulos, QuadraticCaseIsAnIdentity) {
  std::mt19937_64 rng(17);
  Grid g = make_grid(1, 2 * kPi, 64);
  for (int k = 0; k < 10; ++k) {
    Field v = random_band_limited(g, 8, rng);
    for (double a : {0.3, 0.5, 0.9}) {
      auto r = stroock_varopoulos_gap(v, a, 2.0);
      EXPECT_LE(std::abs(r.gap), 1e-10 * r.magnitude());
    }
  }
}

TEST(StroockVaropoulos, GapIsNonnegativeOnRandomFields) {
  std::mt19937_64 rng(23);
  Grid g = make_grid(1, 2 * kPi, 64);
  Field s = Field::from_function(g, [](const auto& x) { return std::sin(x[0]); });
  EXPECT_GE(stroock_varopoulos_gap(s, 0.5, 3.0).gap, -1e-8);
  for (int k = 0; k < 100; ++k) {
    Field v = random_band_limited(g, 10, rng);
    for (double ell : {2.0, 3.0, 4.0})
      for (double a : {0.3, 0.5, 0.9}) {
        auto r = stroock_varopoulos_gap(v, a, ell);
        ASSERT_GE(r.gap, -1e-8 * r.magnitude()) << "ell " << ell << " alpha " << a;
      }
  }
  expect_code(ErrorCode::EllOutOfRange, [&] { stroock_varopoulos_gap(s, 0.5, 1.0); });
}

TEST(GagliardoNirenberg, ThetaArithmetic) {
  EXPECT_DOUBLE_EQ(gn_theta(1, 0.5, 4.0), 0.5);
  EXPECT_DOUBLE_EQ(gn_theta(2, 0.75, 3.0), (4.5 - 2.0) / 4.5);
  EXPECT_DOUBLE_EQ(gn_critical_exponent(3, 0.5), 3.0);
  EXPECT_TRUE(std::isinf(gn_critical_exponent(1, 0.5)));
}

TEST(GagliardoNirenberg, ScaleInvarianceAndSweepMaximum) {
  std::mt19937_64 rng(31);
  Grid g = make_grid(1, 2 * kPi, 64);
  Field s = Field::from_function(g, [](const auto& x) { return std::sin(x[0]); });
  const double base = gn_ratio(s, 0.5, 4.0);
  EXPECT_TRUE(std::isfinite(base));
  EXPECT_GT(base, 0.0);
  for (double c : {1e-3, 1.0, 1e3}) EXPECT_NEAR(gn_ratio(c * s, 0.5, 4.0) / base, 1.0, 1e-12);

  std::vector<double> ratios;
  for (int k = 0; k < 100; ++k) ratios.push_back(gn_ratio(random_band_limited(g, 12, rng), 0.6, 3.0));
  const double top = *std::max_element(ratios.begin(), ratios.end());
  for (double r : ratios) EXPECT_LE(r, top);

  expect_code(ErrorCode::QOutOfRange, [&] { gn_ratio(s, 0.5, 2.0); });
  Grid g3 = make_grid(3, 2 * kPi, 8);
  expect_code(ErrorCode::QOutOfRange, [&] { gn_ratio(Field::constant(g3, 1.0), 0.5, 3.0); });
  expect_code(ErrorCode::ZeroField, [&] { gn_ratio(Field::zeros(g), 0.5, 4.0); });
}

TEST(MaximalRegularity, SingleModeMatchesClosedForm) {
  Grid g = make_grid(1, 2 * kPi, 32);
  const double k = 3.0, alpha = 0.5;
  for (double mu : {0.5, 1.0, 2.0}) {
    const double lam = mu * std::pow(k, 2 * alpha);
    std::vector<double> times;
    std::vector<Field> f;
    for (int i = 0; i <= 1000; ++i) {
      const double t = i * 1e-3;
      times.push_back(t);
      f.push_back(Field::from_function(g, [&](const auto& x) { return std::exp(-t) * std::sin(k * x[0]); }));
    }
    auto u = maximal_reg_solve(f, times, alpha, mu);
    for (int i : {100, 500, 1000}) {
      const double t = times[i];
      const double amp = (std::exp(-t) - std::exp(-lam * t)) / (lam - 1.0);
      Field exact = Field::from_function(g, [&](const auto& x) { return amp * std::sin(k * x[0]); });
      EXPECT_LT(sup_norm(u[i] - exact), 1e-6 * amp);
    }
    EXPECT_LE(maximal_reg_ratio(f, times, alpha, mu), 1.0 / mu);
  }
}

TEST(MaximalRegularity, RandomForcingsStayBelowBound) {
  std::mt19937_64 rng(41);
  Grid g = make_grid(1, 2 * kPi, 64);
  for (double mu : {0.5, 1.0, 2.0}) {
    for (int r = 0; r < 10; ++r) {
      Field a = random_band_limited(g, 12, rng), b = random_band_limited(g, 12, rng);
      std::vector<double> times;
      std::vector<Field> f;
      for (int i = 0; i <= 100; ++i) {
        const double t = i * 0.02;
        times.push_back(t);
        f.push_back(std::cos(3 * t) * a + std::sin(t) * b);
      }
      EXPECT_LE(maximal_reg_ratio(f, times, 0.4, mu), 1.05 / mu);
    }
  }
}

TEST(MaximalRegularity, DegenerateCases) {
  Grid g = make_grid(1, 2 * kPi, 16);
  std::vector<Field> zero(3, Field::zeros(g));
  EXPECT_EQ(maximal_reg_ratio(zero, {0.0, 0.1, 0.2}, 0.5, 1.0), 0.0);
  expect_code(ErrorCode::NonUniformTimeGrid, [&] { maximal_reg_ratio(zero, {0.0, 0.1, 0.3}, 0.5, 1.0); });
}

TEST(NormReport, ConstantFieldNorms) {
  Grid g = make_grid(1, 8.0, 16);
  std::vector<double> times;
  for (int k = 0; k <= 30; ++k) times.push_back(0.1 * k);
  Trajectory t = constant_trajectory(g, {2.0}, times);
  t.alpha = 0.5;
  t.diffusivities = {1.0};
  auto rep = norm_report(t, {1.0, 2.0, 3.5}, 2.0);
  ASSERT_EQ(rep.species.size(), 1u);
  const double VT = 8.0 * 3.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double p = rep.species[0].p_list[j];
    EXPECT_NEAR(rep.species[0].lp[j], 2.0 * std::pow(VT, 1.0 / p), 1e-12);
  }
  EXPECT_NEAR(rep.species[0].weak_norm, 2.0 * std::sqrt(VT), 1e-12);
  EXPECT_EQ(rep.window_sup.size(), 3u);
  for (double w : rep.window_sup) EXPECT_EQ(w, 2.0);
  for (double d : rep.species[0].half_derivative_sup) EXPECT_LT(d, 1e-13);
  EXPECT_EQ(rep.v_derivative_sup.size(), times.size());
}

TEST(NormReport, IndicatorWeakNorm) {
  Grid g = make_grid(1, 8.0, 16);
  const double h = g.spacing();
  // c = 3 on 5 nodes at both stored times, 0 elsewhere.
  std::vector<double> vals(16, 0.0);
  for (int i = 0; i < 5; ++i) vals[i] = 3.0;
  Field f(g, vals);
  const double measure = 5 * h * 1.0;
  EXPECT_NEAR(weak_norm({f, f}, trapezoid_weights({0.0, 1.0}), 2.0), 3.0 * std::sqrt(measure), 1e-12);
}

TEST(NormReport, WeakBelowStrongAndMonotoneInHorizon) {
  auto traj = bimolecular_run(64);
  auto rep = norm_report(traj, {1.0, 2.0, 4.0}, 2.0);
  for (const auto& s : rep.species) EXPECT_LE(s.weak_norm, s.lp[1] * (1 + 1e-12));
  Trajectory shorter = traj;
  shorter.times.resize(50);
  shorter.states.resize(50);
  auto rep2 = norm_report(shorter, {1.0, 2.0, 4.0});
  for (std::size_t i = 0; i < rep.species.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_LE(rep2.species[i].lp[j], rep.species[i].lp[j]);
  expect_code(ErrorCode::EmptyTrajectory, [] { norm_report(Trajectory{}, {2.0}); });
}

TEST(Ladder, WorkedExamples) {
  auto a = duality_ladder(2, 0.75, 1.0, 2.0);
  ASSERT_EQ(a.sequence.size(), 2u);
  EXPECT_DOUBLE_EQ(a.sequence[1], 14.0);
  EXPECT_EQ(a.termination_index.value(), 1);
  EXPECT_NEAR(a.threshold, 3.5 / 1.5, 1e-15);

  auto b = duality_ladder(3, 0.5, 1.2, 2.1);
  ASSERT_EQ(b.termination_index.value(), 2);
  EXPECT_NEAR(b.sequence[1], 8.4 / 2.7, 1e-14);
  EXPECT_NEAR(b.sequence[2], 4.0 * b.sequence[1] / (4.8 - b.sequence[1]), 1e-12);
  EXPECT_LT(b.sequence[1], 10.0 / 3.0);
  EXPECT_GE(b.sequence[2], 10.0 / 3.0);
  EXPECT_TRUE(b.increasing());
  EXPECT_TRUE(b.ratio_bound_holds());
  auto json = b.to_json();
  EXPECT_NE(json.find("\"termination_index\": 2"), std::string::npos);
}

TEST(Ladder, AdmissibleSweepIsMonotone) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const int N = dim(rng);
    const double alpha = 0.05 + 0.9 * unit(rng);
    const double top = std::min(1.0 + 4.0 * alpha / (N + 2.0 * alpha), 2.0);
    const double rho = 1.0 + (top - 1.0) * unit(rng);
    const double p0 = 2.0 + 1e-3 + 4.0 * unit(rng) * unit(rng);
    auto lad = duality_ladder(N, alpha, rho, p0);
    ASSERT_TRUE(lad.termination_index.has_value());
    ASSERT_TRUE(lad.increasing());
    ASSERT_TRUE(lad.ratio_bound_holds());
    if (lad.sequence.size() > 1) ASSERT_GT(lad.ratio_bound, 1.0);
  }
}

TEST(Ladder, RejectsInadmissibleInputs) {
  expect_code(ErrorCode::RhoInadmissible, [] { duality_ladder(2, 0.5, 2.5, 2.5); });
  expect_code(ErrorCode::RhoInadmissible, [] { duality_ladder(1, 0.5, 1.0 + 4.0 / 2.0 * 0.5 + 0.01, 2.5); });
  expect_code(ErrorCode::P0TooSmall, [] { duality_ladder(2, 0.5, 1.0, 1.5); });
  EXPECT_NEAR(rho_max(1, 0.5, 0.0), 2.0, 1e-15);
  EXPECT_NEAR(rho_max(3, 0.5, 0.0), 1.5, 1e-15);
  EXPECT_NEAR(rho_max(3, 0.5, 100.0), 2.0, 1e-15);
}

TEST(QHat, FourCasesAndMonotonicity) {
  EXPECT_DOUBLE_EQ(q_hat(2, 0.5, 2.0).value, 6.0);
  EXPECT_EQ(q_hat(2, 0.5, 2.0).kind, QHatKind::Closed);
  auto open = q_hat(2, 0.5, 1.0);
  EXPECT_EQ(open.kind, QHatKind::OpenBound);
  EXPECT_DOUBLE_EQ(open.value, 1.5);
  EXPECT_EQ(q_hat(2, 0.5, 3.0).kind, QHatKind::AnyFinite);
  EXPECT_EQ(q_hat(2, 0.5, 3.5).kind, QHatKind::Infinite);
  double prev = 0.0;
  for (double p = 1.01; p < 2.99; p += 0.01) {
    double q = q_hat(2, 0.5, p).value;
    EXPECT_GE(q, prev);
    prev = q;
  }
}

TEST(Smallness, Ratio) {
  EXPECT_DOUBLE_EQ(duality_smallness({1.0, 3.0, 2.0}), 0.5);
  EXPECT_EQ(duality_smallness({2.0, 2.0}), 0.0);
}
