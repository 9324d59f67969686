#include "fracrd/cli_runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "fracrd/error.hpp"
#include "fracrd/estimate_lab.hpp"
#include "fracrd/heat_kernel.hpp"
#include "fracrd/mild_solver.hpp"
#include "fracrd/spectral.hpp"

namespace fracrd {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags keep every stochastic report independent of which other
// reports are enabled.
enum StreamTag : std::uint64_t {
  kSpectralStream = 10,
  kSvStream = 20,
  kGnStream = 30,
  kMaxRegStream = 40,
  kAssumptionStream = 50,
  kLadderStream = 60,
  kHolderStream = 70,
};

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Context {
 public:
  Context(const ScenarioConfig& cfg, ArtifactSet& files, RunManifest& manifest)
      : cfg(cfg), files(files), manifest_(manifest) {}

  void check(const std::string& name, bool passed, double value, double limit) {
    manifest_.checks.push_back({name, passed, value, limit});
  }
  void summary(const std::string& key, double value) { manifest_.summary.emplace_back(key, value); }
  CsvWriter csv(const std::string& relative, const std::vector<std::string>& header) {
    return CsvWriter(files.file(relative), header);
  }

  const ScenarioConfig& cfg;
  ArtifactSet& files;

 private:
  RunManifest& manifest_;
};

Grid scenario_grid(const ScenarioConfig& cfg) { return make_grid(cfg.grid.dims, cfg.grid.extent, cfg.grid.points); }

Trajectory simulate(const ScenarioConfig& cfg) {
  const Grid grid = scenario_grid(cfg);
  const ReactionModel model = build_model(cfg);
  SolverConfig s = cfg.solver;
  if (cfg.reports.blowup && cfg.reports.blowup->threshold) s.blowup_threshold = cfg.reports.blowup->threshold;
  return solve_mild(model, build_initial(cfg, grid, model.species()), s);
}

double total_mass(const SpeciesState& s) {
  double m = 0.0;
  for (const auto& u : s) m += integral(u);
  return m;
}

void write_trajectory(Context& ctx, const Trajectory& traj) {
  auto csv = ctx.csv("trajectory.csv", {"time", "species", "min", "mass", "sup"});
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    for (std::size_t i = 0; i < traj.species(); ++i) {
      const Field& u = traj.states[k][i];
      csv.cell(traj.times[k]).cell(i + 1).cell(min_value(u)).cell(integral(u)).cell(sup_norm(u)).end_row();
    }
  }
  csv.close();

  auto diag = ctx.csv("diagnostics.csv", {"time", "picard_iterations", "residual", "substeps"});
  for (const auto& d : traj.diagnostics) {
    diag.cell(d.time).cell(d.picard_iterations).cell(d.residual).cell(d.substeps).end_row();
  }
  diag.close();
}

void write_checkpoint_pair(Context& ctx, const std::string& stem, double time, const SpeciesState& state) {
  const Checkpoint cp{time, state};
  try {
    write_checkpoint_binary(ctx.files.file(stem + ".bin"), cp);
    write_checkpoint_csv(ctx.files.file(stem + ".csv"), cp);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw Error(ErrorCode::OutputUnwritable, e.what());
    throw;
  }
}

void write_checkpoints(Context& ctx, const Trajectory& traj) {
  if (const auto every = ctx.cfg.reports.checkpoint_every) {
    long long last = -1;
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
      const auto slot = static_cast<long long>(std::floor(traj.times[k] / *every + 1e-9));
      if (slot <= last) continue;
      last = slot;
      char stem[48];
      std::snprintf(stem, sizeof stem, "checkpoints/state_%06zu", k);
      write_checkpoint_pair(ctx, stem, traj.times[k], traj.states[k]);
    }
  }
  write_checkpoint_pair(ctx, "checkpoints/final", traj.times.back(), traj.states.back());
}

void report_nonnegativity(Context& ctx, const Trajectory& traj) {
  const double tol = ctx.cfg.reports.nonnegativity.value_or(1e-8);
  double worst = 0.0;
  for (const auto& state : traj.states) {
    double sup = 0.0;
    for (const auto& u : state) sup = std::max(sup, sup_norm(u));
    if (sup == 0.0) continue;
    for (const auto& u : state) worst = std::min(worst, min_value(u) / sup);
  }
  ctx.summary("min_relative_floor", worst);
  ctx.check("nonnegativity", worst >= -tol, worst, -tol);
}

void report_status(Context& ctx, const Trajectory& traj) {
  const auto& rep = ctx.cfg.reports;
  if (!rep.blowup) {
    ctx.check("run_completed", traj.status == RunStatus::Completed, traj.times.back(), ctx.cfg.solver.horizon);
    return;
  }
  std::optional<double> tb = traj.blowup_time;
  if (!tb && rep.blowup->threshold) tb = detect_blowup(traj, *rep.blowup->threshold);
  const double expected = rep.blowup->expected_time;
  const double rel = tb ? std::abs(*tb - expected) / expected : kInfinity;
  ctx.summary("blowup_time", tb.value_or(kNaN));
  ctx.summary("blowup_relative_error", rel);
  ctx.check("blowup_time", tb.has_value() && rel <= rep.blowup->tolerance, tb.value_or(kNaN), expected);
}

void report_mass(Context& ctx, const Trajectory& traj) {
  const MassReport& m = *ctx.cfg.reports.mass;
  const double m0 = total_mass(traj.states.front());
  const double scale = std::abs(m0) > 0.0 ? std::abs(m0) : 1.0;
  if (m.mode == "conserved") {
    double drift = 0.0;
    for (std::size_t k = 1; k < traj.times.size(); ++k) {
      const double elapsed = std::max(traj.times[k] - traj.times.front(), ctx.cfg.solver.dt);
      drift = std::max(drift, std::abs(total_mass(traj.states[k]) - m0) / (scale * elapsed));
    }
    ctx.summary("mass_drift_rate", drift);
    ctx.check("mass_conserved", drift <= m.tolerance, drift, m.tolerance);
  } else {
    double rise = 0.0;
    for (std::size_t k = 1; k < traj.times.size(); ++k) {
      rise = std::max(rise, (total_mass(traj.states[k]) - total_mass(traj.states[k - 1])) / scale);
    }
    ctx.summary("mass_max_rise", rise);
    ctx.check("mass_dissipated", rise <= m.tolerance, rise, m.tolerance);
  }
}

// Classical RK4 on the spatially constant reduction.
std::vector<double> ode_reference(const ReactionModel& model, std::vector<double> y, double horizon, int steps) {
  const double h = horizon / steps;
  const std::size_t m = y.size();
  std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);
  auto f = [&](const std::vector<double>& u, std::vector<double>& out) { model.rates(u, out); };
  for (int s = 0; s < steps; ++s) {
    f(y, k1);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    f(tmp, k3);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * k3[i];
    f(tmp, k4);
    for (std::size_t i = 0; i < m; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return y;
}

void report_ode(Context& ctx, const Trajectory& traj, const ReactionModel& model) {
  const OdeReport& o = *ctx.cfg.reports.ode;
  std::vector<double> y0;
  for (const auto& u : traj.states.front()) y0.push_back(mean(u));
  const double span = traj.times.back() - traj.times.front();
  const auto ref = ode_reference(model, y0, span, o.steps);
  auto csv = ctx.csv("ode.csv", {"species", "value", "reference", "abs_error"});
  double err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const Field& u = traj.states.back()[i];
    const double spread = sup_norm(u - Field::constant(u.grid(), mean(u)));
    const double e = std::abs(mean(u) - ref[i]) + spread;
    err = std::max(err, e);
    csv.cell(i + 1).cell(mean(u)).cell(ref[i]).cell(e).end_row();
  }
  csv.close();
  ctx.summary("ode_error", err);
  if (o.tolerance) ctx.check("ode_reference", err <= *o.tolerance, err, *o.tolerance);
}

void report_b_bounds(Context& ctx, const VDiagnostics& vd) {
  auto csv = ctx.csv("b_bounds.csv", {"b_lower", "b_upper", "b_min", "b_max", "defined_nodes", "violations"});
  csv.cell(vd.b_lower).cell(vd.b_upper).cell(vd.b_min).cell(vd.b_max).cell(vd.defined_nodes).cell(vd.violations);
  csv.end_row();
  csv.close();
  ctx.summary("b_min", vd.b_min);
  ctx.summary("b_max", vd.b_max);
  ctx.check("b_bounds", vd.violations == 0, static_cast<double>(vd.violations), 0.0);
}

void report_norms(Context& ctx, const Trajectory& traj) {
  const NormsReport& spec = *ctx.cfg.reports.norms;
  const NormReport rep = norm_report(traj, spec.p, spec.weak_p);
  auto norms = ctx.csv("norms.csv", {"species", "norm", "exponent", "value"});
  for (std::size_t i = 0; i < rep.species.size(); ++i) {
    const auto& s = rep.species[i];
    for (std::size_t j = 0; j < s.p_list.size(); ++j) norms.cell(i + 1).cell("Lp").cell(s.p_list[j]).cell(s.lp[j]).end_row();
    if (s.weak_p) norms.cell(i + 1).cell("weak").cell(*s.weak_p).cell(s.weak_norm).end_row();
  }
  norms.close();

  auto windows = ctx.csv("windows.csv", {"window_start", "window_sup"});
  for (std::size_t w = 0; w < rep.window_start.size(); ++w) windows.cell(rep.window_start[w]).cell(rep.window_sup[w]).end_row();
  windows.close();

  std::vector<std::string> header = {"time", "v_derivative_sup"};
  for (std::size_t i = 0; i < rep.species.size(); ++i) header.push_back("half_derivative_sup_" + std::to_string(i + 1));
  auto deriv = ctx.csv("derivatives.csv", header);
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    deriv.cell(rep.times[k]).cell(rep.v_derivative_sup[k]);
    for (const auto& s : rep.species) deriv.cell(s.half_derivative_sup[k]);
    deriv.end_row();
  }
  deriv.close();

  if (!rep.window_sup.empty()) ctx.summary("last_window_sup", rep.window_sup.back());
  if (spec.non_increasing_after) {
    const auto from = static_cast<std::size_t>(std::max(0, *spec.non_increasing_after));
    double rise = 0.0;
    for (std::size_t w = from; w + 1 < rep.window_sup.size(); ++w) {
      rise = std::max(rise, (rep.window_sup[w + 1] - rep.window_sup[w]) / rep.window_sup[w]);
    }
    ctx.check("window_sup_non_increasing", rise <= 1e-12, rise, 1e-12);
  }
}

void report_holder(Context& ctx, const VDiagnostics& vd) {
  const HolderReport& h = *ctx.cfg.reports.holder;
  const std::uint64_t seed = seeded_stream(ctx.cfg.seed, kHolderStream)();
  const HolderSeminorm base = holder_seminorm(vd, h.gamma, seed);
  auto csv = ctx.csv("holder.csv", {"points", "gamma", "space", "parabolic"});
  csv.cell(ctx.cfg.grid.points).cell(h.gamma).cell(base.space).cell(base.parabolic).end_row();
  ctx.summary("holder_space", base.space);
  ctx.summary("holder_parabolic", base.parabolic);
  if (h.refine) {
    ScenarioConfig fine = ctx.cfg;
    fine.grid.points *= 2;
    const Trajectory t2 = simulate(fine);
    const HolderSeminorm r = holder_seminorm(accumulate_v(t2, t2.diffusivities), h.gamma, seed);
    csv.cell(fine.grid.points).cell(h.gamma).cell(r.space).cell(r.parabolic).end_row();
    const double ds = std::abs(base.space / r.space - 1.0);
    const double dp = std::abs(base.parabolic / r.parabolic - 1.0);
    ctx.summary("holder_space_refinement", ds);
    ctx.summary("holder_parabolic_refinement", dp);
    ctx.check("holder_refinement_space", ds <= h.refine_tolerance, ds, h.refine_tolerance);
    ctx.check("holder_refinement_parabolic", dp <= h.refine_tolerance, dp, h.refine_tolerance);
  }
  csv.close();
}

void report_assumptions(Context& ctx, const ReactionModel& model) {
  auto csv = ctx.csv("assumptions.csv", {"assumption", "samples", "violations"});
  for (std::size_t k = 0; k < ctx.cfg.reports.assumptions.size(); ++k) {
    const Assumption a = ctx.cfg.reports.assumptions[k];
    StateSampler sampler(seeded_stream(ctx.cfg.seed, kAssumptionStream + k)());
    const AssumptionReport r = check_assumption(model, a, sampler, 2000);
    csv.cell(to_string(a)).cell(r.samples_tested).cell(r.violations.size()).end_row();
    ctx.check("assumption_" + to_string(a), r.passed, static_cast<double>(r.violations.size()), 0.0);
  }
  csv.close();
}

void run_trajectory_reports(Context& ctx, RunManifest& manifest) {
  const ReactionModel model = build_model(ctx.cfg);
  const Trajectory traj = simulate(ctx.cfg);
  manifest.run_status = to_string(traj.status);
  ctx.summary("final_time", traj.times.back());
  ctx.summary("final_mass", total_mass(traj.states.back()));

  write_trajectory(ctx, traj);
  write_checkpoints(ctx, traj);
  report_status(ctx, traj);
  report_nonnegativity(ctx, traj);
  const auto& rep = ctx.cfg.reports;
  if (rep.mass) report_mass(ctx, traj);
  if (rep.ode) report_ode(ctx, traj, model);
  if (rep.b_bounds || rep.holder) {
    const VDiagnostics vd = accumulate_v(traj, traj.diffusivities);
    if (rep.b_bounds) report_b_bounds(ctx, vd);
    if (rep.holder) report_holder(ctx, vd);
  }
  if (rep.norms) report_norms(ctx, traj);
  if (!rep.assumptions.empty()) report_assumptions(ctx, model);
}

void report_spectral_oracle(Context& ctx, const Grid& grid) {
  const SpectralOracleReport& s = *ctx.cfg.reports.spectral_oracle;
  auto rng = seeded_stream(ctx.cfg.seed, kSpectralStream);
  auto csv = ctx.csv("spectral_oracle.csv", {"field", "beta", "relative_l2"});
  double worst = 0.0;
  for (int f = 0; f < s.fields; ++f) {
    const Field v = random_band_limited(grid, s.max_mode, rng);
    for (double beta : s.beta) {
      const FracPower p(beta);
      const Field a = frac_power(v, p);
      const double rel = lp_norm(a - frac_power_quadrature(v, p), 2.0) / lp_norm(a, 2.0);
      worst = std::max(worst, rel);
      csv.cell(f).cell(beta).cell(rel).end_row();
    }
  }
  csv.close();
  ctx.summary("spectral_oracle_worst", worst);
  ctx.check("spectral_oracle", worst <= s.tolerance, worst, s.tolerance);
}

// K_alpha(0, t) = |S^{N-1}| Gamma(N/(2 alpha)) / (2 alpha (2 pi)^N t^{N/(2 alpha)}).
double kernel_peak_closed_form(int dims, double alpha, double t) {
  const double N = dims;
  const double sphere = 2.0 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0);
  return sphere * std::tgamma(N / (2.0 * alpha)) /
         (2.0 * alpha * std::pow(2.0 * std::numbers::pi, N) * std::pow(t, N / (2.0 * alpha)));
}

void report_kernel(Context& ctx, const Grid& grid) {
  const KernelReport& k = *ctx.cfg.reports.kernel;
  auto peaks = ctx.csv("kernel.csv", {"alpha", "t", "peak", "expected", "relative_error"});
  auto env = ctx.csv("envelope.csv", {"alpha", "t", "ratio_min", "ratio_max", "constant", "max_deviation"});
  for (double alpha : k.alpha) {
    const KernelSpec spec(alpha, 1.0, grid);
    const Field K = heat_kernel_field(spec, k.t);
    const double expected = kernel_peak_closed_form(grid.dims(), alpha, k.t);
    const double rel = std::abs(K[0] - expected) / expected;
    peaks.cell(alpha).cell(k.t).cell(K[0]).cell(expected).cell(rel).end_row();
    ctx.check("kernel_peak[alpha=" + label(alpha) + "]", rel <= k.peak_tolerance, rel, k.peak_tolerance);
    if (alpha == 0.5) {
      // The Poisson kernel is an exact multiple of the comparison function.
      const Field E = periodized_envelope(spec, k.t);
      const double N = grid.dims();
      const double c = std::tgamma((N + 1.0) / 2.0) / std::pow(std::numbers::pi, (N + 1.0) / 2.0);
      double lo = kInfinity, hi = 0.0;
      for (std::size_t n = 0; n < grid.node_count(); ++n) {
        if (grid.radius(n) >= grid.extent() / 8.0) continue;
        lo = std::min(lo, K[n] / E[n]);
        hi = std::max(hi, K[n] / E[n]);
      }
      const double dev = std::max(std::abs(lo / c - 1.0), std::abs(hi / c - 1.0));
      env.cell(alpha).cell(k.t).cell(lo).cell(hi).cell(c).cell(dev).end_row();
      ctx.check("poisson_envelope_ratio", dev <= k.envelope_tolerance, dev, k.envelope_tolerance);
    }
  }
  peaks.close();
  env.close();
}

void report_smoothing(Context& ctx, const Grid& grid) {
  auto table = ctx.csv("smoothing.csv", {"entry", "dims", "alpha", "mu", "r", "p", "beta", "fitted_slope",
                                         "predicted_slope", "relative_error", "tail_mass"});
  auto curve = ctx.csv("smoothing_curve.csv", {"entry", "time", "ratio"});
  const auto& list = ctx.cfg.reports.smoothing;
  for (std::size_t j = 0; j < list.size(); ++j) {
    const SmoothingReportSpec& s = list[j];
    const double alpha = s.alpha.value_or(ctx.cfg.solver.alpha);
    const KernelSpec spec(alpha, s.mu, grid);
    // Kernel widths from 4h to L/32.
    const double lo = std::pow(4.0 * grid.spacing() * 1.001, 2.0 * alpha) / s.mu;
    const double hi = std::pow(grid.extent() / 32.0, 2.0 * alpha) / s.mu;
    const SmoothingReport rep = smoothing_rate_fit(spec, s.r, s.p, log_spaced(lo, hi, s.times), s.beta);
    table.cell(j).cell(grid.dims()).cell(alpha).cell(s.mu).cell(s.r).cell(s.p).cell(s.beta).cell(rep.fitted_slope);
    table.cell(rep.predicted_slope).cell(rep.relative_error).cell(rep.tail_mass).end_row();
    for (std::size_t k = 0; k < rep.times.size(); ++k) curve.cell(j).cell(rep.times[k]).cell(rep.ratios[k]).end_row();
    const std::string key = "smoothing" + std::to_string(j);
    ctx.summary(key + "_fitted_slope", rep.fitted_slope);
    ctx.summary(key + "_predicted_slope", rep.predicted_slope);
    ctx.summary(key + "_relative_error", rep.relative_error);
    ctx.check(key + "[N=" + std::to_string(grid.dims()) + ",alpha=" + label(alpha) + ",r=" + label(s.r) +
                  ",p=" + label(s.p) + ",beta=" + label(s.beta) + "]",
              rep.relative_error <= s.tolerance, rep.relative_error, s.tolerance);
  }
  table.close();
  curve.close();
}

void report_sv(Context& ctx, const Grid& grid) {
  const SvReport& s = *ctx.cfg.reports.sv;
  auto rng = seeded_stream(ctx.cfg.seed, kSvStream);
  auto csv = ctx.csv("sv.csv", {"field", "alpha", "ell", "lhs", "rhs", "gap", "magnitude"});
  double worst = kInfinity, identity = 0.0;
  bool has_identity = false;
  for (int f = 0; f < s.fields; ++f) {
    const Field v = random_band_limited(grid, s.max_mode, rng);
    for (double alpha : s.alpha) {
      for (double ell : s.ell) {
        const SvGap g = stroock_varopoulos_gap(v, alpha, ell);
        const double mag = g.magnitude();
        csv.cell(f).cell(alpha).cell(ell).cell(g.lhs).cell(g.rhs).cell(g.gap).cell(mag).end_row();
        if (mag == 0.0) continue;
        worst = std::min(worst, g.gap / mag);
        if (ell == 2.0) {
          has_identity = true;
          identity = std::max(identity, std::abs(g.gap) / mag);
        }
      }
    }
  }
  csv.close();
  ctx.summary("sv_worst_relative_gap", worst);
  ctx.check("sv_gap_nonnegative", worst >= -s.tolerance, worst, -s.tolerance);
  if (has_identity) ctx.check("sv_quadratic_identity", identity <= 1e-10, identity, 1e-10);
}

void report_gn(Context& ctx, const Grid& grid) {
  const GnReport& s = *ctx.cfg.reports.gn;
  const double alpha = ctx.cfg.solver.alpha;
  auto rng = seeded_stream(ctx.cfg.seed, kGnStream);
  const Grid wide = rescaled(grid, 2.0);
  auto csv = ctx.csv("gn.csv", {"field", "q", "theta", "ratio", "ratio_dilated"});
  std::vector<double> best(s.q.size(), 0.0);
  double drift = 0.0;
  for (int f = 0; f < s.fields; ++f) {
    const Field v = random_band_limited(grid, s.max_mode, rng);
    const Field dilated(wide, std::vector<double>(v.values().begin(), v.values().end()));
    for (std::size_t j = 0; j < s.q.size(); ++j) {
      const double q = s.q[j];
      const double r = gn_ratio(v, alpha, q);
      const double rd = gn_ratio(dilated, alpha, q);
      best[j] = std::max(best[j], r);
      drift = std::max(drift, std::abs(rd / r - 1.0));
      csv.cell(f).cell(q).cell(gn_theta(grid.dims(), alpha, q)).cell(r).cell(rd).end_row();
    }
  }
  csv.close();
  for (std::size_t j = 0; j < s.q.size(); ++j) ctx.summary("gn_max_ratio[q=" + label(s.q[j]) + "]", best[j]);
  ctx.check("gn_scale_invariance", drift <= 1e-10, drift, 1e-10);
}

void report_maximal_regularity(Context& ctx, const Grid& grid) {
  const MaxRegReport& s = *ctx.cfg.reports.maximal_regularity;
  const double alpha = ctx.cfg.solver.alpha;
  auto rng = seeded_stream(ctx.cfg.seed, kMaxRegStream);
  auto csv = ctx.csv("maximal_regularity.csv", {"forcing", "mu", "ratio", "bound"});
  double worst = 0.0;
  std::vector<double> times;
  for (int i = 0; i <= s.steps; ++i) times.push_back(s.horizon * i / s.steps);
  for (double mu : s.mu) {
    for (int f = 0; f < s.forcings; ++f) {
      const Field a = random_band_limited(grid, s.max_mode, rng);
      const Field b = random_band_limited(grid, s.max_mode, rng);
      std::uniform_real_distribution<double> freq(0.5, 4.0);
      const double w1 = freq(rng), w2 = freq(rng);
      std::vector<Field> forcing;
      for (double t : times) forcing.push_back(std::cos(w1 * t) * a + std::sin(w2 * t) * b);
      const double ratio = maximal_reg_ratio(forcing, times, alpha, mu);
      worst = std::max(worst, mu * ratio);
      csv.cell(f).cell(mu).cell(ratio).cell(s.slack / mu).end_row();
    }
  }
  csv.close();
  ctx.summary("maximal_regularity_worst_scaled", worst);
  ctx.check("maximal_regularity", worst <= s.slack, worst, s.slack);
}

void report_ladder(Context& ctx) {
  const LadderReport& l = *ctx.cfg.reports.ladder;
  const int dims = l.dims.value_or(ctx.cfg.grid.dims);
  const double alpha = l.alpha.value_or(ctx.cfg.solver.alpha);
  const ExponentLadder lad = duality_ladder(dims, alpha, l.rho, l.p0, l.eps_star);
  ctx.files.write_text("ladder.json", lad.to_json() + "\n");
  auto csv = ctx.csv("ladder.csv", {"n", "p"});
  for (std::size_t n = 0; n < lad.sequence.size(); ++n) csv.cell(n).cell(lad.sequence[n]).end_row();
  csv.close();

  const double term = lad.termination_index ? static_cast<double>(*lad.termination_index) : kNaN;
  ctx.summary("rho_max", lad.rho_max);
  ctx.summary("ladder_threshold", lad.threshold);
  ctx.summary("ladder_ratio_bound", lad.ratio_bound);
  ctx.summary("ladder_termination", term);
  ctx.summary("ladder_final_p", lad.sequence.back());
  ctx.check("ladder_terminates", lad.termination_index.has_value() && !lad.diverged, term, 100.0);
  ctx.check("ladder_increasing", lad.increasing(), 0.0, 0.0);
  ctx.check("ladder_ratio_bound", lad.ratio_bound_holds(), lad.ratio_bound, 0.0);
  if (l.expect_termination) {
    ctx.check("ladder_expected_termination", lad.termination_index == l.expect_termination, term, *l.expect_termination);
  }
  if (!l.expect_sequence.empty()) {
    double dev = lad.sequence.size() == l.expect_sequence.size() ? 0.0 : kInfinity;
    for (std::size_t n = 0; n < std::min(lad.sequence.size(), l.expect_sequence.size()); ++n) {
      dev = std::max(dev, std::abs(lad.sequence[n] - l.expect_sequence[n]) / std::abs(l.expect_sequence[n]));
    }
    ctx.check("ladder_expected_sequence", dev <= 1e-12, dev, 1e-12);
  }
}

void report_ladder_sweep(Context& ctx) {
  const int count = ctx.cfg.reports.ladder_sweep->count;
  auto rng = seeded_stream(ctx.cfg.seed, kLadderStream);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto csv = ctx.csv("ladder_sweep.csv", {"dims", "alpha", "rho", "p0", "termination", "length", "final_p",
                                          "increasing", "ratio_bound_holds", "rejects_above_rho_max"});
  std::size_t bad_monotone = 0, bad_ratio = 0, bad_term = 0, bad_reject = 0;
  for (int k = 0; k < count; ++k) {
    const int N = dim(rng);
    const double alpha = 0.05 + 0.9 * unit(rng);
    const double cap = rho_max(N, alpha, 0.0);
    const double rho = 1.0 + (cap - 1.0) * unit(rng);
    const double p0 = 2.0 + 4.0 * unit(rng) * unit(rng);
    const ExponentLadder lad = duality_ladder(N, alpha, rho, p0);
    bool rejects = false;
    try {
      duality_ladder(N, alpha, cap * (1.0 + 1e-9) + 1e-9, p0);
    } catch (const Error& e) {
      rejects = e.code() == ErrorCode::RhoInadmissible;
    }
    bad_monotone += !lad.increasing();
    bad_ratio += !lad.ratio_bound_holds();
    bad_term += !lad.termination_index.has_value() || lad.diverged;
    bad_reject += !rejects;
    csv.cell(N).cell(alpha).cell(rho).cell(p0).cell(lad.termination_index.value_or(-1)).cell(lad.sequence.size());
    csv.cell(lad.sequence.back()).cell(lad.increasing()).cell(lad.ratio_bound_holds()).cell(rejects).end_row();
  }
  csv.close();
  ctx.check("ladder_sweep_increasing", bad_monotone == 0, static_cast<double>(bad_monotone), 0.0);
  ctx.check("ladder_sweep_ratio_bound", bad_ratio == 0, static_cast<double>(bad_ratio), 0.0);
  ctx.check("ladder_sweep_terminates", bad_term == 0, static_cast<double>(bad_term), 0.0);
  ctx.check("ladder_sweep_rejects_inadmissible", bad_reject == 0, static_cast<double>(bad_reject), 0.0);
}

void write_checks(Context& ctx, const RunManifest& manifest) {
  auto checks = ctx.csv("checks.csv", {"check", "passed", "value", "limit"});
  for (const auto& c : manifest.checks) checks.cell(c.name).cell(c.passed).cell(c.value).cell(c.limit).end_row();
  checks.close();
  auto summary = ctx.csv("summary.csv", {"key", "value"});
  for (const auto& [k, v] : manifest.summary) summary.cell(k).cell(v).end_row();
  summary.close();
}

ordered_json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

ordered_json artifacts_json(const std::vector<Artifact>& artifacts) {
  ordered_json a = ordered_json::array();
  for (const auto& x : artifacts) a.push_back({{"path", x.path}, {"sha256", x.sha256}, {"bytes", x.bytes}});
  return a;
}

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot write " + path.string());
}

// Runs jobs 0..count-1 on up to `threads` workers; the first exception (in
// job order) is rethrown after all workers finish.
template <class Job>
void parallel_for(std::size_t count, int threads, Job job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

bool RunManifest::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

ordered_json RunManifest::to_json() const {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = name;
  j["seed"] = seed;
  j["config_sha256"] = config_sha256;
  j["run_status"] = run_status;
  j["status"] = passed() ? "passed" : "violations";
  ordered_json checks_json = ordered_json::array();
  for (const auto& c : checks) {
    checks_json.push_back({{"name", c.name}, {"passed", c.passed}, {"value", number_json(c.value)}, {"limit", number_json(c.limit)}});
  }
  j["checks"] = checks_json;
  ordered_json summary_json = ordered_json::object();
  for (const auto& [k, v] : summary) summary_json[k] = number_json(v);
  j["summary"] = summary_json;
  j["artifacts"] = artifacts_json(artifacts);
  return j;
}

RunManifest run_scenario(const ScenarioConfig& cfg, const fs::path& directory) {
  validate(cfg);
  ArtifactSet files(directory);
  RunManifest manifest;
  manifest.name = cfg.name;
  manifest.seed = cfg.seed;
  manifest.directory = directory;
  const std::string config_text = to_json(cfg).dump(2) + "\n";
  manifest.config_sha256 = sha256_bytes(config_text);
  files.write_text("config.json", config_text);

  Context ctx(cfg, files, manifest);
  const Grid grid = scenario_grid(cfg);
  const ReportSpec& rep = cfg.reports;
  if (cfg.simulates()) run_trajectory_reports(ctx, manifest);
  if (rep.spectral_oracle) report_spectral_oracle(ctx, grid);
  if (rep.kernel) report_kernel(ctx, grid);
  if (!rep.smoothing.empty()) report_smoothing(ctx, grid);
  if (rep.sv) report_sv(ctx, grid);
  if (rep.gn) report_gn(ctx, grid);
  if (rep.maximal_regularity) report_maximal_regularity(ctx, grid);
  if (rep.ladder) report_ladder(ctx);
  if (rep.ladder_sweep) report_ladder_sweep(ctx);

  write_checks(ctx, manifest);
  manifest.artifacts = files.collect();
  write_json(directory / "manifest.json", manifest.to_json());
  return manifest;
}

bool SweepTable::passed() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunManifest& m) { return m.passed(); });
}

SweepTable sweep(const ScenarioConfig& cfg, const std::string& axis, const std::vector<double>& values,
                 const fs::path& directory, int threads) {
  const auto axes = sweep_axes();
  if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
    throw Error(ErrorCode::UnknownAxis, "unknown sweep axis '" + axis + "'");
  }
  if (values.empty()) throw Error(ErrorCode::EmptyValues, "sweep needs at least one value");
  std::vector<ScenarioConfig> configs;
  for (double v : values) configs.push_back(with_axis(cfg, axis, v));

  ensure_directory(directory);
  SweepTable table;
  table.axis = axis;
  table.values = values;
  table.runs.resize(values.size());
  std::vector<std::string> subdirs;
  for (std::size_t k = 0; k < values.size(); ++k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "run%03zu_", k);
    subdirs.push_back(buf + axis + "=" + label(values[k]));
  }
  parallel_for(values.size(), threads,
               [&](std::size_t k) { table.runs[k] = run_scenario(configs[k], directory / subdirs[k]); });

  for (const auto& run : table.runs) {
    for (const auto& [key, v] : run.summary) {
      if (std::find(table.columns.begin(), table.columns.end(), key) == table.columns.end()) table.columns.push_back(key);
    }
  }
  ArtifactSet files(directory);
  std::vector<std::string> header = {axis, "status", "run_status"};
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  CsvWriter csv(files.file("sweep.csv"), header);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const RunManifest& run = table.runs[k];
    std::vector<double> row;
    for (const auto& col : table.columns) {
      auto it = std::find_if(run.summary.begin(), run.summary.end(), [&](const auto& kv) { return kv.first == col; });
      row.push_back(it == run.summary.end() ? kNaN : it->second);
    }
    csv.cell(values[k]).cell(run.passed() ? "passed" : "violations").cell(run.run_status);
    for (double v : row) csv.cell(v);
    csv.end_row();
    table.rows.push_back(std::move(row));
  }
  csv.close();
  for (const auto& sub : subdirs) files.file(sub + "/manifest.json");

  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = cfg.name;
  j["axis"] = axis;
  j["values"] = values;
  j["status"] = table.passed() ? "passed" : "violations";
  j["artifacts"] = artifacts_json(files.collect());
  write_json(directory / "manifest.json", j);
  return table;
}

bool SuiteResult::passed() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunManifest& m) { return m.passed(); });
}

SuiteResult run_suite(const std::string& suite, std::uint64_t seed, const fs::path& directory, int threads) {
  const std::vector<ScenarioConfig> scenarios = suite_scenarios(suite, seed);
  for (const auto& s : scenarios) validate(s);
  ensure_directory(directory);
  SuiteResult result;
  result.suite = suite;
  result.runs.resize(scenarios.size());
  parallel_for(scenarios.size(), threads,
               [&](std::size_t k) { result.runs[k] = run_scenario(scenarios[k], directory / scenarios[k].name); });

  ArtifactSet files(directory);
  CsvWriter csv(files.file("summary.csv"), {"scenario", "check", "passed", "value", "limit"});
  for (const auto& run : result.runs) {
    for (const auto& c : run.checks) csv.cell(run.name).cell(c.name).cell(c.passed).cell(c.value).cell(c.limit).end_row();
  }
  csv.close();
  for (const auto& s : scenarios) files.file(s.name + "/manifest.json");

  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["suite"] = suite;
  j["seed"] = seed;
  j["status"] = result.passed() ? "passed" : "violations";
  j["artifacts"] = artifacts_json(files.collect());
  write_json(directory / "manifest.json", j);
  return result;
}

fs::path default_output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  if (env != nullptr && *env != '\0') return env;
  return "fracrd-out";
}

int exit_status(bool passed) { return passed ? 0 : 2; }

}  // namespace fracrd
