#include "fracrd/estimate_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "fracrd/error.hpp"
#include "fracrd/spectral.hpp"

namespace fracrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kAllPairsLimit = 4096;
constexpr std::size_t kRandomPairs = 100000;

void require_trajectory(const Trajectory& traj) {
  if (traj.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no states");
}

// Wrapped per-axis offsets of every node from the origin.
std::vector<std::array<double, 3>> node_positions(const Grid& g) {
  std::vector<std::array<double, 3>> pos(g.node_count());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = g.position(i);
  return pos;
}

double wrapped_distance(const std::array<double, 3>& a, const std::array<double, 3>& b, int dims, double L) {
  double s = 0.0;
  for (int k = 0; k < dims; ++k) {
    double d = std::abs(a[k] - b[k]);
    d = std::min(d, L - d);
    s += d * d;
  }
  return std::sqrt(s);
}

// Index pair in [0, count) whose separation is zero a quarter of the time
// and otherwise log-uniform over 1..count-1.
std::pair<std::size_t, std::size_t> random_offset_pair(std::size_t count, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  const std::size_t a = pick(rng);
  if (count < 2 || std::bernoulli_distribution(0.25)(rng)) return {a, a};
  std::uniform_real_distribution<double> scale(0.0, std::log(static_cast<double>(count - 1)));
  const auto offset = static_cast<std::size_t>(std::lround(std::exp(scale(rng))));
  return {a, (a + offset) % count};
}

// Node pair built from independent per-axis offset pairs.
std::pair<std::size_t, std::size_t> random_pair(const Grid& g, std::mt19937_64& rng) {
  const std::size_t n = static_cast<std::size_t>(g.points_per_axis());
  std::array<int, 3> ia{0, 0, 0}, ib{0, 0, 0};
  for (int k = 0; k < g.dims(); ++k) {
    auto [a, b] = random_offset_pair(n, rng);
    ia[k] = static_cast<int>(a);
    ib[k] = static_cast<int>(b);
  }
  return {g.ravel(ia), g.ravel(ib)};
}

}  // namespace

VDiagnostics accumulate_v(const Trajectory& traj, const std::vector<double>& d) {
  require_trajectory(traj);
  const std::size_t m = traj.species();
  if (d.size() != m) throw Error(ErrorCode::InvalidArgument, "need one diffusivity per species");
  const Grid& grid = traj.grid();
  const std::size_t n = grid.node_count();

  VDiagnostics out;
  out.times = traj.times;
  out.b_lower = 1.0 / *std::max_element(d.begin(), d.end());
  out.b_upper = 1.0 / *std::min_element(d.begin(), d.end());
  out.b_min = kInf;
  out.b_max = -kInf;

  double scale = 0.0;
  for (const auto& s : traj.states) {
    for (std::size_t x = 0; x < n; ++x) {
      double total = 0.0;
      for (std::size_t i = 0; i < m; ++i) total += s[i][x];
      scale = std::max(scale, std::abs(total));
    }
  }
  const double cutoff = 1e-12 * scale;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> v(n, 0.0), previous(n, 0.0);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& s = traj.states[k];
    std::vector<double> weighted(n, 0.0), b(n, nan);
    for (std::size_t x = 0; x < n; ++x) {
      double total = 0.0, dw = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        total += s[i][x];
        dw += d[i] * s[i][x];
      }
      weighted[x] = dw;
      if (scale > 0.0 && total > cutoff) {
        const double ratio = total / dw;
        b[x] = ratio;
        ++out.defined_nodes;
        out.b_min = std::min(out.b_min, ratio);
        out.b_max = std::max(out.b_max, ratio);
        if (ratio < out.b_lower * (1.0 - 1e-12) || ratio > out.b_upper * (1.0 + 1e-12)) ++out.violations;
      }
    }
    if (k > 0) {
      const double dt = traj.times[k] - traj.times[k - 1];
      for (std::size_t x = 0; x < n; ++x) v[x] += 0.5 * dt * (previous[x] + weighted[x]);
    }
    previous = std::move(weighted);
    out.v.emplace_back(grid, v);
    out.b.emplace_back(grid, std::move(b));
  }
  out.b_bounds_ok = out.violations == 0;
  if (out.defined_nodes == 0) out.b_min = out.b_max = nan;
  return out;
}

double holder_space(const Field& v, double gamma, std::uint64_t seed) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::GammaOutOfRange, "gamma must lie in (0, 1)");
  const Grid& g = v.grid();
  const auto pos = node_positions(g);
  const std::size_t n = g.node_count();
  const int dims = g.dims();
  const double L = g.extent();
  double best = 0.0;
  auto probe = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    const double dist = wrapped_distance(pos[a], pos[b], dims, L);
    best = std::max(best, std::abs(v[a] - v[b]) / std::pow(dist, gamma));
  };
  if (n <= kAllPairsLimit) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) probe(a, b);
  } else {
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < kRandomPairs; ++k) {
      auto [a, b] = random_pair(g, rng);
      probe(a, b);
    }
  }
  return best;
}

HolderSeminorm holder_seminorm(const VDiagnostics& vd, double gamma, std::uint64_t seed) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::GammaOutOfRange, "gamma must lie in (0, 1)");
  if (vd.v.size() < 2) throw Error(ErrorCode::TooFewSlices, "need at least two time slices");
  HolderSeminorm out;
  const Grid& g = vd.v.front().grid();
  const std::size_t n = g.node_count();
  const std::size_t slices = vd.v.size();

  if (n <= kAllPairsLimit) {
    for (const auto& slice : vd.v) out.space = std::max(out.space, holder_space(slice, gamma, seed));
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_slice(0, slices - 1);
    const auto pos = node_positions(g);
    for (std::size_t k = 0; k < kRandomPairs; ++k) {
      const auto& s = vd.v[pick_slice(rng)];
      auto [a, b] = random_pair(g, rng);
      const double dist = wrapped_distance(pos[a], pos[b], g.dims(), g.extent());
      out.space = std::max(out.space, std::abs(s[a] - s[b]) / std::pow(dist, gamma));
    }
  }

  const auto pos = node_positions(g);
  auto probe = [&](std::size_t sa, std::size_t a, std::size_t sb, std::size_t b) {
    if (sa == sb && a == b) return;
    const double dx = wrapped_distance(pos[a], pos[b], g.dims(), g.extent());
    const double dt = std::abs(vd.times[sa] - vd.times[sb]);
    const double denom = std::pow(dx, gamma) + std::pow(dt, 0.5 * gamma);
    out.parabolic = std::max(out.parabolic, std::abs(vd.v[sa][a] - vd.v[sb][b]) / denom);
  };
  const std::size_t points = n * slices;
  if (points <= kAllPairsLimit) {
    for (std::size_t p = 0; p < points; ++p)
      for (std::size_t q = p + 1; q < points; ++q) probe(p / n, p % n, q / n, q % n);
  } else {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t k = 0; k < kRandomPairs; ++k) {
      auto [a, b] = random_pair(g, rng);
      auto [sa, sb] = random_offset_pair(slices, rng);
      probe(sa, a, sb, b);
    }
  }
  return out;
}

double SvGap::magnitude() const { return std::max(std::abs(lhs), std::abs(rhs)); }

SvGap stroock_varopoulos_gap(const Field& v, double alpha, double ell) {
  if (!(ell > 1.0) || !std::isfinite(ell)) throw Error(ErrorCode::EllOutOfRange, "ell must exceed 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
  Field weight = transform(v, [ell](double x) { return x == 0.0 ? 0.0 : std::pow(std::abs(x), ell - 2.0) * x; });
  Field w = transform(v, [ell](double x) { return std::copysign(std::pow(std::abs(x), 0.5 * ell), x); });
  SvGap out;
  out.lhs = inner(weight, frac_power(v, FracPower(alpha)));
  const double half = lp_norm(frac_power(w, FracPower(0.5 * alpha)), 2.0);
  out.rhs = 4.0 * (ell - 1.0) / (ell * ell) * half * half;
  out.gap = out.lhs - out.rhs;
  return out;
}

double gn_theta(int dims, double alpha, double q) {
  return (2.0 * alpha * q - dims * (q - 2.0)) / (2.0 * alpha * q);
}

double gn_critical_exponent(int dims, double alpha) {
  return 2.0 * alpha < dims ? 2.0 * dims / (dims - 2.0 * alpha) : kInf;
}

double gn_ratio(const Field& v, double alpha, double q) {
  const int dims = v.grid().dims();
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
  if (!(q > 2.0 && q < gn_critical_exponent(dims, alpha))) {
    throw Error(ErrorCode::QOutOfRange, "q must lie strictly between 2 and the critical exponent");
  }
  const double l2 = lp_norm(v, 2.0);
  if (l2 == 0.0) throw Error(ErrorCode::ZeroField, "field is identically zero");
  const double dl2 = lp_norm(frac_power(v, FracPower(0.5 * alpha)), 2.0);
  if (dl2 == 0.0) throw Error(ErrorCode::ZeroField, "field has no non-constant part");
  const double theta = gn_theta(dims, alpha, q);
  return lp_norm(v, q) / (std::pow(l2, theta) * std::pow(dl2, 1.0 - theta));
}

std::vector<double> trapezoid_weights(const std::vector<double>& times) {
  std::vector<double> w(times.size(), 0.0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    w[k - 1] += 0.5 * dt;
    w[k] += 0.5 * dt;
  }
  return w;
}

namespace {

double uniform_step(const std::vector<double>& times) {
  if (times.size() < 2) throw Error(ErrorCode::NonUniformTimeGrid, "need at least two times");
  const double h = times[1] - times[0];
  if (!(h > 0.0)) throw Error(ErrorCode::NonUniformTimeGrid, "times must increase");
  for (std::size_t k = 2; k < times.size(); ++k) {
    if (std::abs(times[k] - times[k - 1] - h) > 1e-9 * h) {
      throw Error(ErrorCode::NonUniformTimeGrid, "time grid is not uniform");
    }
  }
  return h;
}

double phi1(double z) { return z < 1e-4 ? 1.0 - z / 2.0 + z * z / 6.0 : -std::expm1(-z) / z; }
double phi2(double z) {
  return z < 1e-3 ? 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0 : (z + std::expm1(-z)) / (z * z);
}

}  // namespace

std::vector<Field> maximal_reg_solve(const std::vector<Field>& forcing, const std::vector<double>& times, double alpha,
                                     double mu) {
  if (forcing.size() != times.size()) throw Error(ErrorCode::InvalidArgument, "one forcing slice per time");
  const double h = uniform_step(times);
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be positive");
  const Grid& g = forcing.front().grid();
  for (const auto& f : forcing) {
    require_same_grid(f, forcing.front());
    if (!f.all_finite()) throw Error(ErrorCode::NonFiniteInput, "forcing must be finite");
  }
  const FracPower op(alpha);
  const auto xi2 = squared_wavenumbers(g);
  std::vector<double> decay(xi2.size()), w_old(xi2.size()), w_new(xi2.size());
  for (std::size_t k = 0; k < xi2.size(); ++k) {
    const double z = h * mu * op.symbol(xi2[k]);
    decay[k] = std::exp(-z);
    w_old[k] = h * (phi1(z) - phi2(z));
    w_new[k] = h * phi2(z);
  }
  std::vector<Field> out;
  out.push_back(Field::zeros(g));
  Spectrum u(xi2.size()), f_prev = forward(forcing.front());
  for (std::size_t n = 1; n < forcing.size(); ++n) {
    Spectrum f_next = forward(forcing[n]);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = decay[k] * u[k] + w_old[k] * f_prev[k] + w_new[k] * f_next[k];
    out.push_back(inverse(g, u));
    f_prev = std::move(f_next);
  }
  return out;
}

double maximal_reg_ratio(const std::vector<Field>& forcing, const std::vector<double>& times, double alpha,
                         double mu) {
  auto u = maximal_reg_solve(forcing, times, alpha, mu);
  const auto w = trapezoid_weights(times);
  const FracPower op(alpha);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double a = lp_norm(frac_power(u[k], op), 2.0);
    const double f = lp_norm(forcing[k], 2.0);
    num += w[k] * a * a;
    den += w[k] * f * f;
  }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

double weak_norm(const std::vector<Field>& slices, const std::vector<double>& weights, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidArgument, "weak exponent must be finite and >= 1");
  double top = 0.0;
  for (const auto& s : slices) top = std::max(top, sup_norm(s));
  if (top == 0.0) return 0.0;
  const double cell = slices.front().grid().cell_volume();
  double best = 0.0;
  for (int j = 0; j < 64; ++j) {
    const double lambda = top * std::pow(10.0, -6.0 + 6.0 * j / 63.0);
    double measure = 0.0;
    for (std::size_t k = 0; k < slices.size(); ++k) {
      std::size_t count = 0;
      for (double x : slices[k].values()) count += std::abs(x) >= lambda;
      measure += weights[k] * cell * static_cast<double>(count);
    }
    best = std::max(best, lambda * std::pow(measure, 1.0 / p));
  }
  return best;
}

NormReport norm_report(const Trajectory& traj, const std::vector<double>& p_list, std::optional<double> weak_p) {
  require_trajectory(traj);
  const std::size_t m = traj.species();
  NormReport rep;
  rep.times = traj.times;
  const auto w = trapezoid_weights(traj.times);
  const double start = traj.times.front();
  const double span = traj.times.back() - start;
  const std::size_t windows = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span - 1e-9)));
  auto window_of = [&](double t) { return std::min(windows - 1, static_cast<std::size_t>(std::floor(t - start + 1e-12))); };
  rep.window_start.resize(windows);
  rep.window_sup.assign(windows, 0.0);
  for (std::size_t j = 0; j < windows; ++j) rep.window_start[j] = start + static_cast<double>(j);

  const FracPower half(0.5 * traj.alpha);
  for (std::size_t i = 0; i < m; ++i) {
    SpeciesNorms sn;
    sn.p_list = p_list;
    sn.window_start = rep.window_start;
    sn.window_sup.assign(windows, 0.0);
    std::vector<Field> slices;
    for (const auto& s : traj.states) slices.push_back(s[i]);
    for (double p : p_list) {
      if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "norm exponents must be >= 1");
      double value = 0.0;
      if (std::isinf(p)) {
        for (const auto& s : slices) value = std::max(value, sup_norm(s));
      } else {
        for (std::size_t k = 0; k < slices.size(); ++k) value += w[k] * std::pow(lp_norm(slices[k], p), p);
        value = std::pow(value, 1.0 / p);
      }
      sn.lp.push_back(value);
    }
    for (std::size_t k = 0; k < slices.size(); ++k) {
      const std::size_t j = window_of(traj.times[k]);
      const double sup = sup_norm(slices[k]);
      sn.window_sup[j] = std::max(sn.window_sup[j], sup);
      rep.window_sup[j] = std::max(rep.window_sup[j], sup);
      sn.half_derivative_sup.push_back(sup_norm(frac_power(slices[k], half)));
    }
    if (weak_p) {
      sn.weak_p = weak_p;
      sn.weak_norm = weak_norm(slices, w, *weak_p);
    }
    rep.species.push_back(std::move(sn));
  }
  if (traj.diffusivities.size() == m) {
    auto vd = accumulate_v(traj, traj.diffusivities);
    const FracPower full(traj.alpha);
    for (const auto& v : vd.v) rep.v_derivative_sup.push_back(sup_norm(frac_power(v, full)));
  }
  return rep;
}

std::string to_string(QHatKind k) {
  switch (k) {
    case QHatKind::OpenBound: return "open-bound";
    case QHatKind::Closed: return "closed";
    case QHatKind::AnyFinite: return "any-finite";
    case QHatKind::Infinite: return "infinite";
  }
  return "?";
}

QHat q_hat(int dims, double alpha, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "q_hat needs p >= 1");
  const double a = dims + 2.0 * alpha;
  const double critical = a / (2.0 * alpha);
  if (p == 1.0) return {QHatKind::OpenBound, a / dims};
  if (std::abs(p - critical) <= 1e-12 * critical) return {QHatKind::AnyFinite, kInf};
  if (p < critical) return {QHatKind::Closed, a * p / (a - 2.0 * p * alpha)};
  return {QHatKind::Infinite, kInf};
}

double rho_max(int dims, double alpha, double eps_star) {
  return std::min(1.0 + 2.0 * alpha * (2.0 + eps_star) / (dims + 2.0 * alpha), 2.0);
}

ExponentLadder duality_ladder(int dims, double alpha, double rho, double p0, double eps_star) {
  if (dims < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (!(eps_star >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eps_star must be nonnegative");
  if (!(rho >= 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must be at least 1");
  ExponentLadder lad;
  lad.dims = dims;
  lad.alpha = alpha;
  lad.rho = rho;
  lad.p0 = p0;
  lad.eps_star = eps_star;
  lad.rho_max = rho_max(dims, alpha, eps_star);
  if (rho > lad.rho_max * (1.0 + 1e-12)) {
    throw Error(ErrorCode::RhoInadmissible,
                "rho = " + std::to_string(rho) + " exceeds rho_max = " + std::to_string(lad.rho_max));
  }
  if (!(p0 >= 2.0)) throw Error(ErrorCode::P0TooSmall, "p0 must be at least 2");
  const double a = dims + 2.0 * alpha;
  lad.threshold = a / (2.0 * alpha * rho);
  const double first_denom = rho * a - 2.0 * alpha * p0;
  lad.ratio_bound = first_denom > 0.0 ? a / first_denom : std::numeric_limits<double>::quiet_NaN();
  lad.sequence.push_back(p0);
  while (lad.sequence.back() < lad.threshold) {
    if (lad.sequence.size() > 100) {
      lad.diverged = true;
      break;
    }
    const double p = lad.sequence.back();
    const double denom = rho * a - 2.0 * alpha * p;
    if (!(denom > 0.0)) {
      lad.diverged = true;
      break;
    }
    lad.sequence.push_back(a * p / denom);
  }
  if (!lad.diverged) lad.termination_index = static_cast<int>(lad.sequence.size()) - 1;
  return lad;
}

bool ExponentLadder::increasing() const {
  for (std::size_t n = 1; n < sequence.size(); ++n) {
    if (!(sequence[n] > sequence[n - 1])) return false;
  }
  return true;
}

bool ExponentLadder::ratio_bound_holds() const {
  for (std::size_t n = 0; n + 1 < sequence.size(); ++n) {
    const double r = sequence[n + 1] / sequence[n];
    if (n == 0 ? r < ratio_bound * (1.0 - 1e-12) : !(r > ratio_bound)) return false;
  }
  return true;
}

std::string ExponentLadder::to_json() const {
  nlohmann::ordered_json j;
  j["N"] = dims;
  j["alpha"] = alpha;
  j["rho"] = rho;
  j["p0"] = p0;
  j["eps_star"] = eps_star;
  j["rho_max"] = rho_max;
  j["threshold"] = threshold;
  j["ratio_bound"] = ratio_bound;
  j["sequence"] = sequence;
  if (termination_index) j["termination_index"] = *termination_index;
  else j["termination_index"] = nullptr;
  j["diverged"] = diverged;
  j["increasing"] = increasing();
  j["ratio_bound_holds"] = ratio_bound_holds();
  return j.dump(2);
}

double duality_smallness(const std::vector<double>& d) {
  if (d.empty()) throw Error(ErrorCode::InvalidArgument, "no diffusivities");
  const double hi = *std::max_element(d.begin(), d.end());
  const double lo = *std::min_element(d.begin(), d.end());
  return (hi - lo) / (hi + lo);
}

}  // namespace fracrd
