#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracrd/field.hpp"
#include "fracrd/mild_solver.hpp"

namespace fracrd {

struct VDiagnostics {
  std::vector<double> times;
  /// v(., t_k): trapezoidal integral of sum_i d_i u_i from the first time to t_k.
  std::vector<Field> v;
  /// sum u_i / sum d_i u_i; NaN where sum u_i <= 1e-12 * scale.
  std::vector<Field> b;
  double b_lower = 0.0;
  double b_upper = 0.0;
  double b_min = 0.0;
  double b_max = 0.0;
  std::size_t defined_nodes = 0;
  std::size_t violations = 0;
  bool b_bounds_ok = true;
};

/// Throws EmptyTrajectory.
VDiagnostics accumulate_v(const Trajectory& traj, const std::vector<double>& d);

struct HolderSeminorm {
  double space = 0.0;
  double parabolic = 0.0;
};

/// Space part: max over slices and node pairs of |v(x,t)-v(y,t)| / |x-y|^gamma
/// with the wrapped distance. Parabolic part: max over space-time pairs of
/// |v(x,t)-v(y,s)| / (|x-y|^gamma + |t-s|^{gamma/2}). All pairs are used when
/// the candidate set has at most 4096 points, otherwise 1e5 seeded random
/// pairs. Throws GammaOutOfRange, TooFewSlices.
HolderSeminorm holder_seminorm(const VDiagnostics& vd, double gamma, std::uint64_t seed = 0);

/// Field version of the space part for a single slice.
double holder_space(const Field& v, double gamma, std::uint64_t seed = 0);

struct SvGap {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double magnitude() const;
};

/// lhs = int |v|^{l-2} v (-Delta)^alpha v, rhs = 4(l-1)/l^2 ||(-Delta)^{alpha/2} w||_2^2
/// with w = |v|^{l/2-1} v. Throws EllOutOfRange.
SvGap stroock_varopoulos_gap(const Field& v, double alpha, double ell);

/// (2 alpha q - N (q - 2)) / (2 alpha q).
double gn_theta(int dims, double alpha, double q);
/// 2N/(N - 2 alpha), or infinity when 2 alpha >= N.
double gn_critical_exponent(int dims, double alpha);

/// ||v||_q / (||v||_2^theta ||(-Delta)^{alpha/2} v||_2^{1-theta}).
/// Throws QOutOfRange, ZeroField (also for constants, whose derivative vanishes).
double gn_ratio(const Field& v, double alpha, double q);

/// Spectral solve of u' + mu (-Delta)^alpha u = f, u(0) = 0, with the
/// exponential trapezoid rule on each mode. `times` must be uniform.
std::vector<Field> maximal_reg_solve(const std::vector<Field>& forcing, const std::vector<double>& times, double alpha,
                                     double mu);

/// ||(-Delta)^alpha u||_{L2(Q)} / ||f||_{L2(Q)} with trapezoidal time weights;
/// 0 for zero forcing. Throws NonUniformTimeGrid.
double maximal_reg_ratio(const std::vector<Field>& forcing, const std::vector<double>& times, double alpha, double mu);

/// Trapezoid weights for a time grid.
std::vector<double> trapezoid_weights(const std::vector<double>& times);

struct SpeciesNorms {
  std::vector<double> p_list;
  std::vector<double> lp;
  std::vector<double> window_start;
  std::vector<double> window_sup;
  std::optional<double> weak_p;
  double weak_norm = 0.0;
  /// ||(-Delta)^{alpha/2} u_i(t_k)||_inf at each stored time.
  std::vector<double> half_derivative_sup;
};

struct NormReport {
  std::vector<double> times;
  std::vector<SpeciesNorms> species;
  /// max_i ||u_i||_inf over each unit window.
  std::vector<double> window_start;
  std::vector<double> window_sup;
  /// ||(-Delta)^alpha v(t_k)||_inf.
  std::vector<double> v_derivative_sup;
};

/// Space-time norms with trapezoidal time weights; windows are [tau, tau+1)
/// from the first time, the last one closed. The weak norm scans 64 log-spaced
/// levels in [1e-6, 1] * sup and is a lower bound for the true weak norm.
/// Throws EmptyTrajectory.
NormReport norm_report(const Trajectory& traj, const std::vector<double>& p_list,
                       std::optional<double> weak_p = std::nullopt);

/// sup over the levels of lambda * |{|u| >= lambda}|^{1/p} for a single
/// space-time sample set with per-slice weights.
double weak_norm(const std::vector<Field>& slices, const std::vector<double>& weights, double p);

enum class QHatKind { OpenBound, Closed, AnyFinite, Infinite };

struct QHat {
  QHatKind kind = QHatKind::Closed;
  /// Supremum of admissible exponents (infinity for the last two kinds).
  double value = 0.0;
};

std::string to_string(QHatKind k);

QHat q_hat(int dims, double alpha, double p);

struct ExponentLadder {
  int dims = 1;
  double alpha = 0.5;
  double rho = 1.0;
  double p0 = 2.0;
  double eps_star = 0.0;
  double rho_max = 0.0;
  double threshold = 0.0;
  /// (N + 2 alpha) / (rho (N + 2 alpha) - 2 alpha p0); NaN when the
  /// denominator is not positive (p0 is then already past the threshold).
  double ratio_bound = 0.0;
  std::vector<double> sequence;
  std::optional<int> termination_index;
  bool diverged = false;

  bool increasing() const;
  /// p_{n+1}/p_n >= ratio_bound at every step, strictly after the first.
  bool ratio_bound_holds() const;
  std::string to_json() const;
};

/// rho_max = min{1 + 2 alpha (2 + eps_star)/(N + 2 alpha), 2}.
double rho_max(int dims, double alpha, double eps_star);

/// Throws RhoInadmissible, P0TooSmall (p0 < 2), InvalidArgument.
ExponentLadder duality_ladder(int dims, double alpha, double rho, double p0, double eps_star = 0.0);

/// (max d - min d) / (max d + min d).
double duality_smallness(const std::vector<double>& d);

}  // namespace fracrd
