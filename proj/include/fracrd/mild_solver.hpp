#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fracrd/field.hpp"
#include "fracrd/reaction_model.hpp"

namespace fracrd {

struct SolverConfig {
  double dt = 1e-2;
  double horizon = 1.0;
  /// Order of the fractional operator shared by all species.
  double alpha = 0.5;
  double picard_tol = 1e-10;
  int picard_max = 50;
  bool dealias = true;
  /// Cap on sum_i ||u_i||_inf; unset means 1e6 times the initial value.
  std::optional<double> blowup_threshold;
  /// Keep every k-th state (the final state is always kept).
  int store_every = 1;
  /// Bisections of a window allowed before PicardDivergence.
  int max_halvings = 20;
  /// Label of the initial time; stepping itself always starts from zero.
  double start_time = 0.0;

  void validate() const;
};

enum class RunStatus { Completed, BlowUp };

std::string to_string(RunStatus s);

struct StepDiagnostics {
  double time = 0.0;
  /// Picard sweeps summed over the sub-steps of the window.
  int picard_iterations = 0;
  /// Largest final relative L^inf residual over the sub-steps.
  double residual = 0.0;
  int substeps = 1;
  std::vector<double> min_value;
  std::vector<double> mass;
  std::vector<double> sup;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpeciesState> states;
  /// One entry per accepted window; entry k ends at time (k+1) dt.
  std::vector<StepDiagnostics> diagnostics;
  RunStatus status = RunStatus::Completed;
  std::optional<double> blowup_time;
  double alpha = 0.5;
  std::vector<double> diffusivities;

  bool empty() const noexcept { return states.empty(); }
  const Grid& grid() const { return states.front().front().grid(); }
  std::size_t species() const { return states.empty() ? 0 : states.front().size(); }
};

/// Mild solution of u_i' + d_i (-Delta)^alpha u_i = f_i(u) by Picard
/// iteration of the exponential trapezoid rule on each window of length dt.
/// A run that crosses the blow-up threshold returns the truncated trajectory
/// with status BlowUp. Throws NegativeInitialData, NonFiniteInput,
/// PicardDivergence.
Trajectory solve_mild(const ReactionModel& model, const SpeciesState& u0, const SolverConfig& cfg);

/// First stored time at which sum_i ||u_i||_inf exceeds `threshold`.
std::optional<double> detect_blowup(const Trajectory& traj, double threshold);

struct Checkpoint {
  double time = 0.0;
  SpeciesState state;
};

void write_checkpoint_binary(const std::filesystem::path& path, const Checkpoint& cp);
Checkpoint read_checkpoint_binary(const std::filesystem::path& path);
void write_checkpoint_csv(const std::filesystem::path& path, const Checkpoint& cp);
Checkpoint read_checkpoint_csv(const std::filesystem::path& path);

/// Continues from a checkpoint up to cfg.horizon (an absolute time).
Trajectory resume_mild(const ReactionModel& model, const Checkpoint& cp, SolverConfig cfg);

}  // namespace fracrd
