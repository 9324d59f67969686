#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracrd/mild_solver.hpp"
#include "fracrd/reaction_model.hpp"

namespace fracrd {

inline constexpr int kSchemaVersion = 1;

struct GridSpec {
  int dims = 1;
  double extent = 20.0;
  int points = 128;
};

struct ProfileSpec {
  /// gaussian-bump, two-bumps, constant or random-band-limited.
  std::string kind = "gaussian-bump";
  double amplitude = 1.0;
  double width = 1.0;
  /// Center of the bump; two-bumps places copies at center -/+ separation/2 on axis 0.
  std::vector<double> center;
  double separation = 4.0;
  /// Constant added everywhere (the whole value for "constant").
  double offset = 0.0;
  /// Highest Fourier mode of a random-band-limited profile.
  int max_mode = 4;
};

struct InlineModel {
  std::string name = "inline";
  std::vector<double> diffusivities;
  PolynomialRates rates;
  ModelMeta meta;
};

struct ModelSpec {
  std::optional<std::string> name;
  std::optional<InlineModel> inline_model;
  /// Replaces the registry diffusivities when present.
  std::optional<std::vector<double>> diffusivities;
};

struct NormsReport {
  std::vector<double> p;
  std::optional<double> weak_p;
  /// Require the unit-window sup sequence to be non-increasing from this window on.
  std::optional<int> non_increasing_after;
};

struct HolderReport {
  double gamma = 0.5;
  /// Repeat the run with twice the points and compare both seminorm parts.
  bool refine = false;
  double refine_tolerance = 0.1;
};

struct SvReport {
  std::vector<double> ell = {2.0, 3.0, 4.0};
  std::vector<double> alpha = {0.3, 0.5, 0.9};
  int fields = 20;
  int max_mode = 8;
  double tolerance = 1e-8;
};

struct GnReport {
  std::vector<double> q = {3.0, 4.0, 6.0};
  int fields = 10;
  int max_mode = 8;
};

struct MaxRegReport {
  std::vector<double> mu = {0.5, 1.0, 2.0};
  int forcings = 50;
  int steps = 100;
  double horizon = 2.0;
  int max_mode = 12;
  double slack = 1.05;
};

struct LadderReport {
  /// Default to the grid dimension and the solver order.
  std::optional<int> dims;
  std::optional<double> alpha;
  double rho = 1.0;
  double p0 = 2.0;
  double eps_star = 0.0;
  /// Expected termination index, checked when present.
  std::optional<int> expect_termination;
  std::vector<double> expect_sequence;
};

struct LadderSweepReport {
  int count = 1000;
};

struct SmoothingReportSpec {
  /// Defaults to the solver order.
  std::optional<double> alpha;
  double r = 1.0;
  double p = 1.0;
  double beta = 0.0;
  double mu = 1.0;
  int times = 7;
  double tolerance = 0.05;
};

struct KernelReport {
  std::vector<double> alpha = {0.5, 1.0};
  double t = 1.0;
  double peak_tolerance = 1e-4;
  double envelope_tolerance = 1e-3;
};

struct SpectralOracleReport {
  std::vector<double> beta = {0.3, 0.5, 0.8};
  int fields = 20;
  int max_mode = 8;
  double tolerance = 0.05;
};

struct OdeReport {
  int steps = 20000;
  std::optional<double> tolerance;
};

struct MassReport {
  /// "conserved" or "dissipated".
  std::string mode = "conserved";
  double tolerance = 1e-10;
};

struct BlowupReport {
  double expected_time = 1.0;
  double tolerance = 0.2;
  std::optional<double> threshold;
};

struct ReportSpec {
  std::optional<NormsReport> norms;
  bool b_bounds = false;
  std::optional<double> nonnegativity;
  std::optional<MassReport> mass;
  std::optional<HolderReport> holder;
  std::optional<SvReport> sv;
  std::optional<GnReport> gn;
  std::optional<MaxRegReport> maximal_regularity;
  std::optional<LadderReport> ladder;
  std::optional<LadderSweepReport> ladder_sweep;
  std::vector<SmoothingReportSpec> smoothing;
  std::optional<KernelReport> kernel;
  std::optional<SpectralOracleReport> spectral_oracle;
  std::optional<OdeReport> ode;
  std::optional<BlowupReport> blowup;
  std::vector<Assumption> assumptions;
  /// Write a checkpoint at every multiple of this time; the final state is always written.
  std::optional<double> checkpoint_every;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name = "scenario";
  std::uint64_t seed = 0;
  GridSpec grid;
  /// No model means no simulation; only trajectory-free reports may be requested.
  std::optional<ModelSpec> model;
  /// One profile per species, or a single profile used for all of them.
  std::vector<ProfileSpec> initial;
  SolverConfig solver;
  ReportSpec reports;
  /// Run directory relative to the output root (defaults to the name).
  std::optional<std::string> output;

  bool simulates() const noexcept { return model.has_value(); }
};

/// Throws ConfigInvalid with a "field.path: reason" message; unknown keys are rejected.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const ScenarioConfig& cfg);

/// Cross-field validation (model registry, grid, ladder admissibility). Throws
/// ConfigInvalid or ModelUnknown.
void validate(const ScenarioConfig& cfg);

ReactionModel build_model(const ScenarioConfig& cfg);
SpeciesState build_initial(const ScenarioConfig& cfg, const Grid& grid, std::size_t species);

/// Independent generator for stream `tag` of a run seed.
std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t tag);

/// Axes accepted by sweep: alpha, rho, p0, points, dt.
std::vector<std::string> sweep_axes();
/// Copy of cfg with the axis set to value. Throws UnknownAxis, ConfigInvalid.
ScenarioConfig with_axis(const ScenarioConfig& cfg, const std::string& axis, double value);

}  // namespace fracrd
