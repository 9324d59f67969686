#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fracrd/field.hpp"

namespace fracrd {

/// Nodewise rates: writes f(u) into `out` (both of length m).
using RateFn = std::function<void(std::span<const double> u, std::span<double> out)>;

struct ModelMeta {
  /// Lower triangular, unit diagonal, nonnegative entries; checked at construction.
  std::optional<std::vector<std::vector<double>>> isc_matrix;
  std::optional<double> rho;
  std::optional<double> nu;
  std::optional<double> C;
  /// Time-independent bound function for the ISC and Pol checks; zero when absent.
  std::optional<Field> phi;
};

struct Monomial {
  double coefficient = 0.0;
  std::vector<int> powers;
};

/// Species i's rate is the sum of its monomials.
using PolynomialRates = std::vector<std::vector<Monomial>>;

class ReactionModel {
 public:
  ReactionModel(std::string name, std::vector<double> diffusivities, RateFn rates, ModelMeta meta = {});

  const std::string& name() const noexcept { return name_; }
  std::size_t species() const noexcept { return d_.size(); }
  const std::vector<double>& diffusivities() const noexcept { return d_; }
  const ModelMeta& meta() const noexcept { return meta_; }

  void rates(std::span<const double> u, std::span<double> out) const { rates_(u, out); }
  std::vector<double> rates(std::span<const double> u) const;

  /// Same reactions with new diffusivities.
  ReactionModel with_diffusivities(std::vector<double> d) const;
  ReactionModel with_meta(ModelMeta meta) const;

 private:
  std::string name_;
  std::vector<double> d_;
  RateFn rates_;
  ModelMeta meta_;
};

/// Names accepted by make_model.
std::vector<std::string> model_names();

/// Built-in registry: "bimolecular", "dissipative-pair", "superquadratic-isc",
/// "quadratic-blowup". Throws ModelUnknown.
ReactionModel make_model(const std::string& name);

ReactionModel polynomial_model(std::string name, std::vector<double> diffusivities, PolynomialRates terms,
                               ModelMeta meta = {});

/// Nodewise f_i(u). The time argument is accepted for interface symmetry;
/// all models are autonomous. With `enforce_sign`, states below
/// -1e-10 * scale raise NegativeStateBeyondTolerance. Throws NonFiniteRate.
SpeciesState eval_reactions(const ReactionModel& model, const SpeciesState& state, double t = 0.0,
                            bool enforce_sign = true);

enum class Assumption { P, M, Conservation, Quadratic, ISC, Pol };

std::string to_string(Assumption a);
Assumption assumption_from_string(const std::string& s);

struct Witness {
  std::vector<double> state;
  double value = 0.0;
};

struct AssumptionReport {
  Assumption assumption = Assumption::P;
  std::size_t samples_tested = 0;
  std::vector<Witness> violations;
  bool passed = true;
};

/// Nonnegative states whose components range over 0 and log-uniform
/// magnitudes in [1e-3, 1e3].
class StateSampler {
 public:
  explicit StateSampler(std::uint64_t seed, double max_magnitude = 1e3);
  std::vector<double> operator()(std::size_t m);

 private:
  std::mt19937_64 rng_;
  double max_log_;
};

/// Falsification by sampling: a passed report means no violation was found.
/// Throws MissingMeta when the assumption needs constants the model lacks.
AssumptionReport check_assumption(const ReactionModel& model, Assumption which, StateSampler& sampler,
                                  std::size_t count);

/// Appends species m+1 with rate -sum f_i and diffusivity 1. Throws
/// DissipationViolated when a sampled state has sum f_i > 0.
ReactionModel conservative_lift(const ReactionModel& model, std::uint64_t seed = 0, std::size_t count = 2000);

}  // namespace fracrd
