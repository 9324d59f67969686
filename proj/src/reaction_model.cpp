#include "fracrd/reaction_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fracrd/error.hpp"

namespace fracrd {

namespace {

void validate_isc(const std::vector<std::vector<double>>& a, std::size_t m) {
  if (a.size() != m) throw Error(ErrorCode::InvalidModel, "ISC matrix must be m x m");
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i].size() != m) throw Error(ErrorCode::InvalidModel, "ISC matrix must be m x m");
    for (std::size_t j = 0; j < m; ++j) {
      const double v = a[i][j];
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidModel, "ISC matrix entries must be finite");
      if (j > i && v != 0.0) throw Error(ErrorCode::InvalidModel, "ISC matrix must be lower triangular");
      if (j == i && v != 1.0) throw Error(ErrorCode::InvalidModel, "ISC matrix must have unit diagonal");
      if (v < 0.0) throw Error(ErrorCode::InvalidModel, "ISC matrix entries must be nonnegative");
    }
  }
}

double euclid(std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(s);
}

double bound_power(double norm, double exponent) { return std::pow(norm, exponent); }

}  // namespace

ReactionModel::ReactionModel(std::string name, std::vector<double> diffusivities, RateFn rates, ModelMeta meta)
    : name_(std::move(name)), d_(std::move(diffusivities)), rates_(std::move(rates)), meta_(std::move(meta)) {
  if (d_.empty()) throw Error(ErrorCode::InvalidModel, "model needs at least one species");
  for (double d : d_) {
    if (!(d > 0.0) || !std::isfinite(d)) throw Error(ErrorCode::InvalidModel, "diffusivities must be positive");
  }
  if (!rates_) throw Error(ErrorCode::InvalidModel, "rate function is empty");
  if (meta_.isc_matrix) validate_isc(*meta_.isc_matrix, d_.size());
  if (meta_.C && !(*meta_.C > 0.0)) throw Error(ErrorCode::InvalidModel, "constant C must be positive");
  if (meta_.rho && !(*meta_.rho > 0.0)) throw Error(ErrorCode::InvalidModel, "rho must be positive");
  if (meta_.nu && !(*meta_.nu > 0.0)) throw Error(ErrorCode::InvalidModel, "nu must be positive");
  if (meta_.phi && min_value(*meta_.phi) < 0.0) throw Error(ErrorCode::InvalidModel, "Phi must be nonnegative");
}

std::vector<double> ReactionModel::rates(std::span<const double> u) const {
  std::vector<double> out(species());
  rates_(u, out);
  return out;
}

ReactionModel ReactionModel::with_diffusivities(std::vector<double> d) const {
  if (d.size() != species()) throw Error(ErrorCode::InvalidModel, "diffusivity count must equal species count");
  return ReactionModel(name_, std::move(d), rates_, meta_);
}

ReactionModel ReactionModel::with_meta(ModelMeta meta) const {
  return ReactionModel(name_, d_, rates_, std::move(meta));
}

std::vector<std::string> model_names() {
  return {"bimolecular", "dissipative-pair", "superquadratic-isc", "quadratic-blowup"};
}

ReactionModel make_model(const std::string& name) {
  if (name == "bimolecular") {
    ModelMeta meta;
    meta.C = 1.0;
    return ReactionModel(name, {1.0, 0.5, 2.0, 1.5}, [](std::span<const double> u, std::span<double> out) {
      // One shared product keeps sum f_i = 0 bit for bit.
      const double r = u[0] * u[2] - u[1] * u[3];
      out[0] = -r;
      out[1] = r;
      out[2] = -r;
      out[3] = r;
    }, meta);
  }
  if (name == "dissipative-pair") {
    ModelMeta meta;
    meta.C = 1.0;
    return ReactionModel(name, {1.0, 0.5}, [](std::span<const double> u, std::span<double> out) {
      const double r = u[0] * u[1];
      out[0] = -r;
      out[1] = -r;
    }, meta);
  }
  if (name == "superquadratic-isc") {
    ModelMeta meta;
    meta.isc_matrix = std::vector<std::vector<double>>{{1.0, 0.0}, {1.0, 1.0}};
    meta.rho = 1.0;
    meta.nu = 4.0;
    meta.C = 1.0;
    return ReactionModel(name, {1.0, 0.5}, [](std::span<const double> u, std::span<double> out) {
      const double v3 = u[1] * u[1] * u[1];
      const double r = u[0] * v3;
      out[0] = -r;
      out[1] = r - v3 * u[1];
    }, meta);
  }
  if (name == "quadratic-blowup") {
    return ReactionModel(name, {1.0}, [](std::span<const double> u, std::span<double> out) {
      out[0] = u[0] * u[0];
    });
  }
  throw Error(ErrorCode::ModelUnknown, "unknown model '" + name + "'");
}

ReactionModel polynomial_model(std::string name, std::vector<double> diffusivities, PolynomialRates terms,
                               ModelMeta meta) {
  const std::size_t m = diffusivities.size();
  if (terms.size() != m) throw Error(ErrorCode::InvalidModel, "need one reaction list per species");
  for (const auto& species_terms : terms) {
    for (const auto& t : species_terms) {
      if (t.powers.size() != m) throw Error(ErrorCode::InvalidModel, "monomial powers must have length m");
      if (!std::isfinite(t.coefficient)) throw Error(ErrorCode::InvalidModel, "coefficients must be finite");
      for (int p : t.powers) {
        if (p < 0) throw Error(ErrorCode::InvalidModel, "monomial powers must be nonnegative");
      }
    }
  }
  auto rates = [terms = std::move(terms)](std::span<const double> u, std::span<double> out) {
    for (std::size_t i = 0; i < terms.size(); ++i) {
      double s = 0.0;
      for (const auto& t : terms[i]) {
        double v = t.coefficient;
        for (std::size_t j = 0; j < t.powers.size(); ++j) {
          for (int k = 0; k < t.powers[j]; ++k) v *= u[j];
        }
        s += v;
      }
      out[i] = s;
    }
  };
  return ReactionModel(std::move(name), std::move(diffusivities), std::move(rates), std::move(meta));
}

SpeciesState eval_reactions(const ReactionModel& model, const SpeciesState& state, double /*t*/,
                            bool enforce_sign) {
  const std::size_t m = model.species();
  if (state.size() != m) throw Error(ErrorCode::InvalidArgument, "state has the wrong number of species");
  for (const auto& s : state) require_same_grid(s, state.front());
  const Grid& grid = state.front().grid();
  const std::size_t n = grid.node_count();

  if (enforce_sign) {
    double scale = 0.0;
    for (const auto& s : state) scale = std::max(scale, sup_norm(s));
    const double floor = -1e-10 * (scale > 0.0 ? scale : 1.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (min_value(state[i]) < floor) {
        throw Error(ErrorCode::NegativeStateBeyondTolerance,
                    "species " + std::to_string(i + 1) + " has value " + std::to_string(min_value(state[i])));
      }
    }
  }

  std::vector<std::vector<double>> out(m, std::vector<double>(n));
  std::vector<double> u(m), f(m);
  for (std::size_t node = 0; node < n; ++node) {
    for (std::size_t i = 0; i < m; ++i) u[i] = state[i][node];
    model.rates(u, f);
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(f[i])) {
        throw Error(ErrorCode::NonFiniteRate, "species " + std::to_string(i + 1) + " rate is not finite");
      }
      out[i][node] = f[i];
    }
  }
  SpeciesState result;
  result.reserve(m);
  for (auto& v : out) result.emplace_back(grid, std::move(v));
  return result;
}

std::string to_string(Assumption a) {
  switch (a) {
    case Assumption::P: return "P";
    case Assumption::M: return "M";
    case Assumption::Conservation: return "conservation";
    case Assumption::Quadratic: return "quadratic";
    case Assumption::ISC: return "ISC";
    case Assumption::Pol: return "Pol";
  }
  return "?";
}

Assumption assumption_from_string(const std::string& s) {
  for (Assumption a : {Assumption::P, Assumption::M, Assumption::Conservation, Assumption::Quadratic,
                       Assumption::ISC, Assumption::Pol}) {
    if (to_string(a) == s) return a;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown assumption '" + s + "'");
}

StateSampler::StateSampler(std::uint64_t seed, double max_magnitude)
    : rng_(seed), max_log_(std::log10(max_magnitude)) {}

std::vector<double> StateSampler::operator()(std::size_t m) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> exponent(-3.0, max_log_);
  std::vector<double> u(m);
  for (auto& v : u) {
    v = unit(rng_) < 0.15 ? 0.0 : std::pow(10.0, exponent(rng_));
  }
  return u;
}

AssumptionReport check_assumption(const ReactionModel& model, Assumption which, StateSampler& sampler,
                                  std::size_t count) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "count must be at least 1");
  const std::size_t m = model.species();
  const ModelMeta& meta = model.meta();
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::MissingMeta, std::string(to_string(which)) + " check needs " + what);
  };
  switch (which) {
    case Assumption::Quadratic: need(meta.C.has_value(), "C"); break;
    case Assumption::ISC:
      need(meta.isc_matrix.has_value(), "an ISC matrix");
      need(meta.rho.has_value(), "rho");
      need(meta.C.has_value(), "C");
      break;
    case Assumption::Pol:
      need(meta.nu.has_value(), "nu");
      need(meta.C.has_value(), "C");
      break;
    default: break;
  }
  // The smallest Phi gives the tightest admissible bound.
  const double phi = meta.phi ? std::max(0.0, min_value(*meta.phi)) : 0.0;

  AssumptionReport report;
  report.assumption = which;
  std::vector<double> f(m);
  auto record = [&](const std::vector<double>& u, double value) { report.violations.push_back({u, value}); };

  for (std::size_t s = 0; s < count; ++s) {
    std::vector<double> u = sampler(m);
    switch (which) {
      case Assumption::P:
        for (std::size_t i = 0; i < m; ++i) {
          std::vector<double> ui = u;
          ui[i] = 0.0;
          model.rates(ui, f);
          if (f[i] < 0.0) record(ui, f[i]);
        }
        break;
      case Assumption::M:
      case Assumption::Conservation: {
        model.rates(u, f);
        double sum = 0.0, size = 0.0;
        for (double v : f) {
          sum += v;
          size += std::abs(v);
        }
        const double tol = 1e-12 * size;
        if (which == Assumption::M ? sum > tol : std::abs(sum) > tol) record(u, sum);
        break;
      }
      case Assumption::Quadratic: {
        model.rates(u, f);
        const double bound = *meta.C * (1.0 + std::pow(euclid(u), 2));
        for (std::size_t i = 0; i < m; ++i) {
          if (std::abs(f[i]) > bound) record(u, f[i]);
        }
        break;
      }
      case Assumption::ISC: {
        model.rates(u, f);
        const auto& a = *meta.isc_matrix;
        const double bound = *meta.C * (phi + bound_power(euclid(u), *meta.rho));
        for (std::size_t i = 0; i + 1 < m; ++i) {
          double comb = 0.0;
          for (std::size_t j = 0; j <= i; ++j) comb += a[i][j] * f[j];
          if (comb > bound) record(u, comb);
        }
        break;
      }
      case Assumption::Pol: {
        model.rates(u, f);
        const double bound = *meta.C * (phi + bound_power(euclid(u), *meta.nu));
        for (std::size_t i = 0; i < m; ++i) {
          if (f[i] > bound) record(u, f[i]);
        }
        break;
      }
    }
    ++report.samples_tested;
  }
  report.passed = report.violations.empty();
  return report;
}

ReactionModel conservative_lift(const ReactionModel& model, std::uint64_t seed, std::size_t count) {
  StateSampler sampler(seed);
  auto m_report = check_assumption(model, Assumption::M, sampler, count);
  if (!m_report.passed) {
    throw Error(ErrorCode::DissipationViolated, "model '" + model.name() + "' has sum f_i > 0 at " +
                                                    std::to_string(m_report.violations.size()) + " samples");
  }
  const std::size_t m = model.species();
  std::vector<double> d = model.diffusivities();
  d.push_back(1.0);
  auto rates = [model, m](std::span<const double> u, std::span<double> out) {
    model.rates(u.first(m), out.first(m));
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += out[i];
    out[m] = -sum;
  };
  return ReactionModel(model.name() + "+lift", std::move(d), std::move(rates));
}

}  // namespace fracrd
