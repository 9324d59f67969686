#include "fracrd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "fracrd/error.hpp"
#include "fracrd/estimate_lab.hpp"
#include "fracrd/heat_kernel.hpp"
#include "fracrd/spectral.hpp"

namespace fracrd {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, path + ": " + why);
}

bool is_infinity_token(const json& v) {
  if (!v.is_string()) return false;
  const auto s = v.get<std::string>();
  return s == "inf" || s == "infinity";
}

double as_number(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (is_infinity_token(v)) return kInfinity;
  fail(path, "expected a number");
}

// Object reader that remembers which keys were consumed so leftovers can be
// reported as unknown fields.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(at(key), "missing required field");
    return j_.at(key);
  }

  double number(const std::string& key, double def) {
    seen_.insert(key);
    return has(key) ? as_number(j_.at(key), at(key)) : def;
  }

  std::optional<double> opt_number(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return as_number(j_.at(key), at(key));
  }

  int integer(const std::string& key, int def) {
    seen_.insert(key);
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<int>();
  }

  std::optional<int> opt_integer(const std::string& key) {
    if (!has(key)) {
      seen_.insert(key);
      return std::nullopt;
    }
    return integer(key, 0);
  }

  bool boolean(const std::string& key, bool def) {
    seen_.insert(key);
    if (!has(key)) return def;
    if (!j_.at(key).is_boolean()) fail(at(key), "expected true or false");
    return j_.at(key).get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    seen_.insert(key);
    if (!has(key)) return def;
    if (!j_.at(key).is_string()) fail(at(key), "expected a string");
    return j_.at(key).get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    seen_.insert(key);
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], at(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(at(key), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& why) {
  if (!ok) fail(path, why);
}

ProfileSpec parse_profile(const json& j, const std::string& path) {
  Reader r(j, path);
  ProfileSpec p;
  p.kind = r.string("profile", p.kind);
  static const std::set<std::string> kinds = {"gaussian-bump", "two-bumps", "constant", "random-band-limited"};
  require(kinds.count(p.kind) > 0, r.at("profile"), "unknown profile '" + p.kind + "'");
  p.amplitude = r.number("amplitude", p.amplitude);
  p.width = r.number("width", p.width);
  p.center = r.numbers("center", {});
  p.separation = r.number("separation", p.separation);
  p.offset = r.number("offset", p.kind == "constant" ? p.amplitude : p.offset);
  p.max_mode = r.integer("max_mode", p.max_mode);
  r.finish();
  require(std::isfinite(p.amplitude), r.at("amplitude"), "must be finite");
  require(p.width > 0.0 && std::isfinite(p.width), r.at("width"), "must be positive");
  require(p.offset >= 0.0 && std::isfinite(p.offset), r.at("offset"), "must be nonnegative");
  require(p.kind != "random-band-limited" || p.max_mode >= 1, r.at("max_mode"), "must be at least 1");
  return p;
}

ModelMeta parse_meta(const json& j, const std::string& path) {
  Reader r(j, path);
  ModelMeta m;
  if (r.has("isc_matrix")) {
    const json& a = r.raw("isc_matrix");
    require(a.is_array(), r.at("isc_matrix"), "expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string rp = r.at("isc_matrix") + "[" + std::to_string(i) + "]";
      require(a[i].is_array(), rp, "expected an array of numbers");
      std::vector<double> row;
      for (std::size_t k = 0; k < a[i].size(); ++k) row.push_back(as_number(a[i][k], rp));
      rows.push_back(std::move(row));
    }
    m.isc_matrix = std::move(rows);
  }
  m.rho = r.opt_number("rho");
  m.nu = r.opt_number("nu");
  m.C = r.opt_number("C");
  r.finish();
  return m;
}

InlineModel parse_inline(const json& j, const std::string& path) {
  Reader r(j, path);
  InlineModel m;
  m.name = r.string("name", m.name);
  m.diffusivities = r.numbers("diffusivities", {});
  require(!m.diffusivities.empty(), r.at("diffusivities"), "at least one species is required");
  const json& rates = r.raw("rates");
  require(rates.is_array() && rates.size() == m.diffusivities.size(), r.at("rates"),
          "expected one list of monomials per species");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const std::string sp = r.at("rates") + "[" + std::to_string(i) + "]";
    require(rates[i].is_array(), sp, "expected an array of monomials");
    std::vector<Monomial> terms;
    for (std::size_t k = 0; k < rates[i].size(); ++k) {
      const std::string mp = sp + "[" + std::to_string(k) + "]";
      Reader t(rates[i][k], mp);
      Monomial mono;
      mono.coefficient = t.number("coefficient", 0.0);
      const json& pw = t.raw("powers");
      require(pw.is_array() && pw.size() == m.diffusivities.size(), t.at("powers"), "expected one power per species");
      for (const auto& e : pw) {
        require(e.is_number_integer() && e.get<int>() >= 0, t.at("powers"), "powers must be nonnegative integers");
        mono.powers.push_back(e.get<int>());
      }
      t.finish();
      terms.push_back(std::move(mono));
    }
    m.rates.push_back(std::move(terms));
  }
  if (r.has("meta")) m.meta = parse_meta(r.raw("meta"), r.at("meta"));
  r.finish();
  return m;
}

ModelSpec parse_model(const json& j, const std::string& path) {
  ModelSpec spec;
  if (j.is_string()) {
    spec.name = j.get<std::string>();
    return spec;
  }
  Reader r(j, path);
  if (r.has("name")) spec.name = r.string("name", "");
  if (r.has("inline")) spec.inline_model = parse_inline(r.raw("inline"), r.at("inline"));
  if (r.has("diffusivities")) spec.diffusivities = r.numbers("diffusivities", {});
  r.finish();
  require(spec.name.has_value() != spec.inline_model.has_value(), path, "give exactly one of 'name' or 'inline'");
  return spec;
}

SolverConfig parse_solver(const json& j, const std::string& path) {
  Reader r(j, path);
  SolverConfig s;
  s.dt = r.number("dt", s.dt);
  s.horizon = r.number("horizon", s.horizon);
  s.alpha = r.number("alpha", s.alpha);
  s.picard_tol = r.number("picard_tol", s.picard_tol);
  s.picard_max = r.integer("picard_max", s.picard_max);
  s.dealias = r.boolean("dealias", s.dealias);
  s.blowup_threshold = r.opt_number("blowup_threshold");
  s.store_every = r.integer("store_every", s.store_every);
  s.max_halvings = r.integer("max_halvings", s.max_halvings);
  r.finish();
  try {
    s.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return s;
}

ReportSpec parse_reports(const json& j, const std::string& path) {
  Reader r(j, path);
  ReportSpec rep;
  if (r.has("norms")) {
    Reader n(r.raw("norms"), r.at("norms"));
    NormsReport nr;
    nr.p = n.numbers("p", {1.0, 2.0, kInfinity});
    nr.weak_p = n.opt_number("weak_p");
    nr.non_increasing_after = n.opt_integer("non_increasing_after");
    n.finish();
    for (double p : nr.p) require(p >= 1.0, n.at("p"), "exponents must be at least 1");
    rep.norms = nr;
  }
  rep.b_bounds = r.boolean("b_bounds", false);
  rep.nonnegativity = r.opt_number("nonnegativity");
  if (r.has("mass")) {
    Reader m(r.raw("mass"), r.at("mass"));
    MassReport mr;
    mr.mode = m.string("mode", mr.mode);
    mr.tolerance = m.number("tolerance", mr.tolerance);
    m.finish();
    require(mr.mode == "conserved" || mr.mode == "dissipated", m.at("mode"), "expected 'conserved' or 'dissipated'");
    rep.mass = mr;
  }
  if (r.has("holder")) {
    Reader h(r.raw("holder"), r.at("holder"));
    HolderReport hr;
    hr.gamma = h.number("gamma", hr.gamma);
    hr.refine = h.boolean("refine", hr.refine);
    hr.refine_tolerance = h.number("tolerance", hr.refine_tolerance);
    h.finish();
    require(hr.gamma > 0.0 && hr.gamma < 1.0, h.at("gamma"), "must lie in (0, 1)");
    rep.holder = hr;
  }
  if (r.has("sv")) {
    Reader s(r.raw("sv"), r.at("sv"));
    SvReport sr;
    sr.ell = s.numbers("ell", sr.ell);
    sr.alpha = s.numbers("alpha", sr.alpha);
    sr.fields = s.integer("fields", sr.fields);
    sr.max_mode = s.integer("max_mode", sr.max_mode);
    sr.tolerance = s.number("tolerance", sr.tolerance);
    s.finish();
    for (double l : sr.ell) require(l >= 2.0, s.at("ell"), "exponents must be at least 2");
    for (double a : sr.alpha) require(a > 0.0 && a <= 1.0, s.at("alpha"), "orders must lie in (0, 1]");
    require(sr.fields >= 1, s.at("fields"), "must be positive");
    rep.sv = sr;
  }
  if (r.has("gn")) {
    Reader g(r.raw("gn"), r.at("gn"));
    GnReport gr;
    gr.q = g.numbers("q", gr.q);
    gr.fields = g.integer("fields", gr.fields);
    gr.max_mode = g.integer("max_mode", gr.max_mode);
    g.finish();
    require(gr.fields >= 1, g.at("fields"), "must be positive");
    rep.gn = gr;
  }
  if (r.has("maximal_regularity")) {
    Reader m(r.raw("maximal_regularity"), r.at("maximal_regularity"));
    MaxRegReport mr;
    mr.mu = m.numbers("mu", mr.mu);
    mr.forcings = m.integer("forcings", mr.forcings);
    mr.steps = m.integer("steps", mr.steps);
    mr.horizon = m.number("horizon", mr.horizon);
    mr.max_mode = m.integer("max_mode", mr.max_mode);
    mr.slack = m.number("slack", mr.slack);
    m.finish();
    for (double mu : mr.mu) require(mu > 0.0, m.at("mu"), "must be positive");
    require(mr.forcings >= 1 && mr.steps >= 2, r.at("maximal_regularity"), "forcings >= 1 and steps >= 2 required");
    rep.maximal_regularity = mr;
  }
  if (r.has("ladder")) {
    Reader l(r.raw("ladder"), r.at("ladder"));
    LadderReport lr;
    lr.dims = l.opt_integer("dims");
    lr.alpha = l.opt_number("alpha");
    lr.rho = l.number("rho", lr.rho);
    lr.p0 = l.number("p0", lr.p0);
    lr.eps_star = l.number("eps_star", lr.eps_star);
    lr.expect_termination = l.opt_integer("expect_termination");
    lr.expect_sequence = l.numbers("expect_sequence", {});
    l.finish();
    rep.ladder = lr;
  }
  if (r.has("ladder_sweep")) {
    Reader l(r.raw("ladder_sweep"), r.at("ladder_sweep"));
    LadderSweepReport lr;
    lr.count = l.integer("count", lr.count);
    l.finish();
    require(lr.count >= 1, l.at("count"), "must be positive");
    rep.ladder_sweep = lr;
  }
  if (r.has("smoothing")) {
    const json& a = r.raw("smoothing");
    const json items = a.is_array() ? a : json::array({a});
    for (std::size_t i = 0; i < items.size(); ++i) {
      Reader s(items[i], r.at("smoothing") + "[" + std::to_string(i) + "]");
      SmoothingReportSpec sr;
      sr.alpha = s.opt_number("alpha");
      sr.r = s.number("r", sr.r);
      sr.p = s.number("p", sr.p);
      sr.beta = s.number("beta", sr.beta);
      sr.mu = s.number("mu", sr.mu);
      sr.times = s.integer("times", sr.times);
      sr.tolerance = s.number("tolerance", sr.tolerance);
      s.finish();
      require(sr.r >= 1.0 && sr.p >= sr.r, s.at("p"), "need 1 <= r <= p");
      require(sr.times >= 2, s.at("times"), "need at least two times");
      require(sr.mu > 0.0, s.at("mu"), "must be positive");
      require(!sr.alpha || (*sr.alpha > 0.0 && *sr.alpha <= 1.0), s.at("alpha"), "must lie in (0, 1]");
      rep.smoothing.push_back(sr);
    }
  }
  if (r.has("kernel")) {
    Reader k(r.raw("kernel"), r.at("kernel"));
    KernelReport kr;
    kr.alpha = k.numbers("alpha", kr.alpha);
    kr.t = k.number("t", kr.t);
    kr.peak_tolerance = k.number("peak_tolerance", kr.peak_tolerance);
    kr.envelope_tolerance = k.number("envelope_tolerance", kr.envelope_tolerance);
    k.finish();
    for (double a : kr.alpha) require(a > 0.0 && a <= 1.0, k.at("alpha"), "orders must lie in (0, 1]");
    require(kr.t > 0.0, k.at("t"), "must be positive");
    rep.kernel = kr;
  }
  if (r.has("spectral_oracle")) {
    Reader s(r.raw("spectral_oracle"), r.at("spectral_oracle"));
    SpectralOracleReport sr;
    sr.beta = s.numbers("beta", sr.beta);
    sr.fields = s.integer("fields", sr.fields);
    sr.max_mode = s.integer("max_mode", sr.max_mode);
    sr.tolerance = s.number("tolerance", sr.tolerance);
    s.finish();
    for (double b : sr.beta) require(b > 0.0 && b < 1.0, s.at("beta"), "orders must lie in (0, 1)");
    rep.spectral_oracle = sr;
  }
  if (r.has("ode")) {
    Reader o(r.raw("ode"), r.at("ode"));
    OdeReport orep;
    orep.steps = o.integer("steps", orep.steps);
    orep.tolerance = o.opt_number("tolerance");
    o.finish();
    require(orep.steps >= 1, o.at("steps"), "must be positive");
    rep.ode = orep;
  }
  if (r.has("blowup")) {
    Reader b(r.raw("blowup"), r.at("blowup"));
    BlowupReport br;
    br.expected_time = b.number("expected_time", br.expected_time);
    br.tolerance = b.number("tolerance", br.tolerance);
    br.threshold = b.opt_number("threshold");
    b.finish();
    require(br.expected_time > 0.0, b.at("expected_time"), "must be positive");
    rep.blowup = br;
  }
  if (r.has("assumptions")) {
    const json& a = r.raw("assumptions");
    require(a.is_array(), r.at("assumptions"), "expected an array of names");
    for (const auto& e : a) {
      require(e.is_string(), r.at("assumptions"), "expected an array of names");
      try {
        rep.assumptions.push_back(assumption_from_string(e.get<std::string>()));
      } catch (const Error&) {
        fail(r.at("assumptions"), "unknown assumption '" + e.get<std::string>() + "'");
      }
    }
  }
  rep.checkpoint_every = r.opt_number("checkpoint_every");
  r.finish();
  return rep;
}

ordered_json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? ordered_json("inf") : ordered_json("-inf");
  return ordered_json(v);
}

ordered_json numbers_json(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

}  // namespace

std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return std::mt19937_64(seq);
}

ScenarioConfig parse_config(const json& doc) {
  Reader r(doc, "");
  ScenarioConfig cfg;
  if (!r.has("schema_version")) fail("schema_version", "missing required field");
  cfg.schema_version = r.integer("schema_version", 0);
  require(cfg.schema_version == kSchemaVersion, "schema_version",
          "unsupported version " + std::to_string(cfg.schema_version));
  cfg.name = r.string("name", cfg.name);
  require(!cfg.name.empty(), "name", "must not be empty");
  if (r.has("seed")) {
    const json& s = r.raw("seed");
    require(s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0), "seed",
            "expected a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (r.has("grid")) {
    Reader g(r.raw("grid"), "grid");
    cfg.grid.dims = g.integer("dims", cfg.grid.dims);
    cfg.grid.extent = g.number("extent", cfg.grid.extent);
    cfg.grid.points = g.integer("points", cfg.grid.points);
    g.finish();
  }
  if (r.has("model")) cfg.model = parse_model(r.raw("model"), "model");
  if (r.has("initial")) {
    const json& a = r.raw("initial");
    if (a.is_array()) {
      for (std::size_t i = 0; i < a.size(); ++i) cfg.initial.push_back(parse_profile(a[i], "initial[" + std::to_string(i) + "]"));
    } else {
      cfg.initial.push_back(parse_profile(a, "initial"));
    }
  }
  if (r.has("solver")) cfg.solver = parse_solver(r.raw("solver"), "solver");
  if (r.has("reports")) cfg.reports = parse_reports(r.raw("reports"), "reports");
  if (r.has("output")) cfg.output = r.string("output", "");
  r.finish();
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, path.string() + ": cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

void validate(const ScenarioConfig& cfg) {
  try {
    make_grid(cfg.grid.dims, cfg.grid.extent, cfg.grid.points);
  } catch (const Error& e) {
    fail("grid", e.what());
  }
  require(cfg.grid.extent > 0.0 && std::isfinite(cfg.grid.extent), "grid.extent", "must be positive");
  try {
    cfg.solver.validate();
  } catch (const Error& e) {
    fail("solver", e.what());
  }

  const ReportSpec& rep = cfg.reports;
  if (cfg.model) {
    const ReactionModel model = build_model(cfg);  // ModelUnknown propagates
    const std::size_t m = model.species();
    require(cfg.initial.size() == 1 || cfg.initial.size() == m, "initial",
            "expected 1 or " + std::to_string(m) + " profiles, got " + std::to_string(cfg.initial.size()));
    for (std::size_t i = 0; i < cfg.initial.size(); ++i) {
      const auto& c = cfg.initial[i].center;
      require(c.empty() || static_cast<int>(c.size()) == cfg.grid.dims, "initial[" + std::to_string(i) + "].center",
              "expected one coordinate per dimension");
    }
  } else {
    const bool needs_run = rep.norms || rep.b_bounds || rep.nonnegativity || rep.mass || rep.holder || rep.ode ||
                           rep.blowup || !rep.assumptions.empty() || rep.checkpoint_every;
    require(!needs_run, "reports", "trajectory reports need a model");
  }
  if (rep.ladder) {
    const LadderReport& l = *rep.ladder;
    const int dims = l.dims.value_or(cfg.grid.dims);
    const double alpha = l.alpha.value_or(cfg.solver.alpha);
    require(dims >= 1 && dims <= 3, "reports.ladder.dims", "must be 1, 2 or 3");
    require(alpha > 0.0 && alpha < 1.0, "reports.ladder.alpha", "must lie in (0, 1)");
    require(l.eps_star >= 0.0, "reports.ladder.eps_star", "must be nonnegative");
    const double cap = rho_max(dims, alpha, l.eps_star);
    require(l.rho >= 1.0, "reports.ladder.rho", "must be at least 1");
    require(l.rho <= cap * (1.0 + 1e-12), "reports.ladder.rho",
            "RhoInadmissible: " + std::to_string(l.rho) + " exceeds rho_max = " + std::to_string(cap));
    require(l.p0 >= 2.0, "reports.ladder.p0", "must be at least 2");
  }
  if (rep.gn) {
    const double crit = gn_critical_exponent(cfg.grid.dims, cfg.solver.alpha);
    for (double q : rep.gn->q) {
      require(q > 2.0 && q < crit, "reports.gn.q", "exponents must lie strictly between 2 and " + std::to_string(crit));
    }
  }
  if (rep.spectral_oracle) {
    require(cfg.grid.points <= kQuadratureMaxPoints, "reports.spectral_oracle",
            "the quadrature oracle needs at most " + std::to_string(kQuadratureMaxPoints) + " points per axis");
  }
  if (rep.holder && rep.holder->refine) {
    try {
      make_grid(cfg.grid.dims, cfg.grid.extent, 2 * cfg.grid.points);
    } catch (const Error& e) {
      fail("reports.holder.refine", e.what());
    }
  }
  if (rep.checkpoint_every) require(*rep.checkpoint_every > 0.0, "reports.checkpoint_every", "must be positive");
  if (rep.ode) {
    for (const auto& p : cfg.initial) require(p.kind == "constant", "reports.ode", "needs constant initial data");
  }
}

ReactionModel build_model(const ScenarioConfig& cfg) {
  if (!cfg.model) throw Error(ErrorCode::ConfigInvalid, "model: not configured");
  const ModelSpec& spec = *cfg.model;
  auto guarded = [](auto&& make) {
    try {
      return make();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ModelUnknown) throw;
      fail("model", e.what());
    }
  };
  return guarded([&] {
    ReactionModel model = spec.name ? make_model(*spec.name)
                                    : polynomial_model(spec.inline_model->name, spec.inline_model->diffusivities,
                                                       spec.inline_model->rates, spec.inline_model->meta);
    if (spec.diffusivities) {
      require(spec.diffusivities->size() == model.species(), "model.diffusivities",
              "expected " + std::to_string(model.species()) + " values");
      model = model.with_diffusivities(*spec.diffusivities);
    }
    return model;
  });
}

SpeciesState build_initial(const ScenarioConfig& cfg, const Grid& grid, std::size_t species) {
  SpeciesState out;
  for (std::size_t i = 0; i < species; ++i) {
    const ProfileSpec& p = cfg.initial.empty() ? ProfileSpec{} : cfg.initial[cfg.initial.size() == 1 ? 0 : i];
    std::array<double, 3> c{0.0, 0.0, 0.0};
    for (std::size_t a = 0; a < p.center.size() && a < 3; ++a) c[a] = p.center[a];
    auto bump = [&](const std::array<double, 3>& x, const std::array<double, 3>& at) {
      double r2 = 0.0;
      for (int a = 0; a < grid.dims(); ++a) r2 += (x[a] - at[a]) * (x[a] - at[a]);
      return p.amplitude * std::exp(-r2 / (2.0 * p.width * p.width));
    };
    if (p.kind == "gaussian-bump") {
      out.push_back(Field::from_function(grid, [&](const auto& x) { return p.offset + bump(x, c); }));
    } else if (p.kind == "two-bumps") {
      auto left = c, right = c;
      left[0] -= p.separation / 2.0;
      right[0] += p.separation / 2.0;
      out.push_back(Field::from_function(grid, [&](const auto& x) { return p.offset + bump(x, left) + bump(x, right); }));
    } else if (p.kind == "constant") {
      out.push_back(Field::constant(grid, p.offset));
    } else {
      // Shifted to be nonnegative: amplitude * (1 + g) / 2 with sup|g| = 1.
      auto rng = seeded_stream(cfg.seed, 1000 + i);
      Field g = random_band_limited(grid, p.max_mode, rng);
      out.push_back(transform(g, [&](double v) { return p.offset + p.amplitude * 0.5 * (1.0 + v); }));
    }
  }
  return out;
}

std::vector<std::string> sweep_axes() { return {"alpha", "rho", "p0", "points", "dt"}; }

ScenarioConfig with_axis(const ScenarioConfig& cfg, const std::string& axis, double value) {
  ScenarioConfig out = cfg;
  if (axis == "alpha") {
    out.solver.alpha = value;
    if (out.reports.ladder) out.reports.ladder->alpha.reset();
  } else if (axis == "rho" || axis == "p0") {
    if (!out.reports.ladder) fail("reports.ladder", "axis '" + axis + "' needs a ladder report");
    (axis == "rho" ? out.reports.ladder->rho : out.reports.ladder->p0) = value;
  } else if (axis == "points") {
    require(value == std::floor(value) && value >= 1.0 && value < 1e9, "grid.points", "expected a positive integer");
    out.grid.points = static_cast<int>(value);
  } else if (axis == "dt") {
    out.solver.dt = value;
  } else {
    throw Error(ErrorCode::UnknownAxis, "unknown sweep axis '" + axis + "'");
  }
  validate(out);
  return out;
}

ordered_json to_json(const ScenarioConfig& cfg) {
  ordered_json j;
  j["schema_version"] = cfg.schema_version;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["grid"] = {{"dims", cfg.grid.dims}, {"extent", cfg.grid.extent}, {"points", cfg.grid.points}};
  if (cfg.model) {
    ordered_json m;
    if (cfg.model->name) m["name"] = *cfg.model->name;
    if (cfg.model->inline_model) {
      const InlineModel& im = *cfg.model->inline_model;
      ordered_json rates = ordered_json::array();
      for (const auto& species : im.rates) {
        ordered_json terms = ordered_json::array();
        for (const auto& mono : species) terms.push_back({{"coefficient", mono.coefficient}, {"powers", mono.powers}});
        rates.push_back(terms);
      }
      ordered_json in{{"name", im.name}, {"diffusivities", im.diffusivities}, {"rates", rates}};
      ordered_json meta = ordered_json::object();
      if (im.meta.isc_matrix) meta["isc_matrix"] = *im.meta.isc_matrix;
      if (im.meta.rho) meta["rho"] = *im.meta.rho;
      if (im.meta.nu) meta["nu"] = *im.meta.nu;
      if (im.meta.C) meta["C"] = *im.meta.C;
      if (!meta.empty()) in["meta"] = meta;
      m["inline"] = in;
    }
    if (cfg.model->diffusivities) m["diffusivities"] = *cfg.model->diffusivities;
    j["model"] = m;
  }
  if (!cfg.initial.empty()) {
    ordered_json init = ordered_json::array();
    for (const auto& p : cfg.initial) {
      ordered_json o{{"profile", p.kind}, {"amplitude", p.amplitude}, {"width", p.width}};
      if (!p.center.empty()) o["center"] = p.center;
      o["separation"] = p.separation;
      o["offset"] = p.offset;
      o["max_mode"] = p.max_mode;
      init.push_back(o);
    }
    j["initial"] = init;
  }
  const SolverConfig& s = cfg.solver;
  ordered_json sj{{"dt", s.dt},         {"horizon", s.horizon},   {"alpha", s.alpha},
                  {"picard_tol", s.picard_tol}, {"picard_max", s.picard_max}, {"dealias", s.dealias}};
  if (s.blowup_threshold) sj["blowup_threshold"] = *s.blowup_threshold;
  sj["store_every"] = s.store_every;
  sj["max_halvings"] = s.max_halvings;
  j["solver"] = sj;

  const ReportSpec& r = cfg.reports;
  ordered_json rj = ordered_json::object();
  if (r.norms) {
    ordered_json n{{"p", numbers_json(r.norms->p)}};
    if (r.norms->weak_p) n["weak_p"] = number_json(*r.norms->weak_p);
    if (r.norms->non_increasing_after) n["non_increasing_after"] = *r.norms->non_increasing_after;
    rj["norms"] = n;
  }
  if (r.b_bounds) rj["b_bounds"] = true;
  if (r.nonnegativity) rj["nonnegativity"] = *r.nonnegativity;
  if (r.mass) rj["mass"] = {{"mode", r.mass->mode}, {"tolerance", r.mass->tolerance}};
  if (r.holder) {
    rj["holder"] = {{"gamma", r.holder->gamma}, {"refine", r.holder->refine}, {"tolerance", r.holder->refine_tolerance}};
  }
  if (r.sv) {
    rj["sv"] = {{"ell", r.sv->ell},
                {"alpha", r.sv->alpha},
                {"fields", r.sv->fields},
                {"max_mode", r.sv->max_mode},
                {"tolerance", r.sv->tolerance}};
  }
  if (r.gn) rj["gn"] = {{"q", numbers_json(r.gn->q)}, {"fields", r.gn->fields}, {"max_mode", r.gn->max_mode}};
  if (r.maximal_regularity) {
    const auto& m = *r.maximal_regularity;
    rj["maximal_regularity"] = {{"mu", m.mu},           {"forcings", m.forcings}, {"steps", m.steps},
                                {"horizon", m.horizon}, {"max_mode", m.max_mode}, {"slack", m.slack}};
  }
  if (r.ladder) {
    const auto& l = *r.ladder;
    ordered_json lj = ordered_json::object();
    if (l.dims) lj["dims"] = *l.dims;
    if (l.alpha) lj["alpha"] = *l.alpha;
    lj["rho"] = l.rho;
    lj["p0"] = l.p0;
    lj["eps_star"] = l.eps_star;
    if (l.expect_termination) lj["expect_termination"] = *l.expect_termination;
    if (!l.expect_sequence.empty()) lj["expect_sequence"] = l.expect_sequence;
    rj["ladder"] = lj;
  }
  if (r.ladder_sweep) rj["ladder_sweep"] = {{"count", r.ladder_sweep->count}};
  if (!r.smoothing.empty()) {
    ordered_json a = ordered_json::array();
    for (const auto& s2 : r.smoothing) {
      ordered_json o = ordered_json::object();
      if (s2.alpha) o["alpha"] = *s2.alpha;
      o.update(ordered_json{{"r", number_json(s2.r)},
                   {"p", number_json(s2.p)},
                   {"beta", s2.beta},
                   {"mu", s2.mu},
                   {"times", s2.times},
                   {"tolerance", s2.tolerance}});
      a.push_back(o);
    }
    rj["smoothing"] = a;
  }
  if (r.kernel) {
    rj["kernel"] = {{"alpha", r.kernel->alpha},
                    {"t", r.kernel->t},
                    {"peak_tolerance", r.kernel->peak_tolerance},
                    {"envelope_tolerance", r.kernel->envelope_tolerance}};
  }
  if (r.spectral_oracle) {
    rj["spectral_oracle"] = {{"beta", r.spectral_oracle->beta},
                             {"fields", r.spectral_oracle->fields},
                             {"max_mode", r.spectral_oracle->max_mode},
                             {"tolerance", r.spectral_oracle->tolerance}};
  }
  if (r.ode) {
    ordered_json o{{"steps", r.ode->steps}};
    if (r.ode->tolerance) o["tolerance"] = *r.ode->tolerance;
    rj["ode"] = o;
  }
  if (r.blowup) {
    ordered_json b{{"expected_time", r.blowup->expected_time}, {"tolerance", r.blowup->tolerance}};
    if (r.blowup->threshold) b["threshold"] = *r.blowup->threshold;
    rj["blowup"] = b;
  }
  if (!r.assumptions.empty()) {
    ordered_json a = ordered_json::array();
    for (auto as : r.assumptions) a.push_back(to_string(as));
    rj["assumptions"] = a;
  }
  if (r.checkpoint_every) rj["checkpoint_every"] = *r.checkpoint_every;
  j["reports"] = rj;
  if (cfg.output) j["output"] = *cfg.output;
  return j;
}

}  // namespace fracrd
