#include <numbers>

#include "fracrd/cli_runner.hpp"
#include "fracrd/error.hpp"

namespace fracrd {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

json scenario(const std::string& name, json grid, json reports) {
  return {{"schema_version", kSchemaVersion}, {"name", name}, {"grid", grid}, {"reports", reports}};
}

json bump(double amplitude, double width, double center) {
  return {{"profile", "gaussian-bump"}, {"amplitude", amplitude}, {"width", width}, {"center", {center}}};
}

json constant(double value) { return {{"profile", "constant"}, {"offset", value}}; }

std::vector<json> kernel_suite() {
  return {
      scenario("spectral-oracle", {{"dims", 1}, {"extent", kTwoPi}, {"points", 64}},
               {{"spectral_oracle", {{"beta", {0.3, 0.5, 0.8}}, {"fields", 20}, {"max_mode", 8}, {"tolerance", 0.05}}}}),
      scenario("kernel-peaks", {{"dims", 1}, {"extent", 200.0}, {"points", 1024}},
               {{"kernel", {{"alpha", {0.5, 1.0}}, {"t", 1.0}}}}),
      scenario("smoothing-1d", {{"dims", 1}, {"extent", 200.0}, {"points", 1024}},
               {{"smoothing",
                 {{{"alpha", 0.5}, {"r", 1.0}, {"p", "inf"}},
                  {{"alpha", 0.75}, {"r", 1.0}, {"p", 2.0}},
                  {{"alpha", 0.5}, {"r", 1.0}, {"p", "inf"}, {"beta", 0.25}}}}}),
      scenario("smoothing-2d", {{"dims", 2}, {"extent", 60.0}, {"points", 128}},
               {{"smoothing", {{{"alpha", 0.5}, {"r", 1.0}, {"p", 2.0}}}}}),
  };
}

std::vector<json> inequalities_suite() {
  json s = scenario("inequalities", {{"dims", 1}, {"extent", kTwoPi}, {"points", 64}},
                    {{"sv", {{"ell", {2.0, 3.0, 4.0}}, {"alpha", {0.3, 0.5, 0.9}}, {"fields", 100}, {"max_mode", 8}}},
                     {"gn", {{"q", {3.0, 4.0, 6.0}}, {"fields", 10}}},
                     {"maximal_regularity", {{"mu", {0.5, 1.0, 2.0}}, {"forcings", 50}}}});
  s["solver"] = {{"alpha", 0.5}};
  return {s};
}

std::vector<json> ladder_suite() {
  return {
      scenario("ladder-2d", {{"dims", 2}, {"extent", 10.0}, {"points", 16}},
               {{"ladder",
                 {{"alpha", 0.75}, {"rho", 1.0}, {"p0", 2.0}, {"expect_termination", 1}, {"expect_sequence", {2.0, 14.0}}}}}),
      scenario("ladder-3d", {{"dims", 3}, {"extent", 10.0}, {"points", 8}},
               {{"ladder", {{"alpha", 0.5}, {"rho", 1.2}, {"p0", 2.1}, {"expect_termination", 2}}}}),
      scenario("ladder-sweep", {{"dims", 1}, {"extent", 10.0}, {"points", 16}}, {{"ladder_sweep", {{"count", 1000}}}}),
  };
}

std::vector<json> bimolecular_suite() {
  json ode = scenario("bimolecular-ode", {{"dims", 1}, {"extent", 10.0}, {"points", 16}},
                      {{"ode", {{"tolerance", 1e-6}}},
                       {"mass", {{"mode", "conserved"}, {"tolerance", 1e-10}}},
                       {"b_bounds", true}});
  ode["model"] = "bimolecular";
  ode["initial"] = {constant(1.0), constant(0.0), constant(1.0), constant(0.0)};
  ode["solver"] = {{"dt", 1e-3}, {"horizon", 1.0}, {"alpha", 0.5}};

  json demo = scenario("bimolecular-demo", {{"dims", 1}, {"extent", 40.0}, {"points", 256}},
                       {{"norms", {{"p", {1.0, 2.0, "inf"}}, {"weak_p", 3.0}, {"non_increasing_after", 2}}},
                        {"mass", {{"mode", "conserved"}, {"tolerance", 1e-10}}},
                        {"b_bounds", true},
                        {"assumptions", {"P", "M", "conservation", "quadratic"}},
                        {"checkpoint_every", 5.0}});
  demo["model"] = "bimolecular";
  demo["initial"] = {bump(2.0, 1.5, -2.0), bump(1.0, 2.0, 0.0), bump(1.5, 1.0, 3.0), bump(0.5, 2.5, 1.0)};
  demo["solver"] = {{"dt", 0.01}, {"horizon", 20.0}, {"alpha", 0.5}, {"store_every", 5}};

  json holder = scenario("bimolecular-holder", {{"dims", 1}, {"extent", 40.0}, {"points", 128}},
                         {{"holder", {{"gamma", 0.5}, {"refine", true}, {"tolerance", 0.1}}}, {"b_bounds", true}});
  holder["model"] = "bimolecular";
  holder["initial"] = demo["initial"];
  holder["solver"] = {{"dt", 0.01}, {"horizon", 1.0}, {"alpha", 0.5}};
  return {ode, demo, holder};
}

}  // namespace

std::vector<std::string> suite_names() { return {"kernel", "inequalities", "ladder", "bimolecular"}; }

std::vector<ScenarioConfig> suite_scenarios(const std::string& suite, std::uint64_t seed) {
  std::vector<json> docs;
  if (suite == "kernel") {
    docs = kernel_suite();
  } else if (suite == "inequalities") {
    docs = inequalities_suite();
  } else if (suite == "ladder") {
    docs = ladder_suite();
  } else if (suite == "bimolecular") {
    docs = bimolecular_suite();
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown suite '" + suite + "'");
  }
  std::vector<ScenarioConfig> out;
  for (auto& d : docs) {
    d["seed"] = seed;
    out.push_back(parse_config(d));
  }
  return out;
}

}  // namespace fracrd
