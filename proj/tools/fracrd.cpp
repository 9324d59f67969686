#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fracrd/cli_runner.hpp"
#include "fracrd/error.hpp"

namespace fs = std::filesystem;
using namespace fracrd;

namespace {

void print_checks(const RunManifest& m) {
  for (const auto& c : m.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << m.name << " " << c.name << " value=" << format_double(c.value)
              << " limit=" << format_double(c.limit) << "\n";
  }
}

std::vector<double> parse_values(const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const auto& item : raw) {
    std::size_t start = 0;
    while (start <= item.size()) {
      const std::size_t end = std::min(item.find(',', start), item.size());
      const std::string token = item.substr(start, end - start);
      if (!token.empty()) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(token, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != token.size()) throw Error(ErrorCode::ConfigInvalid, "--values: cannot parse '" + token + "'");
        out.push_back(v);
      }
      start = end + 1;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional reaction-diffusion experiments"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->add_option("--out", out, "Output directory (default: $FRACRD_OUT/<name>)");
    sub->add_option("--threads", threads, "Parallel runs for sweeps and suites")->check(CLI::PositiveNumber);
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("config", config_path, "Scenario JSON")->required();
  common(run);

  std::string axis;
  std::vector<std::string> raw_values;
  auto* sw = app.add_subcommand("sweep", "Run a scenario for each value of one parameter");
  sw->add_option("config", config_path, "Scenario JSON")->required();
  sw->add_option("--axis", axis, "alpha, rho, p0, points or dt")->required();
  sw->add_option("--values", raw_values, "Comma-separated values")->required()->allow_extra_args();
  common(sw);

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a bundled verification suite");
  verify->add_option("suite", suite, "kernel, inequalities, ladder, bimolecular or all")->required();
  common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  auto target = [&](const std::string& name) { return out.empty() ? default_output_root() / name : fs::path(out); };

  try {
    if (*run) {
      ScenarioConfig cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      const RunManifest m = run_scenario(cfg, target(cfg.output.value_or(cfg.name)));
      print_checks(m);
      std::cout << (m.passed() ? "passed" : "violations") << " " << m.directory.string() << "\n";
      return exit_status(m.passed());
    }
    if (*sw) {
      ScenarioConfig cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      const SweepTable t = sweep(cfg, axis, parse_values(raw_values), target(cfg.name + "-sweep-" + axis), threads);
      for (const auto& m : t.runs) print_checks(m);
      std::cout << (t.passed() ? "passed" : "violations") << "\n";
      return exit_status(t.passed());
    }
    const std::vector<std::string> suites = suite == "all" ? suite_names() : std::vector<std::string>{suite};
    bool passed = true;
    for (const auto& s : suites) {
      const fs::path dir = suites.size() == 1 ? target("verify-" + s) : target("verify") / s;
      const SuiteResult r = run_suite(s, seed.value_or(0), dir, threads);
      for (const auto& m : r.runs) print_checks(m);
      std::cout << s << ": " << (r.passed() ? "passed" : "violations") << "\n";
      passed = passed && r.passed();
    }
    return exit_status(passed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
