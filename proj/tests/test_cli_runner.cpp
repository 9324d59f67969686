#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fracrd/cli_runner.hpp"
#include "fracrd/error.hpp"
#include "fracrd/mild_solver.hpp"

using namespace fracrd;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

std::string error_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("fracrd_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ode_doc() {
  return json::parse(R"({
    "schema_version": 1, "name": "ode", "seed": 5,
    "grid": {"dims": 1, "extent": 10.0, "points": 16},
    "model": "bimolecular",
    "initial": [{"profile": "constant", "offset": 1.0}, {"profile": "constant", "offset": 0.0},
                {"profile": "constant", "offset": 1.0}, {"profile": "constant", "offset": 0.0}],
    "solver": {"dt": 0.1, "horizon": 1.0},
    "reports": {"ode": {"steps": 4000}, "mass": {"mode": "conserved"}, "b_bounds": true}
  })");
}

json small_run_doc() {
  return json::parse(R"({
    "schema_version": 1, "name": "small", "seed": 9,
    "grid": {"dims": 1, "extent": 20.0, "points": 32},
    "model": "dissipative-pair",
    "initial": [{"profile": "gaussian-bump", "amplitude": 1.0, "width": 2.0},
                {"profile": "random-band-limited", "amplitude": 0.5, "max_mode": 3}],
    "solver": {"dt": 0.05, "horizon": 1.0},
    "reports": {"mass": {"mode": "dissipated"}, "b_bounds": true, "holder": {"gamma": 0.5},
                "norms": {"p": [1, "inf"], "weak_p": 2}, "assumptions": ["P", "M"],
                "sv": {"fields": 2}, "gn": {"q": [3]}, "ladder": {"rho": 1.5, "p0": 2.0},
                "checkpoint_every": 0.5}
  })");
}

}  // namespace

TEST(Config, DefaultsAndRequiredVersion) {
  auto cfg = parse_config(json{{"schema_version", 1}});
  EXPECT_EQ(cfg.grid.dims, 1);
  EXPECT_FALSE(cfg.simulates());
  expect_code(ErrorCode::ConfigInvalid, [] { parse_config(json::object()); });
  expect_code(ErrorCode::ConfigInvalid, [] { parse_config(json{{"schema_version", 2}}); });
}

TEST(Config, MessagesNameTheField) {
  json d = small_run_doc();
  d["reports"]["norms"]["bogus"] = 1;
  EXPECT_NE(error_message([&] { parse_config(d); }).find("reports.norms.bogus"), std::string::npos);
  d = small_run_doc();
  d["solver"]["dt"] = "fast";
  EXPECT_NE(error_message([&] { parse_config(d); }).find("solver.dt"), std::string::npos);
  d = small_run_doc();
  d["initial"][1]["profile"] = "square";
  EXPECT_NE(error_message([&] { parse_config(d); }).find("initial[1].profile"), std::string::npos);
  d = small_run_doc();
  d["grid"]["points"] = 48;
  expect_code(ErrorCode::ConfigInvalid, [&] { parse_config(d); });
  d = small_run_doc();
  d["initial"].push_back(d["initial"][0]);
  expect_code(ErrorCode::ConfigInvalid, [&] { parse_config(d); });
}

TEST(Config, UnknownModelIsReported) {
  json d = small_run_doc();
  d["model"] = "lotka-volterra";
  expect_code(ErrorCode::ModelUnknown, [&] { parse_config(d); });
}

TEST(Config, InadmissibleRhoRejectedBeforeCompute) {
  for (int dims : {1, 2, 3}) {
    for (double alpha : {0.25, 0.5, 0.9}) {
      json d = small_run_doc();
      d["grid"] = {{"dims", dims}, {"extent", 10.0}, {"points", 8}};
      d["solver"]["alpha"] = alpha;
      d["reports"] = {{"ladder", {{"rho", 2.5}, {"p0", 2.0}}}};
      d.erase("model");
      d.erase("initial");
      const std::string msg = error_message([&] { parse_config(d); });
      EXPECT_NE(msg.find("ConfigInvalid"), std::string::npos);
      EXPECT_NE(msg.find("RhoInadmissible"), std::string::npos);
    }
  }
  ScenarioConfig cfg = parse_config(small_run_doc());
  cfg.reports.ladder->rho = 2.5;
  const fs::path dir = scratch("never");
  expect_code(ErrorCode::ConfigInvalid, [&] { run_scenario(cfg, dir); });
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Config, TrajectoryReportsNeedAModel) {
  json d = small_run_doc();
  d.erase("model");
  expect_code(ErrorCode::ConfigInvalid, [&] { parse_config(d); });
}

TEST(Config, JsonRoundTripIsStable) {
  for (const json& d : {small_run_doc(), ode_doc()}) {
    const ScenarioConfig a = parse_config(d);
    const auto ja = to_json(a);
    const ScenarioConfig b = parse_config(json::parse(ja.dump()));
    EXPECT_EQ(ja.dump(), to_json(b).dump());
  }
  for (const auto& suite : suite_names()) {
    for (const auto& s : suite_scenarios(suite, 4)) {
      EXPECT_EQ(to_json(s).dump(), to_json(parse_config(json::parse(to_json(s).dump()))).dump()) << s.name;
    }
  }
}

TEST(Config, InlineModelMatchesRegistry) {
  json d = small_run_doc();
  d["model"] = json::parse(R"({"inline": {"name": "pair", "diffusivities": [1.0, 0.5],
      "rates": [[{"coefficient": -1, "powers": [1, 1]}], [{"coefficient": -1, "powers": [1, 1]}]]}})");
  const ReactionModel inline_model = build_model(parse_config(d));
  const ReactionModel registry = make_model("dissipative-pair");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> s = {u(rng), u(rng)};
    EXPECT_EQ(inline_model.rates(s), registry.rates(s));
  }
}

TEST(Config, InitialProfiles) {
  json d = small_run_doc();
  d["initial"] = json::parse(R"([{"profile": "two-bumps", "amplitude": 2.0, "width": 1.0, "separation": 6.0},
                                 {"profile": "constant", "offset": 0.25}])");
  const ScenarioConfig cfg = parse_config(d);
  const Grid g = make_grid(1, 20.0, 32);
  const SpeciesState s = build_initial(cfg, g, 2);
  // Symmetric about the origin: node j and node n-j mirror each other.
  for (int j = 1; j < 16; ++j) EXPECT_NEAR(s[0][j], s[0][32 - j], 1e-14);
  EXPECT_NEAR(sup_norm(s[0]), 2.0, 0.05);
  EXPECT_EQ(min_value(s[1]), 0.25);
  EXPECT_EQ(sup_norm(s[1]), 0.25);

  const ScenarioConfig rnd = parse_config(small_run_doc());
  const SpeciesState a = build_initial(rnd, g, 2), b = build_initial(rnd, g, 2);
  EXPECT_EQ(sup_norm(a[1] - b[1]), 0.0);
  // amplitude * (1 + g) / 2 with sup|g| = 1: values stay in [0, amplitude]
  // and one of the two ends is attained.
  EXPECT_GE(min_value(a[1]), 0.0);
  EXPECT_LE(sup_norm(a[1]), 0.5 + 1e-15);
  EXPECT_TRUE(std::abs(sup_norm(a[1]) - 0.5) < 1e-12 || std::abs(min_value(a[1])) < 1e-12);
}

TEST(Config, SweepAxes) {
  const ScenarioConfig cfg = parse_config(small_run_doc());
  EXPECT_EQ(with_axis(cfg, "alpha", 0.7).solver.alpha, 0.7);
  EXPECT_EQ(with_axis(cfg, "rho", 1.2).reports.ladder->rho, 1.2);
  EXPECT_EQ(with_axis(cfg, "p0", 3.0).reports.ladder->p0, 3.0);
  EXPECT_EQ(with_axis(cfg, "points", 64).grid.points, 64);
  EXPECT_EQ(with_axis(cfg, "dt", 0.01).solver.dt, 0.01);
  expect_code(ErrorCode::UnknownAxis, [&] { with_axis(cfg, "extent", 1.0); });
  expect_code(ErrorCode::ConfigInvalid, [&] { with_axis(cfg, "points", 48); });
  expect_code(ErrorCode::ConfigInvalid, [&] { with_axis(cfg, "rho", 2.5); });
  expect_code(ErrorCode::ConfigInvalid, [&] { with_axis(parse_config(ode_doc()), "rho", 1.2); });
}

TEST(ReportIo, SeventeenDigitsRoundTrip) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int k = 0; k < 5000; ++k) {
    const double x = std::ldexp(mant(rng), expo(rng));
    const std::string s = format_double(x);
    EXPECT_EQ(std::stod(s), x) << s;
    const auto e = s.find('e');
    const std::string digits = s.substr(0, e);
    std::size_t count = 0;
    for (char c : digits) count += std::isdigit(static_cast<unsigned char>(c)) ? 1 : 0;
    EXPECT_EQ(count, 17u) << s;
  }
  EXPECT_EQ(format_double(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(format_double(INFINITY), "inf");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  EXPECT_EQ(format_double(NAN), "nan");
}

TEST(ReportIo, Sha256KnownVectors) {
  EXPECT_EQ(sha256_bytes(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_bytes("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const fs::path dir = scratch("sha");
  ArtifactSet files(dir);
  files.write_text("a/b.txt", "abc");
  auto arts = files.collect();
  ASSERT_EQ(arts.size(), 1u);
  EXPECT_EQ(arts[0].path, "a/b.txt");
  EXPECT_EQ(arts[0].bytes, 3u);
  EXPECT_EQ(arts[0].sha256, sha256_bytes("abc"));
}

TEST(ReportIo, CsvRowsAreChecked) {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  CsvWriter w(dir / "t.csv", {"a", "b"});
  w.cell(1.5).cell("x,y").end_row();
  EXPECT_THROW(w.cell(1).end_row(), Error);
  w.cell(2).cell("z").end_row();
  w.close();
  EXPECT_EQ(slurp(dir / "t.csv"), "a,b\n1.5000000000000000e+00,\"x,y\"\n2,z\n");
}

TEST(RunScenario, DeterministicReportsAndCompleteManifest) {
  const ScenarioConfig cfg = parse_config(small_run_doc());
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const RunManifest ma = run_scenario(cfg, a);
  const RunManifest mb = run_scenario(cfg, b);
  EXPECT_TRUE(ma.passed());
  EXPECT_EQ(exit_status(ma.passed()), 0);
  EXPECT_EQ(ma.run_status, "completed");

  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), a).generic_string();
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
    if (rel == "manifest.json") continue;
    ++files;
    auto it = std::find_if(ma.artifacts.begin(), ma.artifacts.end(), [&](const Artifact& x) { return x.path == rel; });
    ASSERT_NE(it, ma.artifacts.end()) << rel << " missing from manifest";
    EXPECT_EQ(it->sha256, sha256_file(entry.path()));
  }
  EXPECT_EQ(files, ma.artifacts.size());
  EXPECT_GT(files, 10u);

  const json manifest = json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["status"], "passed");
  EXPECT_EQ(manifest["artifacts"].size(), ma.artifacts.size());

  const Checkpoint cp = read_checkpoint_binary(a / "checkpoints/final.bin");
  const Checkpoint cc = read_checkpoint_csv(a / "checkpoints/final.csv");
  EXPECT_EQ(cp.time, 1.0);
  for (std::size_t i = 0; i < cp.state.size(); ++i) EXPECT_EQ(sup_norm(cp.state[i] - cc.state[i]), 0.0);
}

TEST(RunScenario, SeedChangesRandomReports) {
  ScenarioConfig cfg = parse_config(small_run_doc());
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  run_scenario(cfg, a);
  cfg.seed += 1;
  run_scenario(cfg, b);
  EXPECT_NE(slurp(a / "sv.csv"), slurp(b / "sv.csv"));
  EXPECT_NE(slurp(a / "trajectory.csv"), slurp(b / "trajectory.csv"));
}

TEST(RunScenario, ViolationsAreRecorded) {
  json d = json::parse(R"({
    "schema_version": 1, "name": "late",
    "grid": {"dims": 1, "extent": 10.0, "points": 16},
    "model": "quadratic-blowup",
    "initial": {"profile": "constant", "offset": 10.0},
    "solver": {"dt": 0.001, "horizon": 0.2},
    "reports": {"blowup": {"expected_time": 0.15, "tolerance": 0.2}}
  })");
  const RunManifest m = run_scenario(parse_config(d), scratch("late"));
  EXPECT_EQ(m.run_status, "blowup");
  EXPECT_FALSE(m.passed());
  EXPECT_EQ(exit_status(m.passed()), 2);
}

TEST(RunScenario, UnwritableOutput) {
  const fs::path dir = scratch("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  expect_code(ErrorCode::OutputUnwritable, [&] { run_scenario(parse_config(ode_doc()), dir / "file" / "run"); });
}

TEST(Sweep, DtRefinementReducesOdeError) {
  const ScenarioConfig cfg = parse_config(ode_doc());
  const fs::path dir = scratch("sweep_dt");
  const SweepTable t = sweep(cfg, "dt", {0.1, 0.05, 0.025}, dir, 2);
  ASSERT_EQ(t.rows.size(), 3u);
  auto col = std::find(t.columns.begin(), t.columns.end(), "ode_error") - t.columns.begin();
  ASSERT_LT(static_cast<std::size_t>(col), t.columns.size());
  EXPECT_GT(t.rows[0][col], t.rows[1][col]);
  EXPECT_GT(t.rows[1][col], t.rows[2][col]);
  EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
  EXPECT_TRUE(t.passed());
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["artifacts"].size(), 4u);
}

TEST(Sweep, ErrorsBeforeAnyRun) {
  const ScenarioConfig cfg = parse_config(ode_doc());
  const fs::path dir = scratch("sweep_bad");
  expect_code(ErrorCode::EmptyValues, [&] { sweep(cfg, "dt", {}, dir); });
  expect_code(ErrorCode::UnknownAxis, [&] { sweep(cfg, "viscosity", {1.0}, dir); });
  expect_code(ErrorCode::ConfigInvalid, [&] { sweep(cfg, "points", {16, 24}, dir); });
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Suites, KnownNamesOnly) {
  EXPECT_EQ(suite_names().size(), 4u);
  expect_code(ErrorCode::InvalidArgument, [] { suite_scenarios("everything", 0); });
  for (const auto& s : suite_names()) EXPECT_FALSE(suite_scenarios(s, 1).empty());
}

TEST(Suites, LadderSuitePasses) {
  const SuiteResult r = run_suite("ladder", 2, scratch("suite_ladder"));
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.runs.size(), 3u);
}

TEST(Output, RootFromEnvironment) {
  ::setenv(kOutputRootEnv, "/tmp/somewhere", 1);
  EXPECT_EQ(default_output_root(), fs::path("/tmp/somewhere"));
  ::setenv(kOutputRootEnv, "", 1);
  EXPECT_EQ(default_output_root(), fs::path("fracrd-out"));
  ::unsetenv(kOutputRootEnv);
}
