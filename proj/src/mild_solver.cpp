#include "fracrd/mild_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fracrd/error.hpp"
#include "fracrd/spectral.hpp"

namespace fracrd {

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (dt > horizon * (1.0 + 1e-12)) throw Error(ErrorCode::InvalidArgument, "dt must not exceed the horizon");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
  if (!(picard_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "picard_tol must be positive");
  if (picard_max < 2) throw Error(ErrorCode::InvalidArgument, "picard_max must be at least 2");
  if (store_every < 1) throw Error(ErrorCode::InvalidArgument, "store_every must be at least 1");
  if (max_halvings < 0) throw Error(ErrorCode::InvalidArgument, "max_halvings must be nonnegative");
  if (blowup_threshold && !(*blowup_threshold > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "blowup_threshold must be positive");
  }
}

std::string to_string(RunStatus s) { return s == RunStatus::Completed ? "completed" : "blowup"; }

namespace {

// phi1(z) = (1 - e^{-z})/z and phi2(z) = (z - 1 + e^{-z})/z^2.
double phi1(double z) {
  if (z < 1e-4) return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
  return -std::expm1(-z) / z;
}

double phi2(double z) {
  if (z < 1e-3) return 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0 + z * z * z * z / 720.0;
  return (z + std::expm1(-z)) / (z * z);
}

double sum_sup(const SpeciesState& s) {
  double total = 0.0;
  for (const auto& f : s) total += sup_norm(f);
  return total;
}

class Stepper {
 public:
  Stepper(const ReactionModel& model, const Grid& grid, const SolverConfig& cfg)
      : model_(model), grid_(grid), cfg_(cfg), m_(model.species()) {
    const auto xi2 = squared_wavenumbers(grid);
    power_.resize(xi2.size());
    for (std::size_t k = 0; k < xi2.size(); ++k) {
      power_[k] = xi2[k] == 0.0 ? 0.0 : (cfg.alpha == 1.0 ? xi2[k] : std::pow(xi2[k], cfg.alpha));
    }
    if (cfg.dealias) mask_ = dealias_mask(grid);
  }

  struct Outcome {
    bool ok = false;
    int iterations = 0;
    double residual = 0.0;
    SpeciesState state;
  };

  Outcome step(const SpeciesState& u, double h) {
    set_step(h);
    Outcome out;
    const std::size_t ns = power_.size();

    bool finite = true;
    std::vector<Spectrum> fixed(m_), f_old = rate_spectra(u, finite);
    if (!finite) return out;
    // Part of the update that does not depend on the new state, plus an
    // exponential Euler predictor.
    SpeciesState iterate;
    for (std::size_t i = 0; i < m_; ++i) {
      Spectrum ui = forward(u[i]);
      fixed[i].resize(ns);
      Spectrum guess(ns);
      for (std::size_t k = 0; k < ns; ++k) {
        fixed[i][k] = decay_[i][k] * ui[k] + w_old_[i][k] * f_old[i][k];
        guess[k] = decay_[i][k] * ui[k] + w_euler_[i][k] * f_old[i][k];
      }
      iterate.push_back(inverse(grid_, std::move(guess)));
    }

    double previous = std::numeric_limits<double>::infinity();
    int rising = 0;
    for (int it = 1; it <= cfg_.picard_max; ++it) {
      auto f_new = rate_spectra(iterate, finite);
      if (!finite) return out;
      SpeciesState next;
      double diff = 0.0, size = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        Spectrum s(ns);
        for (std::size_t k = 0; k < ns; ++k) s[k] = fixed[i][k] + w_new_[i][k] * f_new[i][k];
        Field fi = inverse(grid_, std::move(s));
        if (!fi.all_finite()) return out;
        diff = std::max(diff, sup_norm(fi - iterate[i]));
        size = std::max(size, sup_norm(fi));
        next.push_back(std::move(fi));
      }
      const double residual = size > 0.0 ? diff / size : diff;
      iterate = std::move(next);
      out.iterations = it;
      out.residual = residual;
      if (residual <= cfg_.picard_tol) {
        out.ok = true;
        out.state = std::move(iterate);
        return out;
      }
      rising = residual >= previous ? rising + 1 : 0;
      if (rising >= 3) return out;
      previous = residual;
    }
    return out;
  }

 private:
  void set_step(double h) {
    if (h == h_) return;
    h_ = h;
    const std::size_t ns = power_.size();
    decay_.assign(m_, std::vector<double>(ns));
    w_old_ = w_new_ = w_euler_ = decay_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double d = model_.diffusivities()[i];
      for (std::size_t k = 0; k < ns; ++k) {
        const double z = h * d * power_[k];
        const double p1 = phi1(z), p2 = phi2(z);
        const double keep = mask_.empty() ? 1.0 : mask_[k];
        decay_[i][k] = std::exp(-z);
        w_euler_[i][k] = keep * h * p1;
        w_old_[i][k] = keep * h * (p1 - p2);
        w_new_[i][k] = keep * h * p2;
      }
    }
  }

  std::vector<Spectrum> rate_spectra(const SpeciesState& u, bool& finite) {
    finite = true;
    SpeciesState f;
    try {
      f = eval_reactions(model_, u, 0.0, false);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteRate) throw;
      finite = false;
      return {};
    }
    std::vector<Spectrum> out;
    out.reserve(m_);
    for (const auto& fi : f) out.push_back(forward(fi));
    return out;
  }

  const ReactionModel& model_;
  Grid grid_;
  const SolverConfig& cfg_;
  std::size_t m_;
  std::vector<double> power_;
  std::vector<double> mask_;
  double h_ = -1.0;
  std::vector<std::vector<double>> decay_, w_old_, w_new_, w_euler_;
};

StepDiagnostics describe(const SpeciesState& s, double t) {
  StepDiagnostics d;
  d.time = t;
  for (const auto& f : s) {
    d.min_value.push_back(min_value(f));
    d.mass.push_back(integral(f));
    d.sup.push_back(sup_norm(f));
  }
  return d;
}

}  // namespace

Trajectory solve_mild(const ReactionModel& model, const SpeciesState& u0, const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t m = model.species();
  if (u0.size() != m) throw Error(ErrorCode::InvalidArgument, "initial state has the wrong number of species");
  for (const auto& f : u0) {
    require_same_grid(f, u0.front());
    if (!f.all_finite()) throw Error(ErrorCode::NonFiniteInput, "initial data must be finite");
    if (min_value(f) < 0.0) throw Error(ErrorCode::NegativeInitialData, "initial data must be nonnegative");
  }
  const Grid& grid = u0.front().grid();
  const double initial = sum_sup(u0);
  const double threshold = cfg.blowup_threshold.value_or(initial > 0.0 ? 1e6 * initial : 1e6);

  Trajectory traj;
  traj.alpha = cfg.alpha;
  traj.diffusivities = model.diffusivities();
  traj.times.push_back(cfg.start_time);
  traj.states.push_back(u0);

  Stepper stepper(model, grid, cfg);
  const long windows = std::max(1L, static_cast<long>(std::ceil(cfg.horizon / cfg.dt - 1e-9)));
  const double min_step = cfg.dt * std::ldexp(1.0, -cfg.max_halvings);
  SpeciesState u = u0;

  for (long n = 0; n < windows; ++n) {
    const double t_end = n + 1 == windows ? cfg.horizon : (n + 1) * cfg.dt;
    double t = n * cfg.dt;
    double h = cfg.dt;
    int iterations = 0, substeps = 0;
    double worst = 0.0;
    bool blew_up = false;
    while (t < t_end - 1e-14 * cfg.dt) {
      h = std::min(h, t_end - t);
      auto out = stepper.step(u, h);
      if (!out.ok) {
        if (sum_sup(u) > threshold) {
          blew_up = true;
          break;
        }
        h *= 0.5;
        if (h < min_step) {
          throw Error(ErrorCode::PicardDivergence,
                      "fixed-point iteration did not converge near t = " + std::to_string(cfg.start_time + t) +
                          "; reduce dt");
        }
        continue;
      }
      iterations += out.iterations;
      worst = std::max(worst, out.residual);
      ++substeps;
      u = std::move(out.state);
      t += h;
      if (sum_sup(u) > threshold) {
        blew_up = true;
        break;
      }
    }

    const double stamp = cfg.start_time + (blew_up ? t : t_end);
    StepDiagnostics diag = describe(u, stamp);
    diag.picard_iterations = iterations;
    diag.residual = worst;
    diag.substeps = substeps;
    traj.diagnostics.push_back(std::move(diag));
    if (blew_up) {
      traj.status = RunStatus::BlowUp;
      traj.blowup_time = stamp;
      if (stamp > traj.times.back()) {
        traj.times.push_back(stamp);
        traj.states.push_back(u);
      }
      return traj;
    }
    if ((n + 1) % cfg.store_every == 0 || n + 1 == windows) {
      traj.times.push_back(stamp);
      traj.states.push_back(u);
    }
  }
  return traj;
}

std::optional<double> detect_blowup(const Trajectory& traj, double threshold) {
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (sum_sup(traj.states[k]) > threshold) return traj.times[k];
  }
  return std::nullopt;
}

namespace {

constexpr char kMagic[8] = {'F', 'R', 'A', 'C', 'R', 'D', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(ErrorCode::IoError, "truncated checkpoint");
  return v;
}

void check_state(const Checkpoint& cp) {
  if (cp.state.empty()) throw Error(ErrorCode::InvalidArgument, "checkpoint has no species");
  for (const auto& f : cp.state) require_same_grid(f, cp.state.front());
}

}  // namespace

void write_checkpoint_binary(const std::filesystem::path& path, const Checkpoint& cp) {
  check_state(cp);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::OutputUnwritable, "cannot open " + path.string());
  const Grid& g = cp.state.front().grid();
  os.write(kMagic, sizeof(kMagic));
  put(os, kVersion);
  put(os, static_cast<std::int32_t>(g.dims()));
  put(os, static_cast<std::int32_t>(g.points_per_axis()));
  put(os, g.extent());
  put(os, static_cast<std::int32_t>(cp.state.size()));
  put(os, cp.time);
  for (const auto& f : cp.state) {
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.size() * sizeof(double)));
  }
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Checkpoint read_checkpoint_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::IoError, path.string() + " is not a checkpoint");
  }
  if (get<std::uint32_t>(is) != kVersion) throw Error(ErrorCode::IoError, "unsupported checkpoint version");
  const int dims = get<std::int32_t>(is);
  const int n = get<std::int32_t>(is);
  const double extent = get<double>(is);
  const int m = get<std::int32_t>(is);
  Checkpoint cp;
  cp.time = get<double>(is);
  Grid g = make_grid(dims, extent, n);
  for (int i = 0; i < m; ++i) {
    std::vector<double> v(g.node_count());
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!is) throw Error(ErrorCode::IoError, "truncated checkpoint");
    cp.state.emplace_back(g, std::move(v));
  }
  return cp;
}

void write_checkpoint_csv(const std::filesystem::path& path, const Checkpoint& cp) {
  check_state(cp);
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::OutputUnwritable, "cannot open " + path.string());
  const Grid& g = cp.state.front().grid();
  os << std::setprecision(16) << std::scientific;
  os << "# dims=" << g.dims() << " points=" << g.points_per_axis() << " extent=" << g.extent()
     << " species=" << cp.state.size() << " time=" << cp.time << "\n";
  os << "node";
  for (std::size_t i = 0; i < cp.state.size(); ++i) os << ",u" << i + 1;
  os << "\n";
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    os << node;
    for (const auto& f : cp.state) os << "," << f[node];
    os << "\n";
  }
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Checkpoint read_checkpoint_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  int dims = 0, n = 0, m = 0;
  double extent = 0.0, time = 0.0;
  if (std::sscanf(line.c_str(), "# dims=%d points=%d extent=%lf species=%d time=%lf", &dims, &n, &extent, &m,
                  &time) != 5) {
    throw Error(ErrorCode::IoError, "bad checkpoint header in " + path.string());
  }
  Grid g = make_grid(dims, extent, n);
  std::getline(is, line);
  std::vector<std::vector<double>> cols(m, std::vector<double>(g.node_count()));
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    if (!std::getline(is, line)) throw Error(ErrorCode::IoError, "truncated checkpoint");
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    for (int i = 0; i < m; ++i) {
      if (!std::getline(row, cell, ',')) throw Error(ErrorCode::IoError, "short checkpoint row");
      cols[i][node] = std::stod(cell);
    }
  }
  Checkpoint cp;
  cp.time = time;
  for (auto& c : cols) cp.state.emplace_back(g, std::move(c));
  return cp;
}

Trajectory resume_mild(const ReactionModel& model, const Checkpoint& cp, SolverConfig cfg) {
  if (!(cfg.horizon > cp.time)) throw Error(ErrorCode::InvalidArgument, "horizon must lie beyond the checkpoint");
  cfg.horizon -= cp.time;
  cfg.start_time = cp.time;
  return solve_mild(model, cp.state, cfg);
}

}  // namespace fracrd
