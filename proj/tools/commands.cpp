#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <bit>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include <CLI11.hpp>

#include "hdm/analytic.hpp"
#include "hdm/errors.hpp"
#include "hdm/manybody.hpp"
#include "hdm/oracle.hpp"
#include "hdm/parallel.hpp"
#include "output.hpp"

namespace hdm::cli {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

const std::vector<std::string> kCommands = {"spectrum", "evolve",  "collapse", "timeavg",
                                            "manybody", "entropy", "bench"};

std::vector<double> time_grid(double tmax, double dt) {
  if (!std::isfinite(dt) || !(dt > 0.0)) throw InputError("dt must be finite and > 0");
  if (!std::isfinite(tmax) || tmax < 0.0) throw InputError("tmax must be finite and >= 0");
  const double steps = std::floor(tmax / dt * (1.0 + 1e-12));
  if (steps > 1e7) throw ResourceError("time grid exceeds 10^7 points; raise dt");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) * dt;
  return t;
}

ModelParams model(const RunConfig& c) { return ModelParams(c.J, c.sigma, c.h, TreeGeometry(c.N)); }

std::pair<int, int> shell_range(const RunConfig& c, int fallback_max, int limit) {
  const int lo = c.r_min;
  const int hi = c.r_max < 0 ? fallback_max : c.r_max;
  if (lo < 0 || hi < lo) throw InputError("shell range must satisfy 0 <= rmin <= rmax");
  if (hi > limit) {
    throw InputError("rmax = " + std::to_string(hi) + " exceeds the " + std::to_string(limit) +
                     " shells available in this mode");
  }
  return {lo, hi};
}

std::pair<std::int64_t, std::int64_t> cut_range(const RunConfig& c, std::int64_t L) {
  const std::int64_t lo = c.x_min;
  const std::int64_t hi = c.x_max < 0 ? L - 1 : c.x_max;
  if (lo < 1 || hi < lo) throw InputError("cut range must satisfy 1 <= xmin <= xmax");
  return {lo, hi};
}

TruncationPolicy policy(const RunConfig& c, int shells_needed) {
  TruncationPolicy p;
  p.K = c.K;
  p.r_max = std::max(p.r_max, shells_needed);
  p.validate();
  return p;
}

/// Flattens per-time row blocks, computed in parallel, in time order.
void append(Table& table, std::vector<std::vector<std::vector<Cell>>> blocks) {
  for (auto& block : blocks) {
    for (auto& row : block) table.add(std::move(row));
  }
}

struct Run {
  const RunConfig& config;
  fs::path stem;
  std::string ext;
  std::string scheme;
  ojson tolerances = ojson::object();
  ojson diagnostics = ojson::object();
  std::vector<fs::path> outputs;

  void emit(const Table& table, const std::string& suffix = "") {
    fs::path path = stem;
    path += suffix + ext;
    write_table(table, path, config.format);
    outputs.push_back(path);
  }
};

// --- spectrum ------------------------------------------------------------

void cmd_spectrum(Run& run) {
  const ModelParams params = model(run.config);
  const SpectrumData s = eigenvalues(params);
  Table table({"k", "epsilon", "degeneracy"});
  for (int k = 0; k <= params.levels(); ++k) {
    table.add({std::int64_t{k}, s.eps(k), s.degeneracy[static_cast<std::size_t>(k)]});
  }
  run.scheme = "closed-form";
  run.emit(table);
}

// --- evolve --------------------------------------------------------------

void cmd_evolve(Run& run) {
  const RunConfig& c = run.config;
  const ModelParams params = model(c);
  const std::vector<double> times = time_grid(c.tmax, c.dt);
  const bool chain = c.mode != "thermo";
  const auto [lo, hi] = shell_range(c, c.N, chain ? c.N : 1 << 20);
  const TruncationPolicy trunc = policy(c, hi);

  std::optional<FastPropagator> fast;
  std::optional<DenseOperator> dense;
  if (c.mode == "fast") fast.emplace(params);
  if (c.mode == "dense") {
    dense.emplace(params);
    dense->eigenvalues();
  }
  const Eigen::VectorXcd delta =
      (fast || dense) ? delta_state(params.geom) : Eigen::VectorXcd();

  auto blocks = parallel_map(times.size(), [&](std::size_t i) {
    const double t = times[i];
    Eigen::VectorXcd amp;
    Eigen::VectorXd P;
    if (c.mode == "finite" || c.mode == "thermo") {
      const WaveProfile w = c.mode == "finite" ? psi_finite_shells(t, params)
                                               : psi_thermo_shells(t, c.sigma, c.J, trunc);
      amp = w.amplitudes;
      P = shell_probabilities(w).values;
    } else {
      const Eigen::VectorXcd psi = fast ? fast->evolve(t, delta) : dense->evolve(t, delta);
      P = shell_probabilities(WaveProfile{psi, t, ProfileMode::Site}).values;
      amp.resize(params.levels() + 1);
      for (int r = 0; r <= params.levels(); ++r) amp(r) = psi(r == 0 ? 0 : shell_first_site(r) - 1);
    }
    std::vector<std::vector<Cell>> rows;
    for (int r = lo; r <= hi; ++r) {
      rows.push_back({t, std::int64_t{r}, amp(r).real(), amp(r).imag(), P(r)});
    }
    return rows;
  });

  Table table({"t", "r", "psi_re", "psi_im", "P"});
  append(table, std::move(blocks));
  run.scheme = c.mode;
  if (c.mode == "thermo") {
    run.tolerances["series_tail"] = trunc.tail_bound();
    run.tolerances["shell_cutoff"] = trunc.r_max;
  }
  run.emit(table);
}

// --- collapse ------------------------------------------------------------

void cmd_collapse(Run& run) {
  const RunConfig& c = run.config;
  const std::vector<double> s_grid = time_grid(c.tmax, c.dt);
  const auto [lo0, hi] = shell_range(c, 8, 1 << 20);
  const int lo = std::max(1, lo0);
  if (hi < lo) throw InputError("collapse needs at least one shell r >= 1");
  const TruncationPolicy trunc = policy(c, hi);

  Table table({"s", "F_re", "F_im", "r_source"});
  double worst = 0.0;
  for (int r = lo; r <= hi; ++r) {
    auto rows = parallel_map(s_grid.size(), [&](std::size_t i) {
      const double s = s_grid[i];
      const cplx value = std::exp2(r) * psi_thermo(r, std::exp2(c.sigma * r) * s, c.sigma, c.J, trunc);
      const double dev = std::abs(value - scaling_function(s, c.sigma, c.J, trunc));
      return std::pair{std::vector<Cell>{s, value.real(), value.imag(), std::int64_t{r}}, dev};
    });
    for (auto& [row, dev] : rows) {
      table.add(std::move(row));
      worst = std::max(worst, dev);
    }
  }

  run.scheme = "thermo";
  run.tolerances["series_tail"] = trunc.tail_bound();
  run.tolerances["collapse_bound"] = 4.0 * trunc.tail_bound();
  run.diagnostics["max_deviation_from_F"] = worst;

  if (c.tmax > 0.0) {
    std::vector<int> shells(static_cast<std::size_t>(hi - lo + 1));
    std::iota(shells.begin(), shells.end(), lo);
    std::vector<double> fit_grid;
    for (int i = 1; i <= 60; ++i) fit_grid.push_back(c.tmax * i / 60.0);
    auto curve = [&](int r, double t) { return psi_thermo(r, t, c.sigma, c.J, trunc); };
    const ExponentFit fit = fit_dynamical_exponent(curve, shells, fit_grid);
    run.diagnostics["fitted_z"] = fit.z;
    run.diagnostics["fit_spread"] = fit.spread;
  }
  run.emit(table);
}

// --- timeavg -------------------------------------------------------------

void cmd_timeavg(Run& run) {
  const RunConfig& c = run.config;
  const double T = c.tmax;
  if (!std::isfinite(T) || !(T > 0.0)) throw InputError("averaging horizon T = tmax must be > 0");
  if (!(c.dt > 0.0)) throw InputError("dt must be > 0");
  const bool finite = c.mode == "finite";
  const ModelParams params = model(c);

  auto average = [&](int r) {
    return finite ? time_average(r, T, params, c.dt)
                  : time_average_thermo(r, T, c.sigma, c.J, policy(c, r), c.dt);
  };

  run.scheme = c.mode;
  run.tolerances["quadrature_step"] = c.dt;
  if (c.tail >= 0) {
    const int R = c.tail;
    if (finite && R > c.N) throw InputError("tail start exceeds the chain's shells");
    const auto avgs = parallel_map(static_cast<std::size_t>(R + 1),
                                   [&](std::size_t r) { return average(static_cast<int>(r)); });
    // Total probability is conserved, so the tail is the complement.
    const double tail = 1.0 - std::accumulate(avgs.begin(), avgs.end(), 0.0);
    Table table({"R", "T", "numerical_avg", "closed_form"});
    table.add({std::int64_t{R}, T, tail, tail_average(R)});
    run.diagnostics["tail_bound"] = tail_bound(R);
    run.emit(table);
    return;
  }

  const auto [lo, hi] = shell_range(c, c.N, finite ? c.N : 1 << 20);
  const auto avgs = parallel_map(static_cast<std::size_t>(hi - lo + 1),
                                 [&](std::size_t i) { return average(lo + static_cast<int>(i)); });
  Table table({"r", "T", "numerical_avg", "closed_form"});
  for (int r = lo; r <= hi; ++r) {
    table.add({std::int64_t{r}, T, avgs[static_cast<std::size_t>(r - lo)], closed_form_average(r)});
  }
  run.emit(table);
}

// --- manybody ------------------------------------------------------------

EvolutionOptions evolution_options(const RunConfig& c, Run& run) {
  EvolutionOptions opt;
  opt.scheme = c.mode == "exact" ? EvolutionScheme::ExactDiagonalization : EvolutionScheme::Krylov;
  opt.krylov_dim = c.krylov_dim;
  opt.tolerance = c.tolerance;
  opt.entropy = true;
  if (opt.scheme == EvolutionScheme::Krylov) {
    if (c.krylov_dim < 2) throw InputError("krylov-dim must be >= 2");
    if (!(c.tolerance > 0.0)) throw InputError("tol must be > 0");
    run.scheme = "krylov";
    run.tolerances["krylov_local_error"] = c.tolerance;
    run.tolerances["krylov_dim"] = c.krylov_dim;
  } else {
    run.scheme = "exact-diagonalization";
  }
  return opt;
}

void cmd_manybody(Run& run) {
  const RunConfig& c = run.config;
  if (c.compare && c.h == 0.0) {
    throw InputError("single-particle comparison needs h > 0 (excitation number is not conserved at h = 0)");
  }
  const ModelParams params = model(c);
  const SparseHamiltonian H = build_spin_hamiltonian(params);
  const std::vector<double> times = time_grid(c.tmax, c.dt);
  const ObservableSeries s = evolve_spin(H, initial_defect_state(H.sites()), times, evolution_options(c, run));
  const int L = H.sites();

  Table n({"t", "x", "n"});
  Table P({"t", "r", "P"});
  Table S({"t", "x", "S"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (int x = 1; x <= L; ++x) n.add({times[i], std::int64_t{x}, s.n(row, x - 1)});
    for (int r = 0; r <= c.N; ++r) P.add({times[i], std::int64_t{r}, s.shell_P(row, r)});
    for (int x = 1; x < L; ++x) S.add({times[i], std::int64_t{x}, (*s.entropy)(row, x - 1)});
  }
  run.emit(n, "_n");
  run.emit(P, "_P");
  run.emit(S, "_S");

  const QuasiConservationReport q = quasi_conservation_report(s);
  run.diagnostics["quasi_conservation_deviation"] = q.max_deviation;
  run.diagnostics["quasi_conservation_at_time"] = q.at_time;
  run.diagnostics["max_energy_drift"] = (s.energy.array() - s.energy(0)).abs().maxCoeff();
  run.diagnostics["max_norm_drift"] = (s.norm.array() - 1.0).abs().maxCoeff();

  if (c.compare) {
    const FastPropagator prop(params);
    const Eigen::VectorXcd delta = delta_state(params.geom);
    Table cmp({"t", "x", "n", "psi2"});
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const Eigen::VectorXd psi2 = prop.evolve(times[i], delta).cwiseAbs2();
      for (int x = 1; x <= L; ++x) {
        const double nx = s.n(static_cast<Eigen::Index>(i), x - 1);
        cmp.add({times[i], std::int64_t{x}, nx, psi2(x - 1)});
        worst = std::max(worst, std::abs(nx - psi2(x - 1)));
      }
    }
    run.diagnostics["max_single_particle_deviation"] = worst;
    run.emit(cmp, "_compare");
  }
}

// --- entropy -------------------------------------------------------------

void cmd_entropy(Run& run) {
  const RunConfig& c = run.config;
  const std::vector<double> times = time_grid(c.tmax, c.dt);
  const ModelParams params = model(c);
  const auto [lo, hi] = cut_range(c, params.length());
  Table table({"t", "x", "S"});

  if (c.mode == "manybody") {
    const SparseHamiltonian H = build_spin_hamiltonian(params);
    if (hi >= H.sites()) throw InputError("cut must satisfy 1 <= x < L");
    const ObservableSeries s = evolve_spin(H, initial_defect_state(H.sites()), times, evolution_options(c, run));
    for (std::size_t i = 0; i < times.size(); ++i) {
      for (std::int64_t x = lo; x <= hi; ++x) {
        table.add({times[i], x, (*s.entropy)(static_cast<Eigen::Index>(i), x - 1)});
      }
    }
    run.emit(table);
    return;
  }

  std::optional<FastPropagator> fast;
  if (c.mode == "finite") fast.emplace(params);
  const int shells_needed = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(hi)));
  const TruncationPolicy trunc = policy(c, shells_needed);
  const Eigen::VectorXcd delta = fast ? delta_state(params.geom) : Eigen::VectorXcd();
  auto blocks = parallel_map(times.size(), [&](std::size_t i) {
    const double t = times[i];
    const WaveProfile w = fast ? WaveProfile{fast->evolve(t, delta), t, ProfileMode::Site}
                               : psi_thermo_shells(t, c.sigma, c.J, trunc);
    std::vector<std::vector<Cell>> rows;
    for (std::int64_t x = lo; x <= hi; ++x) rows.push_back({t, x, single_particle_entropy(x, w)});
    return rows;
  });
  append(table, std::move(blocks));
  run.scheme = c.mode == "finite" ? "fast" : "thermo";
  if (!fast) run.tolerances["series_tail"] = trunc.tail_bound();
  run.emit(table);
}

// --- bench ---------------------------------------------------------------

struct Timing {
  double mean_ns = 0.0;
  double stddev_ns = 0.0;
};

template <typename F>
Timing time_it(int reps, F&& f) {
  f();  // warm-up
  std::vector<double> ns(static_cast<std::size_t>(reps));
  for (double& sample : ns) {
    const auto start = std::chrono::steady_clock::now();
    f();
    sample = std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - start).count();
  }
  const double mean = std::accumulate(ns.begin(), ns.end(), 0.0) / reps;
  double var = 0.0;
  for (double v : ns) var += (v - mean) * (v - mean);
  return {mean, reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0};
}

void cmd_bench(Run& run) {
  const RunConfig& c = run.config;
  if (c.n_min < 1 || c.n_max < c.n_min || c.n_max > 26) throw InputError("bench needs 1 <= nmin <= nmax <= 26");
  if (c.reps < 1) throw InputError("reps must be >= 1");
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> gauss;
  Table table({"N", "L", "op", "mean_ns", "stddev_ns"});
  ojson ratios = ojson::object();
  double previous_apply = 0.0;
  double previous_evolve = 0.0;
  for (int n = c.n_min; n <= c.n_max; ++n) {
    const ModelParams params(c.J, c.sigma, c.h, TreeGeometry(n));
    Eigen::VectorXcd v(params.length());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = {gauss(rng), gauss(rng)};
    v.normalize();
    const FastPropagator prop(params);
    Eigen::VectorXcd out;
    const Timing apply = time_it(c.reps, [&] { fast_apply(params, v, out); });
    const Timing evolve = time_it(c.reps, [&] { prop.evolve(c.tmax, v, out); });
    table.add({std::int64_t{n}, params.length(), std::string("fast_apply"), apply.mean_ns, apply.stddev_ns});
    table.add({std::int64_t{n}, params.length(), std::string("fast_evolve"), evolve.mean_ns, evolve.stddev_ns});
    if (previous_apply > 0.0) {
      ratios["fast_apply"].push_back(apply.mean_ns / previous_apply);
      ratios["fast_evolve"].push_back(evolve.mean_ns / previous_evolve);
    }
    previous_apply = apply.mean_ns;
    previous_evolve = evolve.mean_ns;
  }
  run.scheme = "fast";
  run.diagnostics["doubling_ratios"] = ratios;
  run.emit(table);
}

void dispatch(Run& run) {
  const std::string& cmd = run.config.command;
  if (cmd == "spectrum") return cmd_spectrum(run);
  if (cmd == "evolve") return cmd_evolve(run);
  if (cmd == "collapse") return cmd_collapse(run);
  if (cmd == "timeavg") return cmd_timeavg(run);
  if (cmd == "manybody") return cmd_manybody(run);
  if (cmd == "entropy") return cmd_entropy(run);
  if (cmd == "bench") return cmd_bench(run);
  throw InputError("unknown command '" + cmd + "'");
}

void check_mode(const RunConfig& c) {
  static const std::map<std::string, std::set<std::string>> modes = {
      {"spectrum", {""}},
      {"evolve", {"finite", "thermo", "fast", "dense"}},
      {"collapse", {"thermo"}},
      {"timeavg", {"thermo", "finite"}},
      {"manybody", {"krylov", "exact"}},
      {"entropy", {"finite", "thermo", "manybody"}},
      {"bench", {""}},
  };
  const auto it = modes.find(c.command);
  if (it == modes.end()) throw InputError("unknown command '" + c.command + "'");
  if (!it->second.contains(c.mode)) {
    throw InputError("mode '" + c.mode + "' is not valid for " + c.command);
  }
}

}  // namespace

std::string default_mode(const std::string& command) {
  if (command == "evolve" || command == "entropy") return "finite";
  if (command == "collapse" || command == "timeavg") return "thermo";
  if (command == "manybody") return "krylov";
  return "";
}

ojson to_json(const RunConfig& c) {
  return ojson{
      {"command", c.command}, {"N", c.N},           {"sigma", c.sigma},
      {"J", c.J},             {"h", c.h},           {"tmax", c.tmax},
      {"dt", c.dt},           {"K", c.K},           {"mode", c.mode},
      {"out", c.out},         {"format", c.format}, {"rmin", c.r_min},
      {"rmax", c.r_max},      {"xmin", c.x_min},    {"xmax", c.x_max},
      {"tail", c.tail},       {"compare", c.compare}, {"tol", c.tolerance},
      {"krylov_dim", c.krylov_dim}, {"nmin", c.n_min}, {"nmax", c.n_max},
      {"reps", c.reps},       {"seed", c.seed},
  };
}

RunConfig config_from_json(const ojson& doc) {
  RunConfig c;
  c.command = doc.value("command", c.command);
  c.N = doc.value("N", c.N);
  c.sigma = doc.value("sigma", c.sigma);
  c.J = doc.value("J", c.J);
  c.h = doc.value("h", c.h);
  c.tmax = doc.value("tmax", c.tmax);
  c.dt = doc.value("dt", c.dt);
  c.K = doc.value("K", c.K);
  c.mode = doc.value("mode", c.mode);
  c.out = doc.value("out", c.out);
  c.format = doc.value("format", c.format);
  c.r_min = doc.value("rmin", c.r_min);
  c.r_max = doc.value("rmax", c.r_max);
  c.x_min = doc.value("xmin", c.x_min);
  c.x_max = doc.value("xmax", c.x_max);
  c.tail = doc.value("tail", c.tail);
  c.compare = doc.value("compare", c.compare);
  c.tolerance = doc.value("tol", c.tolerance);
  c.krylov_dim = doc.value("krylov_dim", c.krylov_dim);
  c.n_min = doc.value("nmin", c.n_min);
  c.n_max = doc.value("nmax", c.n_max);
  c.reps = doc.value("reps", c.reps);
  c.seed = doc.value("seed", c.seed);
  return c;
}

RunResult execute(const RunConfig& input) {
  RunConfig config = input;
  if (config.mode.empty()) config.mode = default_mode(config.command);
  check_mode(config);
  if (config.format != "csv" && config.format != "json") {
    throw InputError("unknown format '" + config.format + "' (csv|json)");
  }

  const std::string ext = "." + config.format;
  fs::path out = config.out.empty() ? fs::path(config.command + ext) : fs::path(config.out);
  Run run{config, out.parent_path() / out.stem(), out.has_extension() ? out.extension().string() : ext};
  dispatch(run);

  ojson manifest;
  manifest["program"] = "hdm";
  manifest["command"] = config.command;
  manifest["L"] = std::int64_t{1} << config.N;
  manifest["sigma"] = config.sigma;
  manifest["J"] = config.J;
  manifest["h"] = config.h;
  manifest["t_max"] = config.tmax;
  manifest["dt_out"] = config.dt;
  manifest["scheme"] = run.scheme;
  manifest["tolerances"] = run.tolerances;
  manifest["basis"] = "site x is bit x-1 of the basis index; 0 = up, 1 = down";
  manifest["outputs"] = ojson::array();
  for (const fs::path& p : run.outputs) manifest["outputs"].push_back(p.filename().string());
  manifest["diagnostics"] = run.diagnostics;
  manifest["config"] = to_json(config);

  RunResult result{run.outputs, run.stem};
  result.manifest += ".manifest.json";
  write_text(result.manifest, manifest.dump(2) + "\n");
  return result;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Single-particle and small-L many-body dynamics of the quantum Dyson hierarchical model",
               "hdm"};
  RunConfig c;
  app.set_help_flag("--help", "print this help and exit");  // -h would shadow the field flag
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.add_option("--N", c.N, "tree levels, L = 2^N")->capture_default_str();
  app.add_option("--sigma", c.sigma, "coupling decay exponent")->capture_default_str();
  app.add_option("--J", c.J, "nearest-level coupling")->capture_default_str();
  app.add_option("--h", c.h, "transverse field (manybody)")->capture_default_str();
  app.add_option("--tmax", c.tmax, "final time; averaging horizon for timeavg; s range for collapse")
      ->capture_default_str();
  app.add_option("--dt", c.dt, "output step; quadrature step for timeavg")->capture_default_str();
  app.add_option("--K", c.K, "mode-series cutoff")->capture_default_str();
  app.add_option("--mode", c.mode, "evolve: finite|thermo|fast|dense, entropy: finite|thermo|manybody, "
                                   "timeavg: thermo|finite, manybody: krylov|exact");
  app.add_option("--out", c.out, "output path; the manifest goes to <stem>.manifest.json");
  app.add_option("--format", c.format, "csv|json")->capture_default_str();
  app.add_option("--rmin", c.r_min, "first shell")->capture_default_str();
  app.add_option("--rmax", c.r_max, "last shell (-1: N, or 8 for collapse)")->capture_default_str();
  app.add_option("--xmin", c.x_min, "first entanglement cut")->capture_default_str();
  app.add_option("--xmax", c.x_max, "last entanglement cut (-1: L-1)")->capture_default_str();
  app.add_option("--tail", c.tail, "timeavg: report the tail average beyond shell R")->capture_default_str();
  app.add_flag("--compare", c.compare, "manybody: compare n(x,t) with the single-particle |psi|^2");
  app.add_option("--tol", c.tolerance, "Krylov local error target")->capture_default_str();
  app.add_option("--krylov-dim", c.krylov_dim, "Krylov subspace dimension")->capture_default_str();
  app.add_option("--nmin", c.n_min, "bench: smallest N")->capture_default_str();
  app.add_option("--nmax", c.n_max, "bench: largest N")->capture_default_str();
  app.add_option("--reps", c.reps, "bench: timed repetitions")->capture_default_str();
  app.add_option("--seed", c.seed, "bench: input vector seed")->capture_default_str();

  const std::map<std::string, std::string> about = {
      {"spectrum", "distinct eigenvalues and degeneracies: k,epsilon,degeneracy"},
      {"evolve", "shell amplitudes and probabilities: t,r,psi_re,psi_im,P"},
      {"collapse", "rescaled curves 2^r psi(r, 2^(sigma r) s): s,F_re,F_im,r_source"},
      {"timeavg", "long-time averages: r,T,numerical_avg,closed_form"},
      {"manybody", "spin-chain observables: t,x,n / t,r,P / t,x,S"},
      {"entropy", "bipartite entanglement entropy: t,x,S"},
      {"bench", "fast operator timings: N,L,op,mean_ns,stddev_ns"},
  };
  for (const std::string& name : kCommands) app.add_subcommand(name, about.at(name))->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  c.command = app.get_subcommands().front()->get_name();

  std::mutex warn_mutex;
  std::set<std::string> seen;
  set_warning_handler([&](std::string_view msg) {
    const std::lock_guard lock(warn_mutex);
    if (seen.emplace(msg).second) std::cerr << "hdm: warning: " << msg << "\n";
  });

  int code = 0;
  try {
    const RunResult result = execute(c);
    for (const fs::path& p : result.outputs) std::cout << p.string() << "\n";
    std::cout << result.manifest.string() << "\n";
  } catch (const InputError& e) {
    std::cerr << "hdm: input error: " << e.what() << "\n";
    code = 2;
  } catch (const ResourceError& e) {
    std::cerr << "hdm: resource limit: " << e.what() << "\n";
    code = 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "hdm: convergence failure: " << e.what() << "\n";
    code = 4;
  } catch (const std::exception& e) {
    std::cerr << "hdm: error: " << e.what() << "\n";
    code = 1;
  }
  set_warning_handler([](std::string_view msg) { std::clog << msg << "\n"; });
  return code;
}

}  // namespace hdm::cli
