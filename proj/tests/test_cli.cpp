#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "output.hpp"

using namespace hdm::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hdm_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hdm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Table load(const fs::path& p) { return parse_csv(slurp(p)); }

double num(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  return std::get<double>(c);
}

nlohmann::json manifest(const fs::path& stem) { return nlohmann::json::parse(slurp(stem.string() + ".manifest.json")); }

}  // namespace

TEST(Cli, CsvRoundTripIsExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  Table t({"a", "b", "c"});
  for (int i = 0; i < 2000; ++i) {
    t.add({std::ldexp(mant(rng), expo(rng)), mant(rng), std::int64_t{i}});
  }
  t.add({0.1, -0.0, std::int64_t{-5}});
  const Table back = parse_csv(render_csv(t));
  ASSERT_EQ(back.columns, t.columns);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) ASSERT_EQ(num(back.rows[r][c]), num(t.rows[r][c]));
  }
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
}

TEST(Cli, ConfigJsonRoundTrip) {
  RunConfig c;
  c.command = "evolve";
  c.N = 7;
  c.sigma = 0.3;
  c.mode = "thermo";
  c.tail = 3;
  c.compare = true;
  c.seed = 42;
  const RunConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Cli, SpectrumRows) {
  const fs::path dir = scratch("spectrum");
  ASSERT_EQ(invoke({"spectrum", "--N", "2", "--sigma", "1", "--out", (dir / "s.csv").string()}), 0);
  const Table t = load(dir / "s.csv");
  ASSERT_EQ(t.columns, (std::vector<std::string>{"k", "epsilon", "degeneracy"}));
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_NEAR(num(t.rows[0][1]), -1.5, 1e-15);
  EXPECT_NEAR(num(t.rows[1][1]), -0.5, 1e-15);
  EXPECT_NEAR(num(t.rows[2][1]), 1.0, 1e-15);
  EXPECT_EQ(num(t.rows[2][2]), 2.0);
  EXPECT_TRUE(fs::exists(dir / "s.manifest.json"));

  ASSERT_EQ(invoke({"spectrum", "--N", "9", "--out", (dir / "big.csv").string()}), 0);
  double total = 0.0;
  for (const auto& row : load(dir / "big.csv").rows) total += num(row[2]);
  EXPECT_EQ(total, 512.0);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  const std::string out = (dir / "x.csv").string();
  EXPECT_EQ(invoke({"spectrum", "--sigma", "0", "--out", out}), 2);
  EXPECT_EQ(invoke({"spectrum", "--N", "0", "--out", out}), 2);
  EXPECT_EQ(invoke({"spectrum", "--bogus", "1"}), 2);
  EXPECT_EQ(invoke({}), 2);
  EXPECT_EQ(invoke({"evolve", "--mode", "nonsense", "--out", out}), 2);
  EXPECT_EQ(invoke({"evolve", "--mode", "fast", "--rmax", "9", "--N", "4", "--out", out}), 2);
  EXPECT_EQ(invoke({"evolve", "--mode", "dense", "--N", "13", "--tmax", "1", "--out", out}), 3);
  EXPECT_EQ(invoke({"timeavg", "--tmax", "0", "--out", out}), 2);
  EXPECT_EQ(invoke({"manybody", "--N", "5", "--h", "40", "--out", out}), 3);
  EXPECT_EQ(invoke({"manybody", "--N", "2", "--h", "0", "--compare", "--out", out}), 2);
  EXPECT_EQ(invoke({"manybody", "--N", "2", "--h", "0", "--tmax", "1", "--dt", "0.5", "--out", out}), 0);
  EXPECT_EQ(invoke({"entropy", "--mode", "manybody", "--N", "2", "--xmax", "4", "--out", out}), 2);
  EXPECT_EQ(invoke({"spectrum", "--format", "xml", "--out", out}), 2);
  EXPECT_EQ(invoke({"--help"}), 0);
}

TEST(Cli, ConvergenceFailureExitCode) {
  const fs::path dir = scratch("convergence");
  EXPECT_EQ(invoke({"manybody", "--N", "2", "--h", "1", "--tmax", "1", "--dt", "1", "--tol", "1e-300",
                    "--krylov-dim", "2", "--out", (dir / "m.csv").string()}),
            4);
}

TEST(Cli, OutputIsDeterministic) {
  const fs::path dir = scratch("determinism");
  const fs::path out = dir / "run.csv";
  const std::vector<std::string> args = {"evolve", "--mode", "thermo", "--N", "6", "--sigma", "0.7",
                                         "--tmax", "20", "--out", out.string()};
  ASSERT_EQ(invoke(args), 0);
  const std::string first = slurp(out);
  const std::string first_manifest = slurp(dir / "run.manifest.json");
  fs::remove(out);
  ASSERT_EQ(invoke(args), 0);
  EXPECT_EQ(slurp(out), first);
  EXPECT_EQ(slurp(dir / "run.manifest.json"), first_manifest);
}

TEST(Cli, ConfigFileLosesToFlags) {
  const fs::path dir = scratch("config");
  {
    std::ofstream cfg(dir / "run.ini");
    cfg << "N = 3\nsigma = 2\ntmax = 1\n";
  }
  const fs::path out = dir / "e.csv";
  ASSERT_EQ(invoke({"evolve", "--config", (dir / "run.ini").string(), "--N", "2", "--out", out.string()}), 0);
  const auto m = manifest(dir / "e");
  EXPECT_EQ(m["config"]["N"], 2);
  EXPECT_EQ(m["config"]["sigma"], 2.0);
  EXPECT_EQ(m["t_max"], 1.0);
  EXPECT_EQ(m["L"], 4);
  EXPECT_EQ(m["outputs"][0], "e.csv");
}

TEST(Cli, EvolveModesAgree) {
  const fs::path dir = scratch("evolve");
  auto run_mode = [&](const std::string& mode, const std::string& N) {
    const fs::path out = dir / (mode + N + ".csv");
    EXPECT_EQ(invoke({"evolve", "--mode", mode, "--N", N, "--tmax", "20", "--dt", "0.5", "--rmax", "3",
                      "--out", out.string()}),
              0);
    return load(out);
  };
  const Table finite = run_mode("finite", "14");
  const Table thermo = run_mode("thermo", "14");
  ASSERT_EQ(finite.rows.size(), thermo.rows.size());
  EXPECT_EQ(num(finite.rows[0][4]), 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < finite.rows.size(); ++i) worst = std::max(worst, std::abs(num(finite.rows[i][4]) - num(thermo.rows[i][4])));
  EXPECT_LT(worst, 1e-3);

  const Table fast = run_mode("fast", "10");
  const Table dense = run_mode("dense", "10");
  double dpsi = 0.0;
  for (std::size_t i = 0; i < fast.rows.size(); ++i) {
    dpsi = std::max(dpsi, std::hypot(num(fast.rows[i][2]) - num(dense.rows[i][2]),
                                     num(fast.rows[i][3]) - num(dense.rows[i][3])));
  }
  EXPECT_LT(dpsi, 1e-10);
}

TEST(Cli, Collapse) {
  const fs::path dir = scratch("collapse");
  ASSERT_EQ(invoke({"collapse", "--sigma", "1", "--rmin", "1", "--rmax", "6", "--tmax", "15", "--dt", "0.25",
                    "--out", (dir / "c.csv").string()}),
            0);
  const Table t = load(dir / "c.csv");
  EXPECT_EQ(t.columns, (std::vector<std::string>{"s", "F_re", "F_im", "r_source"}));
  EXPECT_EQ(t.rows.size(), 6u * 61u);
  EXPECT_NEAR(num(t.rows[0][1]), 0.0, 1e-15);
  EXPECT_NEAR(num(t.rows[0][2]), 0.0, 1e-15);
  const auto m = manifest(dir / "c");
  EXPECT_LT(m["diagnostics"]["max_deviation_from_F"].get<double>(), 4.0 * std::exp2(-64));
  EXPECT_NEAR(m["diagnostics"]["fitted_z"].get<double>(), 1.0, 0.02);
}

TEST(Cli, TimeAverages) {
  const fs::path dir = scratch("timeavg");
  ASSERT_EQ(invoke({"timeavg", "--sigma", "1", "--tmax", "3000", "--rmax", "4", "--out", (dir / "t.csv").string()}), 0);
  const Table t = load(dir / "t.csv");
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_NEAR(num(t.rows[0][2]), 1.0 / 3.0, 0.02 / 3.0);
  EXPECT_NEAR(num(t.rows[4][3]), 1.0 / 24.0, 1e-15);

  ASSERT_EQ(invoke({"timeavg", "--tail", "3", "--tmax", "3000", "--out", (dir / "tail.csv").string()}), 0);
  const Table tail = load(dir / "tail.csv");
  ASSERT_EQ(tail.rows.size(), 1u);
  EXPECT_EQ(tail.columns[0], "R");
  EXPECT_NEAR(num(tail.rows[0][3]), 0.25 / 3.0, 1e-15);
  EXPECT_LT(num(tail.rows[0][2]), 0.25);
}

TEST(Cli, ManyBodyOutputs) {
  const fs::path dir = scratch("manybody");
  ASSERT_EQ(invoke({"manybody", "--N", "1", "--h", "3", "--tmax", "5", "--dt", "0.25", "--out",
                    (dir / "toy.csv").string()}),
            0);
  const Table n = load(dir / "toy_n.csv");
  for (const auto& row : n.rows) {
    const double c = std::cos(num(row[0]));
    EXPECT_NEAR(num(row[2]), num(row[1]) == 1.0 ? c * c : 1.0 - c * c, 1e-8);
  }
  EXPECT_TRUE(fs::exists(dir / "toy_P.csv"));
  EXPECT_TRUE(fs::exists(dir / "toy_S.csv"));

  ASSERT_EQ(invoke({"manybody", "--N", "3", "--h", "40", "--tmax", "10", "--dt", "0.05", "--compare",
                    "--out", (dir / "strong.csv").string()}),
            0);
  const auto m = manifest(dir / "strong");
  EXPECT_LT(m["diagnostics"]["quasi_conservation_deviation"].get<double>(), 0.01);
  EXPECT_EQ(m["scheme"], "krylov");
  EXPECT_EQ(m["outputs"].size(), 4u);
}

TEST(Cli, Entropy) {
  const fs::path dir = scratch("entropy");
  ASSERT_EQ(invoke({"entropy", "--N", "8", "--tmax", "5", "--dt", "5", "--out", (dir / "s.csv").string()}), 0);
  const Table t = load(dir / "s.csv");
  ASSERT_EQ(t.rows.size(), 2u * 255u);
  for (std::size_t i = 0; i < 255; ++i) EXPECT_NEAR(num(t.rows[i][2]), 0.0, 1e-12);
  double previous = 1e300;
  for (int k = 2; k <= 7; ++k) {
    const double S = num(t.rows[255 + (std::size_t{1} << k) - 1][2]);
    EXPECT_LT(S, previous);
    previous = S;
  }

  ASSERT_EQ(invoke({"entropy", "--mode", "thermo", "--N", "8", "--tmax", "5", "--dt", "5", "--out",
                    (dir / "th.csv").string()}),
            0);
  const Table th = load(dir / "th.csv");
  ASSERT_EQ(th.rows.size(), t.rows.size());

  ASSERT_EQ(invoke({"entropy", "--mode", "manybody", "--N", "3", "--h", "40", "--tmax", "1", "--dt", "1",
                    "--format", "json", "--out", (dir / "mb.json").string()}),
            0);
  const auto doc = nlohmann::json::parse(slurp(dir / "mb.json"));
  EXPECT_EQ(doc["rows"].size(), 14u);
}

TEST(Cli, Bench) {
  const fs::path dir = scratch("bench");
  ASSERT_EQ(invoke({"bench", "--nmin", "4", "--nmax", "6", "--reps", "3", "--out", (dir / "b.csv").string()}), 0);
  const Table t = load(dir / "b.csv");
  EXPECT_EQ(t.columns, (std::vector<std::string>{"N", "L", "op", "mean_ns", "stddev_ns"}));
  ASSERT_EQ(t.rows.size(), 6u);
  EXPECT_EQ(std::get<std::string>(t.rows[0][2]), "fast_apply");
  EXPECT_EQ(std::get<std::int64_t>(t.rows[5][1]), 64);
}
