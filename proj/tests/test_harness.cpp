// Configuration, CSV output, the initial-condition library and the experiment runner.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tcm/harness/experiments.hpp"

using namespace tcm;
using namespace tcm::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tcm_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Value of `key = value` inside the [results] section of a manifest.
std::string manifest_result(const fs::path& dir, const std::string& key) {
  std::istringstream in(slurp(dir / "manifest.txt"));
  std::string line;
  bool results = false;
  while (std::getline(in, line)) {
    if (line == "[results]") results = true;
    if (results && line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  }
  return "";
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

Config cfg(std::initializer_list<std::pair<const char*, std::string>> kv, const fs::path& out) {
  Config c;
  for (const auto& [k, v] : kv) c.set(k, v);
  c.set("output_dir", out.string());
  return c;
}

}  // namespace

// --- configuration --------------------------------------------------------------

TEST(Config, ParsesCommentsListsAndTypes) {
  std::istringstream in(
      "# header\n"
      "n = 128\n"
      "  alpha=0.5  \n"
      "\n"
      "dt_list = 2e-3, 1e-3 ,5e-4\n"
      "nonlinear = false\n"
      "r = inf\n"
      "estimates = prop27,riesz\n");
  const Config c = Config::parse(in);
  EXPECT_EQ(c.integer("n", 0), 128);
  EXPECT_EQ(c.real("alpha", 0.0), 0.5);
  EXPECT_EQ(c.reals("dt_list", {}), (std::vector<double>{2e-3, 1e-3, 5e-4}));
  EXPECT_FALSE(c.boolean("nonlinear", true));
  EXPECT_TRUE(std::isinf(c.real("r", 0.0)));
  EXPECT_EQ(c.strings("estimates", {}), (std::vector<std::string>{"prop27", "riesz"}));
  EXPECT_EQ(c.real("eta", 7.0), 7.0);
  EXPECT_FALSE(c.has("eta"));
}

TEST(Config, Errors) {
  std::istringstream no_eq("n 64\n");
  EXPECT_THROW(Config::parse(no_eq), ConfigError);
  std::istringstream no_key(" = 3\n");
  EXPECT_THROW(Config::parse(no_key), ConfigError);
  Config c;
  c.set("n", "6x4");
  c.set("flag", "yes");
  c.set("alpha", "one");
  EXPECT_THROW((void)c.integer("n", 0), ConfigError);
  EXPECT_THROW((void)c.boolean("flag", false), ConfigError);
  EXPECT_THROW((void)c.real("alpha", 0.0), ConfigError);
  EXPECT_THROW(c.require_known({"n", "flag"}), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/tcm.cfg"), ConfigError);
}

// --- CSV ------------------------------------------------------------------------

TEST(Csv, RoundTrippableNumbers) {
  EXPECT_EQ(fmt(0.1), "0.10000000000000001");
  EXPECT_EQ(fmt(1.0), "1");
  EXPECT_EQ(fmt(std::nan("")), "nan");
  EXPECT_EQ(fmt(-INFINITY), "-inf");
  for (double x : {1e-300, 3.141592653589793, -2.5e17}) EXPECT_EQ(std::stod(fmt(x)), x);
}

TEST(Csv, AuditUnionColumns) {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  AuditRecord a;
  a.estimate = "x";
  a.seed = 3;
  a.n = 64;
  a.params = {{"s", 1.0}};
  a.factors = {{"f1", 2.0}};
  a.lhs = 1.0;
  a.rhs = 2.0;
  a.ratio = 0.5;
  AuditRecord b = a;
  b.estimate = "y";
  b.params = {{"lambda", 4.0}};
  b.factors = {{"f2", 8.0}};
  b.ratio_lower = 0.25;
  write_audit_csv((dir / "a.csv").string(), {a, b});
  const auto rows = read_csv(dir / "a.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"estimate", "seed", "n", "regime", "s", "lambda", "lhs", "f1", "f2", "rhs", "ratio",
                                               "ratio_lower"}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"x", "3", "64", "", "1", "", "1", "2", "", "2", "0.5", ""}));
  EXPECT_EQ(rows[2], (std::vector<std::string>{"y", "3", "64", "", "", "4", "1", "", "8", "2", "0.5", "0.25"}));
  EXPECT_THROW(CsvWriter("/nonexistent/dir/x.csv", {"a"}), IoError);
}

// --- initial conditions ---------------------------------------------------------

TEST(Ic, ProfilesAreNormalized) {
  const GridSpec g = GridSpec::make(64);
  for (const char* name : {"taylor-green", "shear", "random-band"}) {
    for (double amp : {1e-2, 1.0, 3.0}) {
      const State x = ic_library(name, amp, 5, g, 2.5);
      EXPECT_NEAR(hs_sum(x, 2.5), amp, 1e-10 * amp) << name;
      EXPECT_LT(lp_norm(divergence(x.u), INFINITY), 1e-12) << name;
    }
  }
}

TEST(Ic, ZeroAmplitudeAndErrors) {
  const GridSpec g = GridSpec::make(32);
  const State x = ic_library("taylor-green", 0.0, 1, g, 2.5);
  EXPECT_EQ(lp_norm(x.u, INFINITY) + lp_norm(x.v, INFINITY) + lp_norm(x.theta, INFINITY), 0.0);
  EXPECT_THROW(ic_library("vortex-sheet", 1.0, 1, g, 2.5), std::invalid_argument);
  EXPECT_THROW(ic_library("shear", -1.0, 1, g, 2.5), std::invalid_argument);
  EXPECT_THROW(load_snapshot_file("/nonexistent.tcmf"), IoError);
}

TEST(Ic, RandomBandDependsOnSeedOnly) {
  const GridSpec g = GridSpec::make(32);
  const State a = ic_library("random-band", 1.0, 7, g, 2.5);
  const State b = ic_library("random-band", 1.0, 7, g, 2.5);
  const State c = ic_library("random-band", 1.0, 8, g, 2.5);
  EXPECT_EQ(a.theta.values, b.theta.values);
  EXPECT_NE(a.theta.values, c.theta.values);
}

// --- runner ---------------------------------------------------------------------

TEST(Run, ConfigErrorsExitTwo) {
  const fs::path dir = scratch("cfgerr");
  std::string err;
  EXPECT_EQ(run("operators-audit", cfg({{"bogus_key", "1"}}, dir), &err), kConfigError);
  EXPECT_NE(err.find("bogus_key"), std::string::npos);
  EXPECT_EQ(run("no-such-experiment", cfg({}, dir), &err), kConfigError);
  EXPECT_EQ(run("simulate", cfg({{"n", "48"}}, dir), &err), kConfigError);
  EXPECT_EQ(run("simulate", cfg({{"scheme", "leapfrog"}}, dir), &err), kConfigError);
  EXPECT_EQ(run("simulate", cfg({{"ic", "snapshot"}}, dir), &err), kConfigError);
  EXPECT_EQ(run("simulate", cfg({{"ic", "snapshot"}, {"ic_path", "/nonexistent.tcmf"}}, dir), &err), kConfigError);
  EXPECT_EQ(run("smalldata-sweep", cfg({{"sweep_mode", "list"}}, dir), &err), kConfigError);
}

TEST(Run, OperatorsAndLpAuditsPass) {
  const fs::path dir = scratch("ops");
  EXPECT_EQ(run("operators-audit", cfg({{"samples", "3"}}, dir / "ops")), kOk);
  EXPECT_EQ(manifest_result(dir / "ops", "max_error.roundtrip").empty(), false);
  EXPECT_EQ(run("lp-audit", cfg({{"samples", "3"}}, dir / "lp")), kOk);
  EXPECT_EQ(manifest_result(dir / "lp", "j_max"), "4");
  const auto rows = read_csv(dir / "lp" / "checks.csv");
  EXPECT_GT(rows.size(), 1u);
}

TEST(Run, LinearVerifyReportsOmegaDecay) {
  const fs::path dir = scratch("linear");
  EXPECT_EQ(run("linear-verify", cfg({{"n", "32"}, {"cadence", "0.5"}}, dir)), kOk);
  EXPECT_EQ(manifest_result(dir, "alpha_eta_balanced"), "true");
  EXPECT_LE(std::stod(manifest_result(dir, "omega_decay_max_rel_err")), 1e-6);
  EXPECT_EQ(read_csv(dir / "series.csv").size(), 12u);
}

TEST(Run, CommutatorAuditRowsPerCell) {
  const fs::path dir = scratch("comm");
  const Config c = cfg({{"n", "32"}, {"corpus_count", "3"}, {"corpus_k_hi", "8"}, {"estimates", "prop27,riesz,bony"}, {"bony_j_list", "1"}}, dir);
  ASSERT_EQ(run("commutator-audit", c), kOk);
  const auto rows = read_csv(dir / "audit.csv");
  // prop27: 3 s × 3 σ cells; riesz: 1 cell; 3 seeds each.
  EXPECT_EQ(rows.size(), 1u + 3u * (9u + 1u));
  const auto ratio_col = std::find(rows[0].begin(), rows[0].end(), "ratio") - rows[0].begin();
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_TRUE(std::isfinite(std::stod(rows[i][ratio_col])));
  EXPECT_EQ(manifest_result(dir, "all_ratios_finite"), "true");
}

TEST(Run, SimulateZeroDataGivesZeroSeries) {
  const fs::path dir = scratch("zero");
  ASSERT_EQ(run("simulate", cfg({{"n", "32"}, {"t_end", "0.05"}, {"dt", "1e-2"}, {"cadence", "1e-2"}, {"amplitude", "0"}}, dir)), kOk);
  const auto rows = read_csv(dir / "series.csv");
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    for (std::size_t j = 1; j < rows[i].size(); ++j) EXPECT_EQ(std::stod(rows[i][j]), 0.0) << rows[0][j];
  }
  EXPECT_TRUE(fs::exists(dir / "snapshots" / "final.tcmf"));
}

TEST(Run, SimulateInstabilityExitsThree) {
  const fs::path dir = scratch("blow");
  std::string err;
  const Config c = cfg({{"n", "32"}, {"scheme", "rk4_explicit"}, {"dt", "0.05"}, {"t_end", "200"}, {"cadence", "0.05"}, {"amplitude", "1"}}, dir);
  EXPECT_EQ(run("simulate", c, &err), kInstability);
  EXPECT_FALSE(manifest_result(dir, "blow_time").empty());
}

TEST(Run, EnergyAuditFirstOrderSchemeFailsAssertion) {
  const fs::path dir = scratch("order");
  const Config c = cfg({{"n", "32"}, {"scheme", "imex_euler"}, {"dt_list", "4e-3,2e-3"}, {"audit_window", "0.08"}}, dir);
  EXPECT_EQ(run("energy-audit", c), kAssertionFailure);
  EXPECT_LT(std::stod(manifest_result(dir, "min_rate_l2")), 1.8);
}

TEST(Run, SweepZeroIsBounded) {
  const fs::path dir = scratch("sweep");
  ASSERT_EQ(run("smalldata-sweep", cfg({{"n", "32"}, {"t_end", "0.2"}, {"dt", "1e-2"}, {"eps_list", "1e-2,0"}}, dir)), kOk);
  const auto rows = read_csv(dir / "sweep.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "0");
  EXPECT_EQ(rows[1][1], "true");
  EXPECT_EQ(rows[2][1], "true");
  EXPECT_EQ(manifest_result(dir, "empirical_threshold"), "0.01");
}

TEST(Run, SimulateIsDeterministicAndRestartable) {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), r = scratch("det_r");
  auto c = [](const fs::path& d) {
    return cfg({{"n", "32"}, {"t_end", "0.2"}, {"dt", "1e-3"}, {"cadence", "0.01"}, {"amplitude", "0.1"}, {"checkpoint_interval", "0.1"}}, d);
  };
  ASSERT_EQ(run("simulate", c(a)), kOk);
  ASSERT_EQ(run("simulate", c(b)), kOk);
  EXPECT_EQ(slurp(a / "series.csv"), slurp(b / "series.csv"));
  EXPECT_EQ(slurp(a / "manifest.txt").substr(slurp(a / "manifest.txt").find("[results]")),
            slurp(b / "manifest.txt").substr(slurp(b / "manifest.txt").find("[results]")));

  Config rc = c(r);
  rc.set("restart", (a / "snapshots" / "ckpt_000000000100.tcmf").string());
  ASSERT_EQ(run("simulate", rc), kOk);
  EXPECT_EQ(slurp(a / "snapshots" / "final.tcmf"), slurp(r / "snapshots" / "final.tcmf"));
}

// --- command line ---------------------------------------------------------------

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  const std::string exe = TCM_CLI_PATH;
  auto code = [](const std::string& cmd) {
    const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(code(exe + " operators-audit --samples 2 --output_dir " + dir.string()), 0);
  EXPECT_EQ(code(exe + " operators-audit --bogus 1 --output_dir " + dir.string()), 2);
  EXPECT_EQ(code(exe + " lp-audit --config /nonexistent.cfg"), 2);
  EXPECT_NE(code(exe), 0);

  std::ofstream(dir / "run.cfg") << "samples = 2\noutput_dir = " << (dir / "from_cfg").string() << "\n";
  EXPECT_EQ(code(exe + " lp-audit --config " + (dir / "run.cfg").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "from_cfg" / "manifest.txt"));
}
