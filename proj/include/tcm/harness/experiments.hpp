#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tcm/commutator.hpp"
#include "tcm/diagnostics.hpp"
#include "tcm/harness/config.hpp"
#include "tcm/harness/csv.hpp"
#include "tcm/harness/ic_library.hpp"
#include "tcm/littlewood_paley.hpp"
#include "tcm/solver.hpp"

namespace tcm::harness {

inline constexpr const char* kVersion = "tcm 1.0.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kInstability = 3, kAssertionFailure = 4 };

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"operators-audit", "lp-audit",       "commutator-audit", "linear-verify",
                                              "simulate",        "energy-audit",   "smalldata-sweep"};
  return names;
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      // run
      "output_dir", "threads",
      // Params
      "n", "alpha", "eta", "s", "dt", "t_end", "scheme", "nonlinear",
      // driver
      "cadence", "checkpoint_interval", "restart",
      // initial data
      "ic", "ic_path", "amplitude", "ic_seed", "ic_slope", "ic_k_lo", "ic_k_hi",
      // corpus
      "corpus_seed", "corpus_count", "corpus_slope", "corpus_k_lo", "corpus_k_hi", "samples",
      // commutator audit
      "estimates", "s_list", "sigma_list", "p", "r", "lambda_list", "conv_j", "bony_j_list", "kp_s",
      // energy audit
      "dt_list", "audit_window",
      // lyapunov / sweep
      "c_cal", "bound_factor", "eps_list", "eps_lo", "eps_hi", "bisect_steps", "sweep_mode"};
  return keys;
}

/// Shared state of one run: configuration, output directory and the manifest
/// lines accumulated by the experiment.
struct RunContext {
  std::string experiment;
  Config cfg;
  std::filesystem::path out;
  std::vector<std::pair<std::string, std::string>> results;
  std::vector<std::uint64_t> seeds;
  std::string status = "ok";

  void result(const std::string& key, const std::string& value) { results.emplace_back(key, value); }
  void result(const std::string& key, double value) { results.emplace_back(key, fmt(value)); }
  [[nodiscard]] std::string path(const std::string& name) const { return (out / name).string(); }
};

inline Params params_from(const Config& c) {
  Params p;
  p.alpha = c.real("alpha", 1.0);
  p.eta = c.real("eta", 1.0);
  p.s = c.real("s", 2.5);
  p.grid = GridSpec::make(static_cast<int>(c.integer("n", 64)));
  p.dt = c.real("dt", 1e-3);
  p.t_end = c.real("t_end", 50.0);
  p.scheme = parse_scheme(c.str("scheme", "imex_bdf2"));
  p.nonlinear = c.boolean("nonlinear", true);
  p.validate();
  return p;
}

inline IcBand ic_band_from(const Config& c) {
  return {c.real("ic_slope", -2.0), static_cast<int>(c.integer("ic_k_lo", 1)), static_cast<int>(c.integer("ic_k_hi", 8))};
}

inline CorpusBand corpus_band_from(const Config& c) {
  return {c.real("corpus_slope", -1.5), static_cast<int>(c.integer("corpus_k_lo", 1)),
          static_cast<int>(c.integer("corpus_k_hi", 16))};
}

inline std::vector<std::uint64_t> corpus_seeds(const Config& c, long long default_count) {
  const long long count = c.integer("corpus_count", default_count);
  const long long base = c.integer("corpus_seed", 1);
  if (count < 1) throw ConfigError("corpus_count must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (long long i = 0; i < count; ++i) seeds.push_back(static_cast<std::uint64_t>(base + i));
  return seeds;
}

inline int threads_from(const Config& c) {
  const long long t = c.integer("threads", 0);
  if (t < 0) throw ConfigError("threads must be >= 0");
  if (t > 0) return static_cast<int>(t);
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Initial state per the ic* keys: a named profile or ic = snapshot with ic_path.
inline State initial_state(const Config& c, const Params& p, double amplitude) {
  const std::string name = c.str("ic", "random-band");
  if (name == "snapshot") {
    if (!c.has("ic_path")) throw ConfigError("ic = snapshot requires ic_path");
    State x = load_snapshot_file(c.str("ic_path", ""));
    if (!(x.grid() == p.grid)) throw ConfigError("snapshot grid does not match n");
    x.t = 0.0;
    return x;
  }
  return ic_library(name, amplitude, static_cast<std::uint64_t>(c.integer("ic_seed", 1)), p.grid, p.s, ic_band_from(c));
}

/// Evaluates fn(i) for i in [0, count) on up to `threads` workers; results in index order.
template <typename Fn>
auto parallel_map(std::size_t count, int threads, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) slots[i].emplace(fn(i));
  };
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), count));
  std::vector<std::future<void>> pool;
  for (int w = 1; w < workers; ++w) pool.push_back(std::async(std::launch::async, worker));
  worker();
  for (auto& f : pool) f.get();  // rethrows the first worker exception
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct CheckRow {
  std::string check;
  std::uint64_t seed = 0;
  int n = 0;
  double error = 0.0;
  double tolerance = 0.0;
  [[nodiscard]] bool pass() const { return std::isfinite(error) && error <= tolerance; }
};

/// Writes checks.csv, records the worst error per check and returns whether all passed.
inline bool write_checks(RunContext& ctx, const std::vector<CheckRow>& rows) {
  CsvWriter w(ctx.path("checks.csv"), {"check", "seed", "n", "error", "tolerance", "pass"});
  std::map<std::string, double> worst;
  bool ok = true;
  for (const auto& r : rows) {
    w.row({r.check, std::to_string(r.seed), std::to_string(r.n), fmt(r.error), fmt(r.tolerance), r.pass() ? "true" : "false"});
    worst[r.check] = std::max(worst[r.check], r.error);
    ok = ok && r.pass();
  }
  for (const auto& [k, v] : worst) ctx.result("max_error." + k, v);
  return ok;
}

// ---------------------------------------------------------------------------
// operators-audit: exactness properties of the spectral operators.
// ---------------------------------------------------------------------------

inline std::vector<CheckRow> operator_checks(const GridSpec& g, std::uint64_t seed, const CorpusBand& band) {
  const RealField f = random_band_field(g, 4 * seed + 1, band.slope, band.k_lo, band.k_hi);
  const VectorField w(random_band_field(g, 4 * seed + 2, band.slope, band.k_lo, band.k_hi),
                      random_band_field(g, 4 * seed + 3, band.slope, band.k_lo, band.k_hi));
  const SpectralField fh = forward_transform(f);
  const SpectralVector wh = forward_transform(w);
  std::vector<CheckRow> rows;
  auto add = [&](const std::string& name, double err, double tol) { rows.push_back({name, seed, g.n, err, tol}); };

  add("roundtrip", lp_norm(inverse_transform(fh) - f, INFINITY) / lp_norm(f, INFINITY), 1e-12);
  const double l2 = lp_norm(f, 2.0);
  add("parseval", std::abs(l2 * l2 - hs_seminorm_sq(fh)) / (l2 * l2), 1e-10);

  const SpectralField two_step = fractional_laplacian(fractional_laplacian(fh, 0.7), 1.3);
  const SpectralField one_step = fractional_laplacian(fh, 2.0);
  add("semigroup", std::sqrt(hs_seminorm_sq(two_step - one_step) / hs_seminorm_sq(one_step)), 1e-10);

  const SpectralVector pw = leray_project(wh);
  add("leray_idempotence", std::sqrt(hs_seminorm_sq(leray_project(pw) - pw) / hs_seminorm_sq(pw)), 1e-12);
  const double ww = hs_seminorm_sq(wh);
  add("leray_orthogonality",
      std::abs(inner(inverse_transform(pw), inverse_transform(wh - pw))) / ww, 1e-10);
  add("leray_divergence", lp_norm(inverse_transform(divergence(pw)), INFINITY), 1e-12);
  add("riesz_contraction", std::max(0.0, std::sqrt(hs_seminorm_sq(riesz_div(wh)) / ww) - 1.0), 1e-12);
  add("cancellation", std::abs(inner(gradient(f), w) + inner(divergence(w), f)), 1e-10);
  return rows;
}

inline int run_operators_audit(RunContext& ctx) {
  const GridSpec g = GridSpec::make(static_cast<int>(ctx.cfg.integer("n", 64)));
  const CorpusBand band = corpus_band_from(ctx.cfg);
  ctx.seeds = corpus_seeds(ctx.cfg, ctx.cfg.integer("samples", 20));
  auto per_seed = parallel_map(ctx.seeds.size(), threads_from(ctx.cfg),
                               [&](std::size_t i) { return operator_checks(g, ctx.seeds[i], band); });
  std::vector<CheckRow> rows;
  for (auto& v : per_seed) rows.insert(rows.end(), v.begin(), v.end());
  return write_checks(ctx, rows) ? kOk : kAssertionFailure;
}

// ---------------------------------------------------------------------------
// lp-audit: partition of unity, reconstruction, almost-orthogonality, Bernstein.
// ---------------------------------------------------------------------------

struct LpSeedResult {
  std::vector<CheckRow> checks;
  std::vector<AuditRecord> audits;
};

inline LpSeedResult lp_seed(const GridSpec& g, std::uint64_t seed) {
  const DyadicCutoffs cut = build_cutoffs(g);
  LpSeedResult out;
  const RealField f = random_band_field(g, 4 * seed + 1, -1.0, 1, g.k_max());
  const SpectralField fh = forward_transform(f);
  const double fn = std::sqrt(hs_seminorm_sq(fh));

  SpectralField sum = s_j(fh, 0);
  for (int j = 0; j <= cut.j_max; ++j) sum += delta_j(fh, j, cut);
  out.checks.push_back({"reconstruction", seed, g.n, std::sqrt(hs_seminorm_sq(sum - fh)) / fn, 1e-10});

  double ortho = 0.0;
  for (int j = cut.j_min; j <= cut.j_top(); ++j) {
    for (int k = cut.j_min; k <= cut.j_top(); ++k) {
      if (std::abs(j - k) < 2) continue;
      ortho = std::max(ortho, std::sqrt(hs_seminorm_sq(delta_j(delta_j(fh, k, cut), j, cut))) / fn);
    }
  }
  out.checks.push_back({"almost_orthogonality", seed, g.n, ortho, 1e-10});

  for (int j = 1; j <= cut.j_max; ++j) {
    const RealField block = inverse_transform(delta_j(fh, j, cut));
    for (double gamma : {0.5, 1.0, 1.5}) {
      AuditRecord r = bernstein_audit(block, j, gamma, 2.0, 2.0);
      r.seed = seed;
      const double lo = std::pow(0.75, 2.0 * gamma), hi = std::pow(8.0 / 3.0, 2.0 * gamma);
      const double miss = std::max({0.0, lo - r.ratio, r.ratio - hi});
      out.checks.push_back({"bernstein_p2_bracket", seed, g.n, miss, 0.0});
      out.audits.push_back(std::move(r));
    }
  }
  if (cut.j_max >= 3) {
    AuditRecord r = bernstein_audit(inverse_transform(delta_j(fh, 3, cut)), 3, 0.0, 2.0, INFINITY);
    r.seed = seed;
    out.audits.push_back(std::move(r));
  }
  const double sob = sobolev_norm(fh, 1.0, true);
  const double bes = besov_norm(fh, BesovIndex{1.0, 2.0, 2.0, true}, cut);
  AuditRecord eq;
  eq.estimate = "sobolev_besov_equivalence";
  eq.seed = seed;
  eq.n = g.n;
  eq.params = {{"s", 1.0}};
  eq.lhs = sob;
  eq.factors = {{"besov_2_2", bes}};
  eq.rhs = bes;
  eq.ratio = audit_ratio(sob, bes);
  out.audits.push_back(std::move(eq));
  return out;
}

inline int run_lp_audit(RunContext& ctx) {
  const GridSpec g = GridSpec::make(static_cast<int>(ctx.cfg.integer("n", 64)));
  ctx.seeds = corpus_seeds(ctx.cfg, ctx.cfg.integer("samples", 50));
  const DyadicCutoffs cut = build_cutoffs(g);
  std::vector<CheckRow> rows;
  double partition = 0.0;
  const int kmax = g.k_max();
  for (int a = 0; a <= kmax; ++a) {
    for (int b = 0; b <= kmax; ++b) {
      const double r = std::hypot(a, b);
      if (r < 1.0 || r > kmax) continue;
      double sum = DyadicCutoffs::chi(r);
      for (int j = 0; j <= cut.j_max; ++j) sum += DyadicCutoffs::phi(std::ldexp(r, -j));
      partition = std::max(partition, std::abs(sum - 1.0));
    }
  }
  rows.push_back({"partition_of_unity", 0, g.n, partition, 1e-12});
  ctx.result("j_max", static_cast<double>(cut.j_max));

  auto per_seed = parallel_map(ctx.seeds.size(), threads_from(ctx.cfg), [&](std::size_t i) { return lp_seed(g, ctx.seeds[i]); });
  std::vector<AuditRecord> audits;
  for (auto& r : per_seed) {
    rows.insert(rows.end(), r.checks.begin(), r.checks.end());
    audits.insert(audits.end(), r.audits.begin(), r.audits.end());
  }
  write_audit_csv(ctx.path("audit.csv"), audits);
  return write_checks(ctx, rows) ? kOk : kAssertionFailure;
}

// ---------------------------------------------------------------------------
// commutator-audit: seeded corpus for every commutator / product estimate.
// ---------------------------------------------------------------------------

struct CommutatorSettings {
  std::set<std::string> estimates;
  std::vector<double> s_list, sigma_list, lambda_list;
  std::vector<int> bony_j;
  double p = 2.0, r = 2.0, kp_s = 1.5;
  int conv_j = 2;
  CorpusBand band;
};

inline CommutatorSettings commutator_settings(const Config& c) {
  CommutatorSettings s;
  const auto est = c.strings("estimates", {"prop27", "kato_ponce", "product", "mollifier", "convolution", "riesz", "bony"});
  static const std::set<std::string> valid{"prop27", "kato_ponce", "product", "mollifier", "convolution", "riesz", "bony"};
  for (const auto& e : est) {
    if (!valid.count(e)) throw ConfigError("unknown estimate: " + e);
    s.estimates.insert(e);
  }
  s.s_list = c.reals("s_list", {0.5, 1.0, 1.5});
  s.sigma_list = c.reals("sigma_list", {-0.5, 0.0, 1.0});
  s.lambda_list = c.reals("lambda_list", {2.0, 4.0, 8.0, 16.0});
  for (double j : c.reals("bony_j_list", {1.0, 2.0, 3.0})) s.bony_j.push_back(static_cast<int>(j));
  s.p = c.real("p", 2.0);
  s.r = c.real("r", 2.0);
  s.kp_s = c.real("kp_s", 1.5);
  s.conv_j = static_cast<int>(c.integer("conv_j", 2));
  s.band = corpus_band_from(c);
  return s;
}

inline LpSeedResult commutator_seed(const GridSpec& g, std::uint64_t seed, const CommutatorSettings& cs) {
  LpSeedResult out;
  const VectorField f = corpus_solenoidal(g, seed, cs.band);
  const RealField h = corpus_scalar(g, seed, cs.band);
  const RealField a = corpus_scalar(g, seed, cs.band, 4);
  auto push = [&](AuditRecord rec) {
    rec.seed = seed;
    out.audits.push_back(std::move(rec));
  };
  if (cs.estimates.count("prop27")) {
    for (double s : cs.s_list)
      for (double sigma : cs.sigma_list) push(prop27_audit(f, h, s, sigma, cs.p, cs.r, seed));
  }
  if (cs.estimates.count("kato_ponce")) push(kp_audit(a, h, cs.kp_s, 2.0, INFINITY, 2.0, INFINITY, 2.0, seed));
  if (cs.estimates.count("product")) {
    for (double s : cs.s_list) push(product_audit(a, h, s, 2.0, 2.0, INFINITY, 2.0, INFINITY, 2.0, seed));
  }
  if (cs.estimates.count("mollifier")) {
    for (double lam : cs.lambda_list) {
      push(mollifier_audit(a, h, lam, MollifierProfile::Chi, INFINITY, 2.0, 2.0, seed));
      push(mollifier_audit(a, h, lam, MollifierProfile::Phi, INFINITY, 2.0, 2.0, seed));
    }
  }
  if (cs.estimates.count("convolution")) {
    AuditRecord rec = conv_audit(dyadic_kernel(g, cs.conv_j), a, h, 2.0, 1.0, 2.0, seed);
    rec.params.push_back({"j", static_cast<double>(cs.conv_j)});
    push(std::move(rec));
  }
  if (cs.estimates.count("riesz")) {
    const VectorField v(corpus_scalar(g, seed, cs.band, 1), corpus_scalar(g, seed, cs.band, 2));
    push(riesz_audit(f, v, seed));
  }
  if (cs.estimates.count("bony")) {
    for (int j : cs.bony_j) {
      for (BonyWhich which : {BonyWhich::K1, BonyWhich::K2}) {
        const BonySplit split = bony_split(f, h, cs.s_list.empty() ? 1.0 : cs.s_list.front(), j, which);
        out.checks.push_back({std::string("bony_recombination_") + (which == BonyWhich::K1 ? "K1" : "K2") + "_j" + std::to_string(j),
                              seed, g.n, split.recombination_error(), 1e-8});
      }
    }
  }
  return out;
}

/// Key identifying an estimate's parameter cell, e.g. "prop27[s=1,sigma=0,p=2,r=2]".
inline std::string cell_key(const AuditRecord& r) {
  std::string k = r.estimate + "[";
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%s=%g", i ? "," : "", r.params[i].name.c_str(), r.params[i].value);
    k += buf;
  }
  return k + "]";
}

inline int run_commutator_audit(RunContext& ctx) {
  const GridSpec g = GridSpec::make(static_cast<int>(ctx.cfg.integer("n", 128)));
  const CommutatorSettings cs = commutator_settings(ctx.cfg);
  ctx.seeds = corpus_seeds(ctx.cfg, 100);
  auto per_seed = parallel_map(ctx.seeds.size(), threads_from(ctx.cfg),
                               [&](std::size_t i) { return commutator_seed(g, ctx.seeds[i], cs); });
  std::vector<AuditRecord> audits;
  std::vector<CheckRow> rows;
  for (auto& r : per_seed) {
    audits.insert(audits.end(), r.audits.begin(), r.audits.end());
    rows.insert(rows.end(), r.checks.begin(), r.checks.end());
  }
  std::stable_sort(audits.begin(), audits.end(), [](const AuditRecord& x, const AuditRecord& y) {
    return std::make_pair(cell_key(x), x.seed) < std::make_pair(cell_key(y), y.seed);
  });
  write_audit_csv(ctx.path("audit.csv"), audits);

  struct Cell {
    std::size_t count = 0;
    double max_ratio = 0.0;
    double min_ratio = INFINITY;
  };
  std::map<std::string, Cell> cells;
  bool all_valid = true;
  for (const auto& r : audits) {
    Cell& c = cells[cell_key(r)];
    ++c.count;
    c.max_ratio = std::max(c.max_ratio, r.ratio);
    c.min_ratio = std::min(c.min_ratio, r.ratio);
    all_valid = all_valid && r.valid();
  }
  CsvWriter summary(ctx.path("summary.csv"), {"cell", "count", "min_ratio", "max_ratio"});
  for (const auto& [k, c] : cells) summary.row({"\"" + k + "\"", std::to_string(c.count), fmt(c.min_ratio), fmt(c.max_ratio)});
  ctx.result("records", static_cast<double>(audits.size()));
  ctx.result("all_ratios_finite", all_valid ? "true" : "false");
  const bool checks_ok = write_checks(ctx, rows);
  return all_valid && checks_ok ? kOk : kAssertionFailure;
}

// ---------------------------------------------------------------------------
// linear-verify: exact per-mode solution of the linearized system.
// ---------------------------------------------------------------------------

inline int run_linear_verify(RunContext& ctx) {
  Params p = params_from(ctx.cfg);
  if (!ctx.cfg.has("t_end")) p.t_end = 5.0 * p.eta;
  const double cadence = ctx.cfg.real("cadence", 0.1);
  const State x0 = initial_state(ctx.cfg, p, ctx.cfg.real("amplitude", 1.0));
  ctx.seeds = {static_cast<std::uint64_t>(ctx.cfg.integer("ic_seed", 1))};

  const Trajectory exact = linearized_solve(x0, p, cadence);
  Params lin = p;
  lin.nonlinear = false;
  std::vector<State> stepped;
  solve(x0, lin, {[&](const State& s) { stepped.push_back(s); }}, SolveOptions{cadence, 0.0, {}});

  const bool balanced = std::abs(p.alpha * p.eta - 1.0) < 1e-12;
  const double o0 = lp_norm(omega(exact.samples.front(), p.eta), 2.0);
  double worst_decay = 0.0, worst_step = 0.0;
  CsvWriter w(ctx.path("series.csv"), {"t", "omega_l2", "omega_predicted", "decay_rel_err", "stepper_rel_diff"});
  for (std::size_t i = 0; i < exact.samples.size(); ++i) {
    const State& e = exact.samples[i];
    const double o = lp_norm(omega(e, p.eta), 2.0);
    const double pred = o0 * std::exp(-e.t / p.eta);
    const double derr = o0 == 0.0 ? std::abs(o) : std::abs(o - pred) / o0;
    double sdiff = 0.0;
    if (i < stepped.size()) {
      const State& s = stepped[i];
      const double scale = lp_norm(e.u, 2.0) + lp_norm(e.v, 2.0) + lp_norm(e.theta, 2.0);
      const double d = lp_norm(e.u - s.u, 2.0) + lp_norm(e.v - s.v, 2.0) + lp_norm(e.theta - s.theta, 2.0);
      sdiff = scale == 0.0 ? d : d / scale;
    }
    worst_decay = std::max(worst_decay, derr);
    worst_step = std::max(worst_step, sdiff);
    w.row({fmt(e.t), fmt(o), fmt(pred), fmt(derr), fmt(sdiff)});
  }
  ctx.result("alpha_eta_balanced", balanced ? "true" : "false");
  ctx.result("omega_decay_max_rel_err", worst_decay);
  ctx.result("stepper_max_rel_diff", worst_step);
  if (balanced && !(worst_decay <= 1e-6)) return kAssertionFailure;
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate: nonlinear run with per-sample diagnostics and snapshots.
// ---------------------------------------------------------------------------

struct SeriesRow {
  double t = 0.0;
  double e_l2 = 0.0, diss_damp = 0.0, diss_visc = 0.0;
  double hs_norm = 0.0;  // ‖u‖_{H^s} + ‖v‖_{H^s} + ‖θ‖_{H^s}
  double omega_l2 = 0.0, omega_hs1 = 0.0;
  double lyapunov = 0.0;
  double grad_v_hs_sq = 0.0;  // ‖∇v‖²_{H^s}
  BudgetSample b_l2, b_hs, b_ol2, b_ohs;
};

inline SeriesRow series_row(const State& x, const Params& p, const LyapunovConstants& lc) {
  const SpectralState xs = to_spectral(x);
  SeriesRow r;
  r.t = x.t;
  const double uu = hs_seminorm_sq(xs.u), vv = hs_seminorm_sq(xs.v), tt = hs_seminorm_sq(xs.theta);
  r.e_l2 = 0.5 * (uu + vv + tt);
  r.diss_damp = p.alpha * (uu + vv);
  r.diss_visc = p.eta * hs_seminorm_sq(xs.v, 1.0);
  r.hs_norm = hs_sum(xs, p.s);
  const SpectralField om = omega(xs, p.eta);
  r.omega_l2 = std::sqrt(hs_seminorm_sq(om));
  r.omega_hs1 = sobolev_norm(om, p.s - 1.0, false);
  const double gv = std::sqrt(hs_seminorm_sq(xs.v, 1.0)) + std::sqrt(hs_seminorm_sq(xs.v, p.s + 1.0));
  r.grad_v_hs_sq = gv * gv;
  const double stacked = stacked_hs_norm(xs, p.s);
  r.lyapunov = lc.M * stacked * stacked + r.omega_hs1 * r.omega_hs1;
  r.b_l2 = l2_energy_sample(x, p);
  r.b_hs = hs_energy_sample(x, p, p.s);
  r.b_ol2 = omega_l2_sample(x, p);
  r.b_ohs = omega_hs_sample(x, p, p.s);
  return r;
}

inline void write_series(const std::string& path, const std::vector<SeriesRow>& rows, double cadence) {
  std::vector<std::vector<BudgetRecord>> budgets(4);
  if (rows.size() >= 3) {
    std::vector<BudgetSample> s[4];
    for (const auto& r : rows) {
      s[0].push_back(r.b_l2);
      s[1].push_back(r.b_hs);
      s[2].push_back(r.b_ol2);
      s[3].push_back(r.b_ohs);
    }
    for (int k = 0; k < 4; ++k) budgets[k] = budget_from_samples(s[k], cadence);
  }
  CsvWriter w(path, {"t", "E_l2", "diss_damp", "diss_visc", "hs_norm", "omega_l2", "omega_hs1", "lyapunov", "grad_v_hs_sq",
                     "residual_l2", "residual_hs", "residual_omega_l2", "residual_omega_hs"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SeriesRow& r = rows[i];
    std::vector<std::string> cells{fmt(r.t),        fmt(r.e_l2),     fmt(r.diss_damp), fmt(r.diss_visc), fmt(r.hs_norm),
                                   fmt(r.omega_l2), fmt(r.omega_hs1), fmt(r.lyapunov), fmt(r.grad_v_hs_sq)};
    for (int k = 0; k < 4; ++k) cells.push_back(budgets[k].empty() ? "" : fmt(budgets[k][i].residual));
    w.row(cells);
  }
}

/// Trapezoid rule over uniformly spaced samples.
inline double trapezoid(const std::vector<double>& y, double h) {
  if (y.size() < 2) return 0.0;
  double acc = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) acc += y[i];
  return acc * h;
}

inline void write_snapshot_file(const std::string& path, const State& x, const Params& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write snapshot " + path);
  write_snapshot(out, x, p);
  if (!out) throw IoError("write failed: " + path);
}

inline std::string step_tag(double t, double dt) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%012lld", std::llround(t / dt));
  return buf;
}

inline int run_simulate(RunContext& ctx) {
  const Params p = params_from(ctx.cfg);
  const double cadence = ctx.cfg.real("cadence", 0.1);
  const LyapunovConstants lc = lyapunov_constants(p.alpha, p.eta, ctx.cfg.real("c_cal", 1.0));
  State x0;
  if (ctx.cfg.has("restart")) {
    SnapshotMeta meta;
    x0 = load_snapshot_file(ctx.cfg.str("restart", ""), &meta);
    if (!(x0.grid() == p.grid)) throw ConfigError("restart snapshot grid does not match n");
    ctx.result("restart_t", x0.t);
  } else {
    x0 = initial_state(ctx.cfg, p, ctx.cfg.real("amplitude", 1e-2));
  }
  ctx.seeds = {static_cast<std::uint64_t>(ctx.cfg.integer("ic_seed", 1))};
  std::filesystem::create_directories(ctx.out / "snapshots");

  std::vector<SeriesRow> rows;
  SolveOptions opt;
  opt.cadence = cadence;
  opt.checkpoint_interval = ctx.cfg.real("checkpoint_interval", 0.0);
  opt.on_checkpoint = [&](const State& s) {
    write_snapshot_file(ctx.path("snapshots/ckpt_" + step_tag(s.t, p.dt) + ".tcmf"), s, p);
  };
  int status = kOk;
  State final_state;
  try {
    final_state = solve(x0, p, {[&](const State& s) { rows.push_back(series_row(s, p, lc)); }}, opt);
    write_snapshot_file(ctx.path("snapshots/final.tcmf"), final_state, p);
  } catch (const InstabilityError& e) {
    ctx.result("blow_time", e.time);
    ctx.status = "instability";
    status = kInstability;
  }
  write_series(ctx.path("series.csv"), rows, cadence);

  if (!rows.empty()) {
    double sup = 0.0;
    std::vector<double> gv;
    for (const auto& r : rows) {
      sup = std::max(sup, r.hs_norm);
      gv.push_back(r.grad_v_hs_sq);
    }
    ctx.result("samples", static_cast<double>(rows.size()));
    ctx.result("hs_sum_initial", rows.front().hs_norm);
    ctx.result("hs_sum_sup", sup);
    ctx.result("hs_sum_sup_over_initial", audit_ratio(sup, rows.front().hs_norm));
    ctx.result("lyapunov_M", lc.M);
    ctx.result("lyapunov_m", lc.m);
    ctx.result("lyapunov_initial", rows.front().lyapunov);
    ctx.result("lyapunov_final", rows.back().lyapunov);
    ctx.result("grad_v_hs_sq_integral", trapezoid(gv, cadence));
  }
  return status;
}

// ---------------------------------------------------------------------------
// energy-audit: budget residuals under dt refinement.
// ---------------------------------------------------------------------------

struct EnergyAuditRow {
  double dt = 0.0;
  double res_l2 = 0.0, res_hs = 0.0, res_omega_l2 = 0.0, res_omega_hs = 0.0, res_omega_eq = 0.0;
  double identity_err = 0.0;
  double diss_max = 0.0;
  std::vector<BudgetRecord> l2_records;
};

inline EnergyAuditRow energy_audit_at(const State& x0, Params p, double dt) {
  p.dt = dt;
  const Trajectory tr = record(x0, p, dt);
  EnergyAuditRow row;
  row.dt = dt;
  auto worst = [](const std::vector<BudgetRecord>& rs) {
    double m = 0.0;
    for (const auto& r : rs) m = std::max(m, std::abs(r.residual));
    return m;
  };
  row.l2_records = l2_energy_audit(tr);
  row.res_l2 = worst(row.l2_records);
  for (const auto& r : row.l2_records) row.diss_max = std::max(row.diss_max, r.dissipation);
  row.res_hs = worst(hs_energy_audit(tr, p.s));
  row.res_omega_l2 = worst(omega_l2_audit(tr));
  row.res_omega_hs = worst(omega_hs_audit(tr, p.s));
  for (const auto& r : omega_equation_residual(tr)) {
    row.res_omega_eq = std::max(row.res_omega_eq, r.omega_l2 == 0.0 ? r.residual : r.residual / r.omega_l2);
  }
  for (std::size_t i = 0; i < tr.samples.size(); i += std::max<std::size_t>(1, tr.samples.size() / 8)) {
    for (const auto& c : hs_terms(tr.samples[i], p.s).identities) row.identity_err = std::max(row.identity_err, c.rel_error());
  }
  return row;
}

inline int run_energy_audit(RunContext& ctx) {
  Params p = params_from(ctx.cfg);
  p.t_end = ctx.cfg.real("audit_window", 0.2);
  const std::vector<double> dts = ctx.cfg.reals("dt_list", {2e-3, 1e-3, 5e-4});
  if (dts.size() < 2) throw ConfigError("dt_list needs at least two entries");
  const State x0 = initial_state(ctx.cfg, p, ctx.cfg.real("amplitude", 0.05));
  ctx.seeds = {static_cast<std::uint64_t>(ctx.cfg.integer("ic_seed", 1))};
  auto rows = parallel_map(dts.size(), threads_from(ctx.cfg), [&](std::size_t i) { return energy_audit_at(x0, p, dts[i]); });

  CsvWriter w(ctx.path("audit.csv"), {"dt", "residual_l2", "residual_hs", "residual_omega_l2", "residual_omega_hs",
                                      "residual_omega_eq_rel", "identity_max_rel_err", "dissipation_max"});
  bool ok = true;
  double identity = 0.0;
  for (const auto& r : rows) {
    w.row({fmt(r.dt), fmt(r.res_l2), fmt(r.res_hs), fmt(r.res_omega_l2), fmt(r.res_omega_hs), fmt(r.res_omega_eq),
           fmt(r.identity_err), fmt(r.diss_max)});
    identity = std::max(identity, r.identity_err);
  }
  double min_rate = INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double rate = std::log(rows[i - 1].res_l2 / rows[i].res_l2) / std::log(rows[i - 1].dt / rows[i].dt);
    ctx.result("rate_l2[" + fmt(rows[i - 1].dt) + "->" + fmt(rows[i].dt) + "]", rate);
    min_rate = std::min(min_rate, rate);
  }
  ctx.result("min_rate_l2", min_rate);
  ctx.result("identity_max_rel_err", identity);
  ok = (min_rate >= 1.8) && (identity <= 1e-8);

  const EnergyAuditRow& fine = rows.back();
  CsvWriter s(ctx.path("series.csv"), {"t", "lhs_rate", "dissipation", "residual"});
  for (const auto& r : fine.l2_records) s.row({fmt(r.t), fmt(r.lhs_rate), fmt(r.dissipation), fmt(r.residual)});
  return ok ? kOk : kAssertionFailure;
}

// ---------------------------------------------------------------------------
// smalldata-sweep: bounded / not bounded verdicts over the data size ε.
// ---------------------------------------------------------------------------

struct SweepVerdict {
  double epsilon = 0.0;
  bool bounded = false;
  std::optional<double> blow_time;
  double hs_initial = 0.0, hs_sup = 0.0;
  double lyapunov_initial = 0.0, lyapunov_final = 0.0;
};

inline SweepVerdict sweep_point(const Config& cfg, const Params& p, double eps, double bound_factor, double cadence,
                                const LyapunovConstants& lc) {
  SweepVerdict v;
  v.epsilon = eps;
  if (eps == 0.0) {
    v.bounded = true;  // zero data stays zero
    return v;
  }
  const State x0 = initial_state(cfg, p, eps);
  bool first = true;
  try {
    solve(x0, p,
          {[&](const State& s) {
            const SpectralState xs = to_spectral(s);
            const double h = hs_sum(xs, p.s);
            const double st = stacked_hs_norm(xs, p.s);
            const double o = sobolev_norm(omega(xs, p.eta), p.s - 1.0, false);
            const double lyap = lc.M * st * st + o * o;
            if (first) {
              v.hs_initial = h;
              v.lyapunov_initial = lyap;
              first = false;
            }
            v.hs_sup = std::max(v.hs_sup, h);
            v.lyapunov_final = lyap;
          }},
          SolveOptions{cadence, 0.0, {}});
  } catch (const InstabilityError& e) {
    v.blow_time = e.time;
  }
  v.bounded = !v.blow_time && v.hs_sup <= bound_factor * v.hs_initial && v.lyapunov_final < v.lyapunov_initial;
  return v;
}

inline int run_smalldata_sweep(RunContext& ctx) {
  const Params p = params_from(ctx.cfg);
  const double bound_factor = ctx.cfg.real("bound_factor", 2.0);
  const double cadence = ctx.cfg.real("cadence", 0.1);
  const LyapunovConstants lc = lyapunov_constants(p.alpha, p.eta, ctx.cfg.real("c_cal", 1.0));
  ctx.seeds = {static_cast<std::uint64_t>(ctx.cfg.integer("ic_seed", 1))};
  const int threads = threads_from(ctx.cfg);
  const std::string mode = ctx.cfg.str("sweep_mode", ctx.cfg.has("eps_list") ? "list" : "bisect");

  std::vector<SweepVerdict> verdicts;
  auto eval = [&](const std::vector<double>& eps) {
    auto out = parallel_map(eps.size(), threads, [&](std::size_t i) { return sweep_point(ctx.cfg, p, eps[i], bound_factor, cadence, lc); });
    verdicts.insert(verdicts.end(), out.begin(), out.end());
    return out;
  };
  if (mode == "list") {
    const auto eps = ctx.cfg.reals("eps_list", {});
    if (eps.empty()) throw ConfigError("sweep_mode = list requires eps_list");
    for (double e : eps)
      if (!(e >= 0.0)) throw ConfigError("eps_list entries must be >= 0");
    eval(eps);
  } else if (mode == "bisect") {
    double lo = ctx.cfg.real("eps_lo", 1e-3), hi = ctx.cfg.real("eps_hi", 10.0);
    if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("bisection needs 0 < eps_lo < eps_hi");
    const auto ends = eval({lo, hi});
    if (ends[0].bounded && !ends[1].bounded) {
      const long long steps = ctx.cfg.integer("bisect_steps", 6);
      for (long long k = 0; k < steps; ++k) {
        const double mid = std::sqrt(lo * hi);  // geometric: ε spans decades
        (eval({mid})[0].bounded ? lo : hi) = mid;
      }
    }
  } else {
    throw ConfigError("sweep_mode must be list or bisect");
  }

  std::sort(verdicts.begin(), verdicts.end(), [](const SweepVerdict& a, const SweepVerdict& b) { return a.epsilon < b.epsilon; });
  CsvWriter w(ctx.path("sweep.csv"), {"epsilon", "bounded", "blow_time", "hs_initial", "hs_sup", "lyapunov_initial", "lyapunov_final"});
  std::optional<double> threshold;
  for (const auto& v : verdicts) {
    w.row({fmt(v.epsilon), v.bounded ? "true" : "false", v.blow_time ? fmt(*v.blow_time) : "", fmt(v.hs_initial), fmt(v.hs_sup),
           fmt(v.lyapunov_initial), fmt(v.lyapunov_final)});
    if (v.bounded) threshold = std::max(threshold.value_or(0.0), v.epsilon);
  }
  ctx.result("bound_factor", bound_factor);
  ctx.result("empirical_threshold", threshold ? fmt(*threshold) : "none");
  ctx.result("threshold_caveat", "numerical observation at fixed n, dt, t_end; not a statement about the PDE");
  return kOk;
}

// ---------------------------------------------------------------------------

inline void write_manifest(const RunContext& ctx, int status) {
  std::ofstream m(ctx.path("manifest.txt"));
  if (!m) throw IoError("cannot write manifest in " + ctx.out.string());
  m << "experiment = " << ctx.experiment << "\n";
  m << "version = " << kVersion << "\n";
  m << "status = " << ctx.status << "\n";
  m << "exit_code = " << status << "\n";
  m << "grid_n = " << ctx.cfg.integer("n", ctx.experiment == "commutator-audit" ? 128 : 64) << "\n";
  m << "seeds =";
  for (std::size_t i = 0; i < ctx.seeds.size(); ++i) m << (i ? "," : " ") << ctx.seeds[i];
  m << "\n[config]\n";
  for (const auto& [k, v] : ctx.cfg.entries()) m << k << " = " << v << "\n";
  m << "[results]\n";
  for (const auto& [k, v] : ctx.results) m << k << " = " << v << "\n";
  if (!m) throw IoError("write failed: manifest.txt");
}

/// Runs one experiment; returns the process exit code.
inline int run(const std::string& experiment, const Config& cfg, std::string* error = nullptr) {
  RunContext ctx;
  ctx.experiment = experiment;
  ctx.cfg = cfg;
  auto fail = [&](int code, const std::string& msg) {
    if (error) *error = msg;
    return code;
  };
  int status = kOk;
  try {
    cfg.require_known(known_keys());
    ctx.out = cfg.str("output_dir", "out");
    std::error_code ec;
    std::filesystem::create_directories(ctx.out, ec);
    if (ec) throw IoError("cannot create output directory " + ctx.out.string() + ": " + ec.message());
    static const std::map<std::string, std::function<int(RunContext&)>> table{
        {"operators-audit", run_operators_audit}, {"lp-audit", run_lp_audit},
        {"commutator-audit", run_commutator_audit}, {"linear-verify", run_linear_verify},
        {"simulate", run_simulate},                 {"energy-audit", run_energy_audit},
        {"smalldata-sweep", run_smalldata_sweep}};
    auto it = table.find(experiment);
    if (it == table.end()) throw ConfigError("unknown experiment: " + experiment);
    status = it->second(ctx);
    if (status == kAssertionFailure) ctx.status = "assertion_failed";
    write_manifest(ctx, status);
  } catch (const InstabilityError& e) {
    return fail(kInstability, e.what());
  } catch (const ConfigError& e) {
    return fail(kConfigError, e.what());
  } catch (const IoError& e) {
    return fail(kConfigError, e.what());
  } catch (const FormatError& e) {
    return fail(kConfigError, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kConfigError, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kConfigError, e.what());
  }
  if (status == kInstability) return fail(status, "instability abort");
  if (status == kAssertionFailure) return fail(status, "assertion failure; see checks in " + ctx.out.string());
  return status;
}

}  // namespace tcm::harness
