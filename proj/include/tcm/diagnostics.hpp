#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcm/audit.hpp"
#include "tcm/commutator.hpp"
#include "tcm/solver.hpp"

namespace tcm {

// All diagnostics act on the retained-mode spectral form of a state (to_spectral),
// where every product below is alias-free and the quadratic identities are exact
// up to rounding. Homogeneous pairings ignore the zero mode.

/// Ω = Rv + ηΛθ.
inline SpectralField omega(const SpectralState& x, double eta) {
  SpectralField o = riesz_div(x.v);
  o += eta * fractional_laplacian(x.theta, 1.0);
  return o;
}

inline RealField omega(const State& x, double eta) { return inverse_transform(omega(to_spectral(x), eta)); }

// ---------------------------------------------------------------------------
// Budgets. Each sample stores the tracked quantity Q, its dissipation D and the
// right-hand terms T_i of  dQ/dt + D = Σ T_i; the audit differentiates Q in time.
// ---------------------------------------------------------------------------

struct BudgetSample {
  double t = 0.0;
  double quantity = 0.0;
  double dissipation = 0.0;
  std::vector<NamedValue> terms;
};

struct BudgetRecord {
  double t = 0.0;
  double lhs_rate = 0.0;
  double dissipation = 0.0;
  std::vector<NamedValue> terms;
  double residual = 0.0;  // lhs_rate + dissipation − Σ terms

  [[nodiscard]] double term_sum() const {
    double s = 0.0;
    for (const auto& nv : terms) s += nv.value;
    return s;
  }
};

/// dq/dt on a uniform grid of spacing h: centered inside, one-sided second order at the ends.
inline std::vector<double> time_derivative(const std::vector<double>& q, double h) {
  const std::size_t n = q.size();
  if (n < 3) throw std::invalid_argument("time_derivative: need at least 3 samples");
  std::vector<double> d(n);
  d[0] = (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (q[i + 1] - q[i - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * q[n - 1] - 4.0 * q[n - 2] + q[n - 3]) / (2.0 * h);
  return d;
}

inline std::vector<BudgetRecord> budget_from_samples(const std::vector<BudgetSample>& s, double h) {
  std::vector<double> q(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) q[i] = s[i].quantity;
  const std::vector<double> rate = time_derivative(q, h);
  std::vector<BudgetRecord> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    BudgetRecord& r = out[i];
    r.t = s[i].t;
    r.lhs_rate = rate[i];
    r.dissipation = s[i].dissipation;
    r.terms = s[i].terms;
    r.residual = r.lhs_rate + r.dissipation - r.term_sum();
  }
  return out;
}

namespace detail {

inline void require_uniform(const Trajectory& tr) {
  if (tr.samples.size() < 3) throw std::invalid_argument("budget audit needs at least 3 samples");
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const double gap = tr.samples[i].t - tr.samples[i - 1].t;
    if (std::abs(gap - tr.sample_dt) > 1e-9 * std::max(1.0, tr.sample_dt)) {
      throw std::invalid_argument("trajectory samples are not at uniform cadence");
    }
  }
}

template <typename SampleFn>
std::vector<BudgetRecord> audit_trajectory(const Trajectory& tr, SampleFn&& fn) {
  require_uniform(tr);
  std::vector<BudgetSample> s;
  s.reserve(tr.samples.size());
  for (const State& x : tr.samples) s.push_back(fn(x));
  return budget_from_samples(s, tr.sample_dt);
}

inline auto lambda_s(double s) {
  return [s](const SpectralField& f) { return fractional_laplacian(f, s); };
}

}  // namespace detail

/// Q = ½‖(u,v,θ)‖²_{L²}, D = α‖(u,v)‖²_{L²} + η‖∇v‖²_{L²}, no right-hand terms.
inline BudgetSample l2_energy_sample(const State& x, const Params& p) {
  const SpectralState xs = to_spectral(x);
  const double uu = hs_seminorm_sq(xs.u), vv = hs_seminorm_sq(xs.v), tt = hs_seminorm_sq(xs.theta);
  BudgetSample b;
  b.t = x.t;
  b.quantity = 0.5 * (uu + vv + tt);
  const double damp = p.alpha * (uu + vv);
  const double visc = p.eta * hs_seminorm_sq(xs.v, 1.0);
  b.dissipation = damp + visc;
  return b;
}

inline std::vector<BudgetRecord> l2_energy_audit(const Trajectory& tr) {
  return detail::audit_trajectory(tr, [&](const State& x) { return l2_energy_sample(x, tr.params); });
}

/// Two evaluations of the same exact quantity.
struct IdentityCheck {
  std::string name;
  double direct = 0.0;
  double rewritten = 0.0;
  double scale = 0.0;  // magnitude of the largest constituent; guards against cancellation

  [[nodiscard]] double rel_error() const {
    const double d = std::max({std::abs(direct), std::abs(rewritten), scale});
    return d == 0.0 ? 0.0 : std::abs(direct - rewritten) / d;
  }
};

/// Terms of  ½ d/dt‖(u,v,θ)‖²_{Ḣ^s} + α‖(u,v)‖²_{Ḣ^s} + η‖∇v‖²_{Ḣ^s} = Σ I_i,
///   I₁ = −(u·∇u|u)_{Ḣ^s},  I₂ = −(div(v⊗v)|u)_{Ḣ^s},  I₃ = −(u·∇v|v)_{Ḣ^s},
///   I₄ = −(v·∇u|v)_{Ḣ^s},  I₅ = −(u·∇θ|θ)_{Ḣ^s},
/// plus the coupling (∇θ|v)_{Ḣ^s} + (div v|θ)_{Ḣ^s}, which cancels.
struct HsTerms {
  double I[5] = {0, 0, 0, 0, 0};
  double coupling = 0.0;
  std::vector<IdentityCheck> identities;
};

inline HsTerms hs_terms(const SpectralState& x, double s) {
  const VectorField u = inverse_transform(x.u);
  const VectorField v = inverse_transform(x.v);
  const SpectralVector uv_adv_u = advect(u, x.u);
  const SpectralVector uv_adv_v = advect(u, x.v);
  const SpectralVector vv_adv_u = advect(v, x.u);
  const SpectralField u_adv_th = advect(u, inverse_transform(gradient(x.theta)));
  const SpectralVector dvv = div_tensor(v);

  HsTerms h;
  h.I[0] = -inner_hs(uv_adv_u, x.u, s);
  h.I[1] = -inner_hs(dvv, x.u, s);
  h.I[2] = -inner_hs(uv_adv_v, x.v, s);
  h.I[3] = -inner_hs(vv_adv_u, x.v, s);
  h.I[4] = -inner_hs(u_adv_th, x.theta, s);
  h.coupling = inner_hs(gradient(x.theta), x.v, s) + inner_hs(divergence(x.v), x.theta, s);

  // Commutator forms: I₁ = −([Λ^s,u·∇]u|Λ^s u), I₃, I₅ likewise; and
  // I₂ + I₄ = −(v div v|u)_{Ḣ^s} − ([Λ^s,v·∇]v|Λ^s u) − ([Λ^s,v·∇]u|Λ^s v) + (div v|Λ^s u·Λ^s v).
  const auto Ls = detail::lambda_s(s);
  const VectorField ut = meanfree_physical(x.u);
  const VectorField vt = meanfree_physical(x.v);
  const SpectralVector lu = fractional_laplacian(x.u, s);
  const SpectralVector lv = fractional_laplacian(x.v, s);
  const SpectralField lth = fractional_laplacian(x.theta, s);

  const double c1 = -inner_hs(advective_commutator(ut, x.u, Ls), lu);
  const double c3 = -inner_hs(advective_commutator(ut, x.v, Ls), lv);
  const double c5 = -inner_hs(advective_commutator(ut, x.theta, Ls), lth);

  const RealField divv = inverse_transform(divergence(x.v));
  const SpectralVector v_divv{product(v.x, divv), product(v.y, divv)};
  const double a = inner_hs(v_divv, x.u, s);
  const double b = inner_hs(advective_commutator(vt, x.v, Ls), lu);
  const double c = inner_hs(advective_commutator(vt, x.u, Ls), lv);
  const VectorField lu_p = inverse_transform(lu);
  const VectorField lv_p = inverse_transform(lv);
  const double d = inner(divv, dot(lu_p, lv_p));
  const double c24 = -a - b - c + d;

  // Transport identity (v·∇Λ^s u|Λ^s v) + (v·∇Λ^s v|Λ^s u) = −(div v|Λ^s u·Λ^s v).
  const double t1 = inner_hs(advect(v, lu), lv);
  const double t2 = inner_hs(advect(v, lv), lu);

  auto mx = [](std::initializer_list<double> l) {
    double m = 0.0;
    for (double z : l) m = std::max(m, std::abs(z));
    return m;
  };
  h.identities = {
      {"I1", h.I[0], c1, mx({h.I[0], c1})},
      {"I3", h.I[2], c3, mx({h.I[2], c3})},
      {"I5", h.I[4], c5, mx({h.I[4], c5})},
      {"I2+I4", h.I[1] + h.I[3], c24, mx({h.I[1], h.I[3], a, b, c, d})},
      {"transport", t1 + t2, -d, mx({t1, t2, d})},
  };
  return h;
}

inline HsTerms hs_terms(const State& x, double s) { return hs_terms(to_spectral(x), s); }

/// Q = ½‖(u,v,θ)‖²_{Ḣ^s}, D = α‖(u,v)‖²_{Ḣ^s} + η‖∇v‖²_{Ḣ^s}, terms I₁..I₅ and coupling.
inline BudgetSample hs_energy_sample(const State& x, const Params& p, double s) {
  const SpectralState xs = to_spectral(x);
  const HsTerms h = hs_terms(xs, s);
  const double uu = hs_seminorm_sq(xs.u, s), vv = hs_seminorm_sq(xs.v, s), tt = hs_seminorm_sq(xs.theta, s);
  BudgetSample b;
  b.t = x.t;
  b.quantity = 0.5 * (uu + vv + tt);
  b.dissipation = p.alpha * (uu + vv) + p.eta * hs_seminorm_sq(xs.v, s + 1.0);
  b.terms = {{"I1", h.I[0]}, {"I2", h.I[1]}, {"I3", h.I[2]}, {"I4", h.I[3]}, {"I5", h.I[4]}, {"coupling", h.coupling}};
  return b;
}

inline std::vector<BudgetRecord> hs_energy_audit(const Trajectory& tr, double s) {
  return detail::audit_trajectory(tr, [&](const State& x) { return hs_energy_sample(x, tr.params, s); });
}

/// Right-hand pieces of the Ω equation
///   ∂_tΩ + u·∇Ω + Ω/η = (1/η − α)Rv − [R,u·∇]v − R(v·∇u) − η[Λ,u·∇]θ.
struct OmegaForcing {
  SpectralField omega;
  SpectralField advection;    // u·∇Ω
  SpectralField linear;       // (1/η − α)Rv
  SpectralField riesz_comm;   // [R,u·∇]v
  SpectralField riesz_vgu;    // R(v·∇u)
  SpectralField lambda_comm;  // [Λ,u·∇]θ
};

inline OmegaForcing omega_forcing(const SpectralState& x, const Params& p) {
  const VectorField u = inverse_transform(x.u);
  const VectorField v = inverse_transform(x.v);
  const VectorField ut = meanfree_physical(x.u);
  OmegaForcing f;
  f.omega = omega(x, p.eta);
  f.advection = advect(u, inverse_transform(gradient(f.omega)));
  f.linear = (1.0 / p.eta - p.alpha) * riesz_div(x.v);
  f.riesz_comm = riesz_adv_commutator_unchecked(ut, x.v);
  f.riesz_vgu = riesz_div(advect(v, x.u));
  f.lambda_comm = advective_commutator(ut, x.theta, detail::lambda_s(1.0));
  return f;
}

/// Q = ½‖Ω‖²_{L²}, D = ‖Ω‖²_{L²}/η, terms J₁..J₄.
inline BudgetSample omega_l2_sample(const State& x, const Params& p) {
  const OmegaForcing f = omega_forcing(to_spectral(x), p);
  BudgetSample b;
  b.t = x.t;
  const double oo = hs_seminorm_sq(f.omega);
  b.quantity = 0.5 * oo;
  b.dissipation = oo / p.eta;
  b.terms = {{"J1", inner_hs(f.linear, f.omega)},
             {"J2", -inner_hs(f.riesz_comm, f.omega)},
             {"J3", -inner_hs(f.riesz_vgu, f.omega)},
             {"J4", -p.eta * inner_hs(f.lambda_comm, f.omega)}};
  return b;
}

inline std::vector<BudgetRecord> omega_l2_audit(const Trajectory& tr) {
  return detail::audit_trajectory(tr, [&](const State& x) { return omega_l2_sample(x, tr.params); });
}

/// Q = ½‖Ω‖²_{Ḣ^{s−1}}, D = ‖Ω‖²_{Ḣ^{s−1}}/η, terms L₁..L₅ with L₂ = −([Λ^{s−1},u·∇]Ω|Λ^{s−1}Ω).
inline BudgetSample omega_hs_sample(const State& x, const Params& p, double s) {
  const SpectralState xs = to_spectral(x);
  const OmegaForcing f = omega_forcing(xs, p);
  const double r = s - 1.0;
  const VectorField ut = meanfree_physical(xs.u);
  const SpectralField comm = advective_commutator(ut, f.omega, detail::lambda_s(r));
  BudgetSample b;
  b.t = x.t;
  const double oo = hs_seminorm_sq(f.omega, r);
  b.quantity = 0.5 * oo;
  b.dissipation = oo / p.eta;
  b.terms = {{"L1", inner_hs(f.linear, f.omega, r)},
             {"L2", -inner_hs(comm, fractional_laplacian(f.omega, r))},
             {"L3", -inner_hs(f.riesz_comm, f.omega, r)},
             {"L4", -inner_hs(f.riesz_vgu, f.omega, r)},
             {"L5", -p.eta * inner_hs(f.lambda_comm, f.omega, r)}};
  return b;
}

inline std::vector<BudgetRecord> omega_hs_audit(const Trajectory& tr, double s) {
  return detail::audit_trajectory(tr, [&](const State& x) { return omega_hs_sample(x, tr.params, s); });
}

struct ResidualSample {
  double t = 0.0;
  double residual = 0.0;  // ‖∂_tΩ + u·∇Ω + Ω/η − forcing‖_{L²}
  double omega_l2 = 0.0;
};

/// Pointwise residual of the Ω equation with ∂_tΩ by finite differences over the samples.
inline std::vector<ResidualSample> omega_equation_residual(const Trajectory& tr) {
  detail::require_uniform(tr);
  const Params& p = tr.params;
  const double h = tr.sample_dt;
  std::vector<OmegaForcing> f;
  f.reserve(tr.samples.size());
  for (const State& x : tr.samples) f.push_back(omega_forcing(to_spectral(x), p));
  const std::size_t n = f.size();
  std::vector<ResidualSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    SpectralField dt(p.grid);
    if (i == 0) {
      dt = (-3.0 / (2.0 * h)) * f[0].omega + (4.0 / (2.0 * h)) * f[1].omega + (-1.0 / (2.0 * h)) * f[2].omega;
    } else if (i + 1 == n) {
      dt = (3.0 / (2.0 * h)) * f[n - 1].omega + (-4.0 / (2.0 * h)) * f[n - 2].omega + (1.0 / (2.0 * h)) * f[n - 3].omega;
    } else {
      dt = (1.0 / (2.0 * h)) * (f[i + 1].omega - f[i - 1].omega);
    }
    SpectralField r = dt;
    r += f[i].advection;
    r += (1.0 / p.eta) * f[i].omega;
    r -= f[i].linear;
    r += f[i].riesz_comm;
    r += f[i].riesz_vgu;
    r += p.eta * f[i].lambda_comm;
    out[i] = {tr.samples[i].t, std::sqrt(hs_seminorm_sq(r)), std::sqrt(hs_seminorm_sq(f[i].omega))};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lyapunov functional M‖(u,v,θ)‖²_{H^s} + ‖Ω‖²_{H^{s−1}}.
// ---------------------------------------------------------------------------

struct LyapunovConstants {
  double M = 1.0;
  double m = 0.5;
};

inline constexpr double kLyapunovFloor = 1.0;

/// M = max(2 c_cal η |1/η − α|² / α, 1), m = min{Mα/2, ηM/2, 1/(2η)}.
inline LyapunovConstants lyapunov_constants(double alpha, double eta, double c_cal = 1.0) {
  if (!(alpha > 0.0) || !(eta > 0.0) || !(c_cal > 0.0)) throw std::invalid_argument("lyapunov_constants: inputs must be positive");
  const double gap = 1.0 / eta - alpha;
  LyapunovConstants c;
  c.M = std::max(2.0 * c_cal * eta * gap * gap / alpha, kLyapunovFloor);
  c.m = std::min({c.M * alpha / 2.0, eta * c.M / 2.0, 1.0 / (2.0 * eta)});
  return c;
}

struct LyapunovRecord {
  double t = 0.0;
  double hs_part = 0.0;     // ‖(u,v,θ)‖²_{H^s}
  double omega_part = 0.0;  // ‖Ω‖²_{H^{s−1}}
  double M = 0.0;
  double m = 0.0;
  double value = 0.0;
};

/// ‖(u,v,θ)‖_{H^s} = ‖(u,v,θ)‖_{L²} + ‖Λ^s(u,v,θ)‖_{L²} with all components stacked.
inline double stacked_hs_norm(const SpectralState& x, double s) {
  const double l2 = hs_seminorm_sq(x.u) + hs_seminorm_sq(x.v) + hs_seminorm_sq(x.theta);
  const double hs = hs_seminorm_sq(x.u, s) + hs_seminorm_sq(x.v, s) + hs_seminorm_sq(x.theta, s);
  return std::sqrt(l2) + std::sqrt(hs);
}

/// ‖u‖_{H^s} + ‖v‖_{H^s} + ‖θ‖_{H^s}, the smallness quantity of the initial data.
inline double hs_sum(const SpectralState& x, double s) {
  return sobolev_norm(x.u, s, false) + sobolev_norm(x.v, s, false) + sobolev_norm(x.theta, s, false);
}

inline double hs_sum(const State& x, double s) { return hs_sum(to_spectral(x), s); }

inline LyapunovRecord lyapunov_record(const State& x, const Params& p, double s, const LyapunovConstants& c) {
  const SpectralState xs = to_spectral(x);
  LyapunovRecord r;
  r.t = x.t;
  const double h = stacked_hs_norm(xs, s);
  const double o = sobolev_norm(omega(xs, p.eta), s - 1.0, false);
  r.hs_part = h * h;
  r.omega_part = o * o;
  r.M = c.M;
  r.m = c.m;
  r.value = c.M * r.hs_part + r.omega_part;
  return r;
}

inline std::vector<LyapunovRecord> lyapunov_series(const Trajectory& tr, double s, double M) {
  LyapunovConstants c = lyapunov_constants(tr.params.alpha, tr.params.eta);
  c.M = M;
  c.m = std::min({M * tr.params.alpha / 2.0, tr.params.eta * M / 2.0, 1.0 / (2.0 * tr.params.eta)});
  std::vector<LyapunovRecord> out;
  out.reserve(tr.samples.size());
  for (const State& x : tr.samples) out.push_back(lyapunov_record(x, tr.params, s, c));
  return out;
}

}  // namespace tcm
