#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcm/snapshot.hpp"
#include "tcm/spectral.hpp"

namespace tcm {

// Tropical climate system without thermal diffusion on the torus:
//   ∂_t u + u·∇u + αu + ∇p = −div(v⊗v),   div u = 0
//   ∂_t v + u·∇v + v·∇u + αv − ηΔv = ∇θ
//   ∂_t θ + u·∇θ = div v
// The state is advanced in Fourier space on the retained (2/3-rule) modes.

enum class Scheme { imex_euler, imex_bdf2, rk4_explicit };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::imex_euler: return "imex_euler";
    case Scheme::imex_bdf2: return "imex_bdf2";
    case Scheme::rk4_explicit: return "rk4_explicit";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "imex_euler") return Scheme::imex_euler;
  if (name == "imex_bdf2") return Scheme::imex_bdf2;
  if (name == "rk4_explicit") return Scheme::rk4_explicit;
  throw std::invalid_argument("unknown scheme: " + name);
}

struct Params {
  double alpha = 1.0;
  double eta = 1.0;
  double s = 2.5;
  GridSpec grid;
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::imex_bdf2;
  bool nonlinear = true;  // false keeps only the linear coupling (∇θ, div v)

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be > 0");
    if (!(s > 2.0)) throw std::invalid_argument("s must be > 2");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be finite and >= 0");
    GridSpec::make(grid.n);
  }
};

/// Largest stable dt for the scheme. The integrating-factor schemes treat the
/// stiff linear part exactly, so only the explicit coupling limits them (not
/// reported). RK4 must keep dt·(α + η·2k_max²) inside its real stability interval 2.785.
inline double stability_limit(const Params& p) {
  if (p.scheme != Scheme::rk4_explicit) return INFINITY;
  const double k = p.grid.k_max();
  return 2.785 / (p.alpha + p.eta * 2.0 * k * k);
}

struct State {
  VectorField u;
  VectorField v;
  RealField theta;
  double t = 0.0;

  static State zero(const GridSpec& g) { return {VectorField(g), VectorField(g), RealField(g), 0.0}; }
  [[nodiscard]] const GridSpec& grid() const { return theta.grid; }
  [[nodiscard]] bool finite() const { return u.finite() && v.finite() && theta.finite(); }
};

struct Tendency {
  VectorField du;
  VectorField dv;
  RealField dtheta;
};

struct SpectralState {
  SpectralVector u;
  SpectralVector v;
  SpectralField theta;

  explicit SpectralState(const GridSpec& g) : u(g), v(g), theta(g) {}
  SpectralState(SpectralVector a, SpectralVector b, SpectralField c) : u(std::move(a)), v(std::move(b)), theta(std::move(c)) {}

  [[nodiscard]] const GridSpec& grid() const { return theta.grid; }
  std::array<SpectralField*, 5> parts() { return {&u.x, &u.y, &v.x, &v.y, &theta}; }
  [[nodiscard]] std::array<const SpectralField*, 5> parts() const { return {&u.x, &u.y, &v.x, &v.y, &theta}; }

  [[nodiscard]] bool finite() const {
    for (const SpectralField* f : parts()) {
      for (const auto& c : f->coeffs) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
      }
    }
    return true;
  }
};

/// Retained-mode spectral form; u is Leray-projected.
inline SpectralState to_spectral(const State& x) {
  return {leray_project(dealias(forward_transform(x.u))), dealias(forward_transform(x.v)), dealias(forward_transform(x.theta))};
}

inline State to_physical(const SpectralState& x, double t) {
  return {inverse_transform(x.u), inverse_transform(x.v), inverse_transform(x.theta), t};
}

/// div(v⊗v) with component i = ∂_j(v_i v_j), products dealiased.
inline SpectralVector div_tensor(const VectorField& v) {
  const SpectralField xx = product(v.x, v.x);
  const SpectralField xy = product(v.x, v.y);
  const SpectralField yy = product(v.y, v.y);
  return {partial_x(xx) + partial_y(xy), partial_x(xy) + partial_y(yy)};
}

/// Explicit part of the right-hand side: everything except −αu, −αv + ηΔv.
///   N_u = P(−u·∇u − div(v⊗v)),  N_v = −u·∇v − v·∇u + ∇θ,  N_θ = −u·∇θ + div v.
inline SpectralState explicit_terms(const SpectralState& x, bool nonlinear) {
  const GridSpec& g = x.grid();
  SpectralState n(g);
  n.v = gradient(x.theta);
  n.theta = divergence(x.v);
  if (!nonlinear) return n;

  const VectorField u = inverse_transform(x.u);
  const VectorField v = inverse_transform(x.v);
  const VectorField gux = inverse_transform(gradient(x.u.x));
  const VectorField guy = inverse_transform(gradient(x.u.y));
  const VectorField gvx = inverse_transform(gradient(x.v.x));
  const VectorField gvy = inverse_transform(gradient(x.v.y));
  const VectorField gth = inverse_transform(gradient(x.theta));

  SpectralVector nu{advect(u, gux), advect(u, guy)};
  nu += div_tensor(v);
  n.u = leray_project(-1.0 * nu);

  // u·∇v + v·∇u, summed pointwise before one transform per component.
  RealField cx = dot(u, gvx);
  cx += dot(v, gux);
  RealField cy = dot(u, gvy);
  cy += dot(v, guy);
  n.v.x -= dealias(forward_transform(cx));
  n.v.y -= dealias(forward_transform(cy));
  n.theta -= advect(u, gth);
  return n;
}

namespace detail {

/// Per-mode linear decay rates: L_u = α, L_v = α + η|k|², L_θ = 0.
struct LinearRates {
  std::vector<double> u, v;

  LinearRates(const Params& p) {
    const Wavenumbers& w = wavenumbers(p.grid);
    u.assign(w.ksq.size(), p.alpha);
    v.resize(w.ksq.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = p.alpha + p.eta * w.ksq[i];
  }

  /// Rate array for component c of SpectralState::parts(); nullptr means zero.
  [[nodiscard]] const std::vector<double>* of(int c) const { return c < 2 ? &u : (c < 4 ? &v : nullptr); }
};

}  // namespace detail

/// Full right-hand side in physical space.
inline Tendency nonlinear_rhs(const State& x, const Params& p) {
  const SpectralState xs = to_spectral(x);
  SpectralState n = explicit_terms(xs, p.nonlinear);
  const detail::LinearRates rates(p);
  auto xp = xs.parts();
  auto np = n.parts();
  for (int c = 0; c < 4; ++c) {
    const auto& r = *rates.of(c);
    for (std::size_t i = 0; i < r.size(); ++i) np[c]->coeffs[i] -= r[i] * xp[c]->coeffs[i];
  }
  return {inverse_transform(n.u), inverse_transform(n.v), inverse_transform(n.theta)};
}

/// Zero-mean p with Δp = −div(u·∇u) − div div(v⊗v).
inline RealField pressure_recover(const State& x) {
  const SpectralState xs = to_spectral(x);
  const VectorField u = inverse_transform(xs.u);
  SpectralVector f{advect(u, inverse_transform(gradient(xs.u.x))), advect(u, inverse_transform(gradient(xs.u.y)))};
  f += div_tensor(inverse_transform(xs.v));
  const SpectralField div_f = divergence(f);
  const Wavenumbers& w = wavenumbers(x.grid());
  SpectralField ph(x.grid());
  for (std::size_t i = 0; i < ph.coeffs.size(); ++i) {
    if (w.ksq[i] != 0.0) ph.coeffs[i] = div_f.coeffs[i] / w.ksq[i];
  }
  return inverse_transform(ph);
}

class InstabilityError : public std::runtime_error {
 public:
  explicit InstabilityError(double t)
      : std::runtime_error("non-finite state at t = " + std::to_string(t)), time(t) {}
  double time;
};

/// Owns one evolving state. Time is always global_step·dt so restarted runs
/// land on the same sample times.
class Stepper {
 public:
  Stepper(const Params& p, const State& x0)
      : p_(p), rates_(p), x_(to_spectral(x0)), prev_x_(p.grid), prev_n_(p.grid) {
    p_.validate();
    if (!(x0.grid() == p.grid)) throw std::invalid_argument("initial state grid does not match params");
    step_ = std::llround(x0.t / p.dt);
    const Wavenumbers& w = wavenumbers(p.grid);
    e1u_.resize(w.ksq.size());
    e2u_.resize(w.ksq.size());
    e1v_.resize(w.ksq.size());
    e2v_.resize(w.ksq.size());
    for (std::size_t i = 0; i < w.ksq.size(); ++i) {
      e1u_[i] = std::exp(-rates_.u[i] * p.dt);
      e2u_[i] = std::exp(-2.0 * rates_.u[i] * p.dt);
      e1v_[i] = std::exp(-rates_.v[i] * p.dt);
      e2v_[i] = std::exp(-2.0 * rates_.v[i] * p.dt);
    }
  }

  [[nodiscard]] long long step_index() const { return step_; }
  [[nodiscard]] double time() const { return static_cast<double>(step_) * p_.dt; }
  [[nodiscard]] State state() const { return to_physical(x_, time()); }
  [[nodiscard]] const SpectralState& spectral() const { return x_; }

  /// Restarts from the physical state: drops multistep history and replaces the
  /// spectral state by the transform of the returned snapshot, exactly what a
  /// run resumed from that snapshot starts with.
  State reenter() {
    State snap = state();
    x_ = to_spectral(snap);
    have_prev_ = false;
    return snap;
  }

  void advance() {
    switch (p_.scheme) {
      case Scheme::imex_euler: advance_euler(); break;
      case Scheme::imex_bdf2: advance_bdf2(); break;
      case Scheme::rk4_explicit: advance_rk4(); break;
    }
    ++step_;
    if (!x_.finite()) throw InstabilityError(time());
  }

 private:
  [[nodiscard]] SpectralState explicit_part(const SpectralState& x) const { return explicit_terms(x, p_.nonlinear); }

  [[nodiscard]] const std::vector<double>* e1(int c) const { return c < 2 ? &e1u_ : (c < 4 ? &e1v_ : nullptr); }
  [[nodiscard]] const std::vector<double>* e2(int c) const { return c < 2 ? &e2u_ : (c < 4 ? &e2v_ : nullptr); }

  // x' = E1 (x + dt N)
  void advance_euler() {
    const SpectralState n = explicit_part(x_);
    auto xp = x_.parts();
    auto np = n.parts();
    for (int c = 0; c < 5; ++c) {
      const auto* f = e1(c);
      auto& xc = xp[c]->coeffs;
      const auto& nc = np[c]->coeffs;
      for (std::size_t i = 0; i < xc.size(); ++i) {
        const double a = f ? (*f)[i] : 1.0;
        xc[i] = a * (xc[i] + p_.dt * nc[i]);
      }
    }
  }

  // Integrating-factor SBDF2; first step (no history) by integrating-factor Heun.
  void advance_bdf2() {
    const double dt = p_.dt;
    SpectralState n = explicit_part(x_);
    SpectralState next(p_.grid);
    if (!have_prev_) {
      SpectralState pred(p_.grid);
      {
        auto xp = x_.parts();
        auto np = n.parts();
        auto pp = pred.parts();
        for (int c = 0; c < 5; ++c) {
          const auto* f = e1(c);
          for (std::size_t i = 0; i < xp[c]->coeffs.size(); ++i) {
            const double a = f ? (*f)[i] : 1.0;
            pp[c]->coeffs[i] = a * (xp[c]->coeffs[i] + dt * np[c]->coeffs[i]);
          }
        }
      }
      const SpectralState n1 = explicit_part(pred);
      auto xp = x_.parts();
      auto np = n.parts();
      auto n1p = n1.parts();
      auto out = next.parts();
      for (int c = 0; c < 5; ++c) {
        const auto* f = e1(c);
        for (std::size_t i = 0; i < xp[c]->coeffs.size(); ++i) {
          const double a = f ? (*f)[i] : 1.0;
          out[c]->coeffs[i] = a * xp[c]->coeffs[i] + 0.5 * dt * (a * np[c]->coeffs[i] + n1p[c]->coeffs[i]);
        }
      }
    } else {
      auto xp = x_.parts();
      auto np = n.parts();
      auto pxp = prev_x_.parts();
      auto pnp = prev_n_.parts();
      auto out = next.parts();
      for (int c = 0; c < 5; ++c) {
        const auto* f1 = e1(c);
        const auto* f2 = e2(c);
        for (std::size_t i = 0; i < xp[c]->coeffs.size(); ++i) {
          const double a1 = f1 ? (*f1)[i] : 1.0;
          const double a2 = f2 ? (*f2)[i] : 1.0;
          out[c]->coeffs[i] = (4.0 / 3.0) * a1 * xp[c]->coeffs[i] - (1.0 / 3.0) * a2 * pxp[c]->coeffs[i] +
                              (2.0 / 3.0) * dt * (2.0 * a1 * np[c]->coeffs[i] - a2 * pnp[c]->coeffs[i]);
        }
      }
    }
    prev_x_ = std::move(x_);
    prev_n_ = std::move(n);
    x_ = std::move(next);
    have_prev_ = true;
  }

  // Classical RK4 on N(x) − Lx.
  void advance_rk4() {
    const double dt = p_.dt;
    auto full = [&](const SpectralState& x) {
      SpectralState n = explicit_part(x);
      auto xp = x.parts();
      auto np = n.parts();
      for (int c = 0; c < 4; ++c) {
        const auto& r = *rates_.of(c);
        for (std::size_t i = 0; i < r.size(); ++i) np[c]->coeffs[i] -= r[i] * xp[c]->coeffs[i];
      }
      return n;
    };
    auto axpy = [](const SpectralState& x, double a, const SpectralState& k) {
      SpectralState y = x;
      auto yp = y.parts();
      auto kp = k.parts();
      for (int c = 0; c < 5; ++c) {
        for (std::size_t i = 0; i < yp[c]->coeffs.size(); ++i) yp[c]->coeffs[i] += a * kp[c]->coeffs[i];
      }
      return y;
    };
    const SpectralState k1 = full(x_);
    const SpectralState k2 = full(axpy(x_, 0.5 * dt, k1));
    const SpectralState k3 = full(axpy(x_, 0.5 * dt, k2));
    const SpectralState k4 = full(axpy(x_, dt, k3));
    auto xp = x_.parts();
    auto a = k1.parts();
    auto b = k2.parts();
    auto c3 = k3.parts();
    auto d = k4.parts();
    for (int c = 0; c < 5; ++c) {
      for (std::size_t i = 0; i < xp[c]->coeffs.size(); ++i) {
        xp[c]->coeffs[i] += dt / 6.0 * (a[c]->coeffs[i] + 2.0 * b[c]->coeffs[i] + 2.0 * c3[c]->coeffs[i] + d[c]->coeffs[i]);
      }
    }
  }

  Params p_;
  detail::LinearRates rates_;
  SpectralState x_;
  SpectralState prev_x_;
  SpectralState prev_n_;
  bool have_prev_ = false;
  long long step_ = 0;
  std::vector<double> e1u_, e2u_, e1v_, e2v_;
};

/// One step from x (no multistep history, so imex_bdf2 takes its Heun start step).
inline State step(const State& x, const Params& p) {
  Stepper s(p, x);
  s.advance();
  return s.state();
}

using Observer = std::function<void(const State&)>;

struct SolveOptions {
  double cadence = 0.0;              // observer interval; 0 means every step
  double checkpoint_interval = 0.0;  // 0 disables checkpoints
  std::function<void(const State&)> on_checkpoint;
};

namespace detail {

inline long long steps_in(double interval, double dt, const char* what) {
  if (interval == 0.0) return 1;
  const double r = interval / dt;
  const long long k = std::llround(r);
  if (k < 1 || std::abs(r - static_cast<double>(k)) > 1e-9 * std::max(1.0, r)) {
    throw std::invalid_argument(std::string(what) + " must be a positive integer multiple of dt");
  }
  return k;
}

}  // namespace detail

/// Advances x0 to p.t_end. Observers see every state whose global step is a
/// multiple of the cadence, in increasing time. At checkpoints the state is
/// re-entered (see Stepper::reenter) so a restart from the checkpoint snapshot
/// reproduces the remaining trajectory bit for bit.
inline State solve(const State& x0, const Params& p, const std::vector<Observer>& observers = {},
                   const SolveOptions& opt = {}) {
  p.validate();
  const long long every = detail::steps_in(opt.cadence, p.dt, "cadence");
  const long long ckpt = opt.checkpoint_interval > 0.0 ? detail::steps_in(opt.checkpoint_interval, p.dt, "checkpoint interval") : 0;
  const long long start = std::llround(x0.t / p.dt);
  const long long stop = std::llround(p.t_end / p.dt);
  if (stop <= start) {
    for (const auto& obs : observers) obs(x0);
    return x0;
  }
  Stepper stepper(p, x0);
  auto notify = [&] {
    if (observers.empty() || stepper.step_index() % every != 0) return;
    const State s = stepper.state();
    for (const auto& obs : observers) obs(s);
  };
  notify();
  while (stepper.step_index() < stop) {
    stepper.advance();
    if (ckpt > 0 && stepper.step_index() % ckpt == 0 && stepper.step_index() < stop) {
      const State snap = stepper.reenter();
      if (opt.on_checkpoint) opt.on_checkpoint(snap);
    }
    notify();
  }
  return stepper.state();
}

struct Trajectory {
  Params params;
  double sample_dt = 0.0;
  std::vector<State> samples;
};

/// Runs the time stepper and keeps every sample at the given cadence.
inline Trajectory record(const State& x0, const Params& p, double cadence) {
  Trajectory tr{p, cadence, {}};
  solve(x0, p, {[&tr](const State& s) { tr.samples.push_back(s); }}, SolveOptions{cadence, 0.0, {}});
  return tr;
}

// ---------------------------------------------------------------------------
// Linearized system ∂_t v + αv − ηΔv = ∇θ, ∂_t θ = div v, solved exactly per mode.
// ---------------------------------------------------------------------------

struct ModeValue {
  std::complex<double> vx, vy, theta;
};

namespace detail {

/// e^{At} for A = [[−λ, i|k|], [i|k|, 0]], the (a, θ̂) block with a = k̂·v̂.
inline std::array<std::complex<double>, 4> coupled_exponential(double lambda, double kabs, double t) {
  using C = std::complex<double>;
  const C I(0.0, 1.0);
  const C a00 = -lambda, a01 = I * kabs, a10 = I * kabs, a11 = 0.0;
  const double tau = -0.5 * lambda;
  const double d2 = 0.25 * lambda * lambda - kabs * kabs;
  if (d2 > 0.0 && std::sqrt(d2) * t > 1e-3) {
    // Distinct real eigenvalues; μ₊ = |k|²/μ₋ avoids cancellation in τ + δ.
    const double delta = std::sqrt(d2);
    const double mu_m = tau - delta;
    const double mu_p = kabs * kabs / mu_m;
    const double ep = std::exp(mu_p * t);
    const double em = std::exp(mu_m * t);
    const double inv = 1.0 / (mu_p - mu_m);
    return {inv * (ep * (a00 - mu_m) - em * (a00 - mu_p)), inv * (ep - em) * a01, inv * (ep - em) * a10,
            inv * (ep * (a11 - mu_m) - em * (a11 - mu_p))};
  }
  double ch, shc;  // cosh(δt), sinh(δt)/δ with δ possibly imaginary
  if (d2 >= 0.0) {
    const double delta = std::sqrt(d2);
    const double z = delta * t;
    ch = std::cosh(z);
    shc = z < 1e-3 ? t * (1.0 + z * z / 6.0 + z * z * z * z / 120.0) : std::sinh(z) / delta;
  } else {
    const double omega = std::sqrt(-d2);
    const double z = omega * t;
    ch = std::cos(z);
    shc = z < 1e-3 ? t * (1.0 - z * z / 6.0 + z * z * z * z / 120.0) : std::sin(z) / omega;
  }
  const double e = std::exp(tau * t);
  return {e * (ch + shc * (a00 - tau)), e * shc * a01, e * shc * a10, e * (ch + shc * (a11 - tau))};
}

}  // namespace detail

inline ModeValue linearized_exact_mode(int k1, int k2, std::complex<double> vx0, std::complex<double> vy0,
                                       std::complex<double> theta0, double alpha, double eta, double t) {
  if (k1 == 0 && k2 == 0) throw std::invalid_argument("linearized_exact_mode: k = 0");
  const double kabs = std::hypot(static_cast<double>(k1), static_cast<double>(k2));
  const double c = k1 / kabs, s = k2 / kabs;
  const double lambda = alpha + eta * kabs * kabs;
  const std::complex<double> a0 = c * vx0 + s * vy0;   // potential part
  const std::complex<double> b0 = -s * vx0 + c * vy0;  // solenoidal part
  const auto m = detail::coupled_exponential(lambda, kabs, t);
  const std::complex<double> a = m[0] * a0 + m[1] * theta0;
  const std::complex<double> th = m[2] * a0 + m[3] * theta0;
  const std::complex<double> b = std::exp(-lambda * t) * b0;
  return {c * a - s * b, s * a + c * b, th};
}

/// Exact solution of the linearized system at time t from spectral data at t = 0;
/// u decays as e^{−αt}, the mean of v as e^{−αt}, the mean of θ is constant.
inline SpectralState linearized_propagate(const SpectralState& x0, double alpha, double eta, double t) {
  const GridSpec& g = x0.grid();
  const Wavenumbers& w = wavenumbers(g);
  SpectralState out(g);
  const double du = std::exp(-alpha * t);
  out.u = du * x0.u;
  for (std::size_t i = 0; i < w.ksq.size(); ++i) {
    if (w.ksq[i] == 0.0) {
      out.v.x.coeffs[i] = du * x0.v.x.coeffs[i];
      out.v.y.coeffs[i] = du * x0.v.y.coeffs[i];
      out.theta.coeffs[i] = x0.theta.coeffs[i];
      continue;
    }
    const ModeValue m = linearized_exact_mode(w.k1[i], w.k2[i], x0.v.x.coeffs[i], x0.v.y.coeffs[i], x0.theta.coeffs[i],
                                              alpha, eta, t);
    out.v.x.coeffs[i] = m.vx;
    out.v.y.coeffs[i] = m.vy;
    out.theta.coeffs[i] = m.theta;
  }
  return out;
}

/// Exact linearized trajectory on the retained modes, sampled every `cadence`
/// from x0.t to p.t_end. No time-stepping error: samples do not depend on p.dt.
inline Trajectory linearized_solve(const State& x0, const Params& p, double cadence) {
  p.validate();
  if (!(cadence > 0.0)) throw std::invalid_argument("linearized_solve: cadence must be > 0");
  const SpectralState xs = to_spectral(x0);
  Trajectory tr{p, cadence, {}};
  const long long count = std::llround((p.t_end - x0.t) / cadence);
  for (long long i = 0; i <= std::max(0LL, count); ++i) {
    const double tau = static_cast<double>(i) * cadence;
    tr.samples.push_back(to_physical(linearized_propagate(xs, p.alpha, p.eta, tau), x0.t + tau));
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Snapshots: three TCMF blocks (u, v, θ) then one metadata line.
// ---------------------------------------------------------------------------

struct SnapshotMeta {
  double t = 0.0, alpha = 0.0, eta = 0.0, dt = 0.0;
  int n = 0;
  std::string scheme;
};

inline void write_snapshot(std::ostream& os, const State& x, const Params& p) {
  write_tcmf(os, x.u);
  write_tcmf(os, x.v);
  write_tcmf(os, x.theta);
  char buf[256];
  std::snprintf(buf, sizeof buf, "meta t=%.17g alpha=%.17g eta=%.17g n=%d dt=%.17g scheme=%s\n", x.t, p.alpha, p.eta,
                p.grid.n, p.dt, to_string(p.scheme).c_str());
  os << buf;
}

inline State read_snapshot(std::istream& is, SnapshotMeta* meta = nullptr) {
  State x;
  x.u = read_tcmf_vector(is);
  x.v = read_tcmf_vector(is);
  x.theta = read_tcmf_real(is);
  if (!(x.u.grid() == x.v.grid()) || !(x.u.grid() == x.theta.grid)) throw FormatError("snapshot blocks on different grids");
  std::string line;
  if (!std::getline(is, line) || line.rfind("meta ", 0) != 0) throw FormatError("missing snapshot metadata line");
  SnapshotMeta m;
  std::istringstream ss(line.substr(5));
  std::string tok;
  bool have_t = false;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw FormatError("bad metadata token: " + tok);
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    try {
      if (key == "t") {
        m.t = std::stod(val);
        have_t = true;
      } else if (key == "alpha") {
        m.alpha = std::stod(val);
      } else if (key == "eta") {
        m.eta = std::stod(val);
      } else if (key == "dt") {
        m.dt = std::stod(val);
      } else if (key == "n") {
        m.n = std::stoi(val);
      } else if (key == "scheme") {
        m.scheme = val;
      }
    } catch (const std::exception&) {
      throw FormatError("bad metadata value: " + tok);
    }
  }
  if (!have_t) throw FormatError("snapshot metadata lacks t");
  if (m.n != x.theta.grid.n) throw FormatError("snapshot metadata n disagrees with field blocks");
  x.t = m.t;
  if (meta) *meta = m;
  return x;
}

}  // namespace tcm
