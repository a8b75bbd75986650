#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcm/audit.hpp"
#include "tcm/littlewood_paley.hpp"
#include "tcm/spectral.hpp"

namespace tcm {

// Every commutator [A, B] below pairs a Fourier multiplier A with multiplication
// (or advection) by a field a. The mean of a commutes with A, so it is split off
// first: constant first arguments give exactly the zero field. Inputs are
// projected onto the retained (2/3-rule) modes so every product is alias-free.

namespace detail {

inline double inv_exponent(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

inline void require_exponents(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("exponent mismatch: ") + what);
}

inline bool same_exponent(double a, double b) { return std::abs(a - b) <= 1e-12; }

}  // namespace detail

/// A·(f·∇g) − f·∇(A g) for any multiplier A; f given as mean-free physical field.
template <typename Multiplier>
SpectralField advective_commutator(const VectorField& f_meanfree, const SpectralField& g, Multiplier&& A) {
  SpectralField first = A(advect(f_meanfree, inverse_transform(gradient(g))));
  const SpectralField second = advect(f_meanfree, inverse_transform(gradient(A(g))));
  return first -= second;
}

/// Componentwise version for vector g.
template <typename Multiplier>
SpectralVector advective_commutator(const VectorField& f_meanfree, const SpectralVector& g, Multiplier&& A) {
  return {advective_commutator(f_meanfree, g.x, A), advective_commutator(f_meanfree, g.y, A)};
}

/// Physical mean-free, dealiased version of a vector field given by coefficients.
inline VectorField meanfree_physical(const SpectralVector& f) { return inverse_transform(remove_mean(dealias(f))); }
inline RealField meanfree_physical(const SpectralField& f) { return inverse_transform(remove_mean(dealias(f))); }

/// Throws unless ‖div f‖_∞ <= 1e-10·max(1, ‖∇f‖_∞).
inline void require_solenoidal(const SpectralVector& f) {
  const double div = lp_norm(inverse_transform(divergence(f)), INFINITY);
  const double scale = std::max(1.0, gradient_lp_norm(f, INFINITY));
  if (div > 1e-10 * scale) throw std::invalid_argument("advecting field is not divergence-free");
}

// ---------------------------------------------------------------------------
// Generalized commutator [Λ^s, f·∇]g with div f = 0.
// ---------------------------------------------------------------------------

inline SpectralField adv_commutator(const SpectralVector& f, const SpectralField& g, double s) {
  require_solenoidal(f);
  return advective_commutator(meanfree_physical(f), dealias(g),
                              [s](const SpectralField& x) { return fractional_laplacian(x, s); });
}

inline RealField adv_commutator(const VectorField& f, const RealField& g, double s) {
  return inverse_transform(adv_commutator(forward_transform(f), forward_transform(g), s));
}

/// ‖[Λ^s, f·∇]g‖_{Ḃ^σ_{p,r}} against ‖∇f‖_∞‖g‖_{Ḃ^{σ+s}_{p,r}} + ‖∇g‖_∞‖f‖_{Ḃ^{σ+s}_{p,r}}.
/// Hypotheses s >= 0, σ > -1 are enforced unless `enforce_hypotheses` is false; the
/// regime string records both gates (σ > -1 and s + σ > -1).
inline AuditRecord prop27_audit(const VectorField& f, const RealField& g, double s, double sigma, double p, double r,
                                std::uint64_t seed = 0, bool enforce_hypotheses = true) {
  const bool sigma_ok = sigma > -1.0;
  const bool sum_ok = s + sigma > -1.0;
  if (enforce_hypotheses && (s < 0.0 || !sigma_ok)) {
    throw std::invalid_argument("prop27_audit: requires s >= 0 and sigma > -1");
  }
  const GridSpec& grid = g.grid;
  const DyadicCutoffs cut = build_cutoffs(grid);
  const SpectralVector fh = dealias(forward_transform(f));
  const SpectralField gh = dealias(forward_transform(g));
  const SpectralField comm = adv_commutator(fh, gh, s);

  const BesovIndex lhs_idx{sigma, p, r, true};
  const BesovIndex rhs_idx{sigma + s, p, r, true};
  const double lhs = besov_norm(comm, lhs_idx, cut);
  const double grad_f = gradient_lp_norm(fh, INFINITY);
  const double g_b = besov_norm(gh, rhs_idx, cut);
  const double grad_g = gradient_lp_norm(gh, INFINITY);
  const double f_b = besov_norm(remove_mean(fh), rhs_idx, cut);

  AuditRecord rec;
  rec.estimate = "prop27";
  rec.seed = seed;
  rec.n = grid.n;
  rec.params = {{"s", s}, {"sigma", sigma}, {"p", p}, {"r", r}};
  rec.lhs = lhs;
  rec.factors = {{"grad_f_linf", grad_f}, {"g_besov", g_b}, {"grad_g_linf", grad_g}, {"f_besov", f_b}};
  rec.rhs = grad_f * g_b + grad_g * f_b;
  rec.ratio = audit_ratio(lhs, rec.rhs);
  rec.regime = std::string(sigma_ok ? "sigma>-1" : "sigma<=-1") + ";" + (sum_ok ? "s+sigma>-1" : "s+sigma<=-1");
  return rec;
}

// ---------------------------------------------------------------------------
// Bony splits of the two block commutators.
//   K1 block: [Δ_j, f·∇]Λ^s g        K2 block: [Δ_jΛ^s, f·∇]g
// ---------------------------------------------------------------------------

enum class BonyWhich { K1, K2 };

struct BonyTerm {
  std::string name;
  RealField field;
  double lp = 0.0;
};

struct BonySplit {
  BonyWhich which = BonyWhich::K1;
  int j = 0;
  double p = 2.0;
  std::array<BonyTerm, 4> terms;
  RealField direct;  // block commutator computed without the split

  [[nodiscard]] RealField recombined() const {
    RealField sum = terms[0].field;
    for (int i = 1; i < 4; ++i) sum += terms[i].field;
    return sum;
  }

  /// ‖Σ terms − direct‖_{L²} / ‖direct‖_{L²}.
  [[nodiscard]] double recombination_error() const {
    const double d = lp_norm(direct, 2.0);
    const double e = lp_norm(recombined() - direct, 2.0);
    return audit_ratio(e, d);
  }
};

/// Splits the K1 (resp. K2) block commutator at dyadic index j into the four
/// low-high / high-low / remainder groups:
///   T1 = Σ_{|k-j|<=4} [A, S_{k-1}f·∇]Δ_k G
///   T2 = Σ_{|k-j|<=4} A(Δ_k f·∇S_{k-1}G)
///   T3 = −Σ_{k>=j-2} Δ_k f·∇ A S_{k+2}G
///   T4 = Σ_{k>=j-3} A(Δ_k f·∇Δ̃_k G)
/// with A = Δ_j, G = Λ^s g for K1 and A = Δ_jΛ^s, G = g for K2. The index ranges
/// are the support restrictions; blocks outside them vanish identically.
inline BonySplit bony_split(const VectorField& f, const RealField& g, double s, int j, BonyWhich which, double p = 2.0) {
  const GridSpec& grid = g.grid;
  const DyadicCutoffs cut = build_cutoffs(grid);
  const SpectralVector fh = remove_mean(dealias(forward_transform(f)));
  require_solenoidal(fh);
  const SpectralField gh = dealias(forward_transform(g));
  const SpectralField G = (which == BonyWhich::K1) ? fractional_laplacian(gh, s) : gh;
  auto A = [&](const SpectralField& x) {
    SpectralField y = delta_j(x, j, cut);
    return which == BonyWhich::K2 ? fractional_laplacian(y, s) : y;
  };

  const int top = cut.j_top();
  auto f_block = [&](int k) { return inverse_transform(delta_j(fh, k, cut)); };
  auto f_low = [&](int k) { return inverse_transform(s_j(fh, k - 1)); };
  auto grad = [](const SpectralField& x) { return inverse_transform(gradient(x)); };

  SpectralField t1(grid), t2(grid), t3(grid), t4(grid);
  for (int k = std::max(j - 4, 0); k <= std::min(j + 4, top); ++k) {
    const VectorField low = f_low(k);
    const SpectralField Gk = delta_j(G, k, cut);
    t1 += A(advect(low, grad(Gk)));
    t1 -= advect(low, grad(A(Gk)));
    t2 += A(advect(f_block(k), grad(s_j(G, k - 1))));
  }
  for (int k = std::max(j - 2, 0); k <= top; ++k) {
    t3 -= advect(f_block(k), grad(A(s_j(G, k + 2))));
  }
  for (int k = std::max(j - 3, 0); k <= top; ++k) {
    SpectralField wide = delta_j(G, k - 1, cut);
    wide += delta_j(G, k, cut);
    wide += delta_j(G, k + 1, cut);
    t4 += A(advect(f_block(k), grad(wide)));
  }

  const VectorField f_phys = inverse_transform(fh);
  SpectralField direct = A(advect(f_phys, grad(G)));
  direct -= advect(f_phys, grad(A(G)));

  BonySplit out;
  out.which = which;
  out.j = j;
  out.p = p;
  const char* prefix = which == BonyWhich::K1 ? "K1" : "K2";
  const std::array<SpectralField*, 4> parts{&t1, &t2, &t3, &t4};
  for (int i = 0; i < 4; ++i) {
    out.terms[i].name = std::string(prefix) + std::to_string(i + 1);
    out.terms[i].field = inverse_transform(*parts[i]);
    out.terms[i].lp = lp_norm(out.terms[i].field, p);
  }
  out.direct = inverse_transform(direct);
  return out;
}

// ---------------------------------------------------------------------------
// Kato–Ponce commutator [Λ^s, f]g and the product estimate.
// ---------------------------------------------------------------------------

inline SpectralField kato_ponce_commutator(const SpectralField& f, const SpectralField& g, double s) {
  const RealField ft = meanfree_physical(f);
  const SpectralField gd = dealias(g);
  SpectralField first = fractional_laplacian(product(ft, inverse_transform(gd)), s);
  first -= product(ft, inverse_transform(fractional_laplacian(gd, s)));
  return first;
}

inline RealField kato_ponce_commutator(const RealField& f, const RealField& g, double s) {
  return inverse_transform(kato_ponce_commutator(forward_transform(f), forward_transform(g), s));
}

/// ‖[Λ^s, f]g‖_{L^p} against ‖∇f‖_{L^{p1}}‖Λ^{s-1}g‖_{L^{p2}} + ‖Λ^s f‖_{L^{p3}}‖g‖_{L^{p4}}.
inline AuditRecord kp_audit(const RealField& f, const RealField& g, double s, double p, double p1, double p2, double p3,
                            double p4, std::uint64_t seed = 0) {
  using detail::inv_exponent;
  if (!(s > 0.0)) throw std::invalid_argument("kp_audit: requires s > 0");
  detail::require_exponents(detail::same_exponent(inv_exponent(p), inv_exponent(p1) + inv_exponent(p2)) &&
                                detail::same_exponent(inv_exponent(p), inv_exponent(p3) + inv_exponent(p4)),
                            "1/p = 1/p1 + 1/p2 = 1/p3 + 1/p4");
  const SpectralField fh = dealias(forward_transform(f));
  const SpectralField gh = dealias(forward_transform(g));
  const double lhs = lp_norm(inverse_transform(kato_ponce_commutator(fh, gh, s)), p);
  const double a = gradient_lp_norm(fh, p1);
  const double b = lp_norm(inverse_transform(fractional_laplacian(gh, s - 1.0)), p2);
  const double c = lp_norm(inverse_transform(fractional_laplacian(fh, s)), p3);
  const double d = lp_norm(inverse_transform(gh), p4);

  AuditRecord rec;
  rec.estimate = "kato_ponce";
  rec.seed = seed;
  rec.n = g.grid.n;
  rec.params = {{"s", s}, {"p", p}, {"p1", p1}, {"p2", p2}, {"p3", p3}, {"p4", p4}};
  rec.lhs = lhs;
  rec.factors = {{"grad_f_lp1", a}, {"lambda_s1_g_lp2", b}, {"lambda_s_f_lp3", c}, {"g_lp4", d}};
  rec.rhs = a * b + c * d;
  rec.ratio = audit_ratio(lhs, rec.rhs);
  return rec;
}

/// ‖fg‖_{Ḃ^s_{p,r}} against ‖f‖_{L^{p1}}‖g‖_{Ḃ^s_{p2,r}} + ‖g‖_{L^{r1}}‖f‖_{Ḃ^s_{r2,r}}.
inline AuditRecord product_audit(const RealField& f, const RealField& g, double s, double p, double r, double p1, double p2,
                                 double r1, double r2, std::uint64_t seed = 0) {
  using detail::inv_exponent;
  detail::require_exponents(detail::same_exponent(inv_exponent(p), inv_exponent(p1) + inv_exponent(p2)) &&
                                detail::same_exponent(inv_exponent(p), inv_exponent(r1) + inv_exponent(r2)),
                            "1/p = 1/p1 + 1/p2 = 1/r1 + 1/r2");
  const DyadicCutoffs cut = build_cutoffs(g.grid);
  const SpectralField fh = dealias(forward_transform(f));
  const SpectralField gh = dealias(forward_transform(g));
  const RealField fp = inverse_transform(fh);
  const RealField gp = inverse_transform(gh);
  const double lhs = besov_norm(product(fp, gp), BesovIndex{s, p, r, true}, cut);
  const double a = lp_norm(fp, p1);
  const double b = besov_norm(gh, BesovIndex{s, p2, r, true}, cut);
  const double c = lp_norm(gp, r1);
  const double d = besov_norm(fh, BesovIndex{s, r2, r, true}, cut);

  AuditRecord rec;
  rec.estimate = "product";
  rec.seed = seed;
  rec.n = g.grid.n;
  rec.params = {{"s", s}, {"p", p}, {"r", r}, {"p1", p1}, {"p2", p2}, {"r1", r1}, {"r2", r2}};
  rec.lhs = lhs;
  rec.factors = {{"f_lp1", a}, {"g_besov_p2", b}, {"g_lr1", c}, {"f_besov_r2", d}};
  rec.rhs = a * b + c * d;
  rec.ratio = audit_ratio(lhs, rec.rhs);
  return rec;
}

// ---------------------------------------------------------------------------
// Mollifier commutator [θ(λ⁻¹D), a]b.
// ---------------------------------------------------------------------------

enum class MollifierProfile { Chi, Phi };

inline SpectralField mollify(const SpectralField& x, double lam, MollifierProfile profile) {
  const double inv = 1.0 / lam;
  return apply_symbol(x, [inv, profile](const Wavenumbers& w, std::size_t i) {
    const double r = inv * w.kabs[i];
    return profile == MollifierProfile::Chi ? DyadicCutoffs::chi(r) : DyadicCutoffs::phi(r);
  });
}

inline SpectralField mollifier_commutator(const SpectralField& a, const SpectralField& b, double lam, MollifierProfile profile) {
  if (!(lam > 0.0)) throw std::invalid_argument("mollifier_commutator: lambda must be positive");
  const RealField at = meanfree_physical(a);
  const SpectralField bd = dealias(b);
  SpectralField first = mollify(product(at, inverse_transform(bd)), lam, profile);
  first -= product(at, inverse_transform(mollify(bd, lam, profile)));
  return first;
}

inline RealField mollifier_commutator(const RealField& a, const RealField& b, double lam, MollifierProfile profile) {
  return inverse_transform(mollifier_commutator(forward_transform(a), forward_transform(b), lam, profile));
}

/// ratio = λ‖[θ(λ⁻¹D), a]b‖_{L^r} / (‖∇a‖_{L^p}‖b‖_{L^q}), 1/p + 1/q = 1/r.
inline AuditRecord mollifier_audit(const RealField& a, const RealField& b, double lam, MollifierProfile profile, double p,
                                   double q, double r, std::uint64_t seed = 0) {
  using detail::inv_exponent;
  detail::require_exponents(detail::same_exponent(inv_exponent(r), inv_exponent(p) + inv_exponent(q)), "1/p + 1/q = 1/r");
  const SpectralField ah = dealias(forward_transform(a));
  const SpectralField bh = dealias(forward_transform(b));
  const double lhs = lp_norm(inverse_transform(mollifier_commutator(ah, bh, lam, profile)), r);
  const double ga = gradient_lp_norm(ah, p);
  const double bq = lp_norm(inverse_transform(bh), q);

  AuditRecord rec;
  rec.estimate = "mollifier";
  rec.seed = seed;
  rec.n = a.grid.n;
  rec.params = {{"lambda", lam}, {"p", p}, {"q", q}, {"r", r},
                {"profile", profile == MollifierProfile::Chi ? 0.0 : 1.0}};
  rec.lhs = lhs;
  rec.factors = {{"grad_a_lp", ga}, {"b_lq", bq}};
  rec.rhs = ga * bq / lam;
  rec.ratio = audit_ratio(lhs, rec.rhs);
  return rec;
}

// ---------------------------------------------------------------------------
// Convolution commutator h⋆(fg) − f(h⋆g), periodic convolution.
// ---------------------------------------------------------------------------

/// Multiplier of w ↦ h⋆w: (2π)² ĥ(k).
inline SpectralField convolve(const SpectralField& h, const SpectralField& w) {
  SpectralField out(w.grid);
  const double area = w.grid.area();
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] = area * h.coeffs[i] * w.coeffs[i];
  return out;
}

inline RealField convolution_commutator(const RealField& hker, const RealField& f, const RealField& g) {
  const SpectralField hh = forward_transform(hker);
  const RealField ft = meanfree_physical(forward_transform(f));
  const SpectralField gd = dealias(forward_transform(g));
  SpectralField first = convolve(hh, product(ft, inverse_transform(gd)));
  first -= product(ft, inverse_transform(convolve(hh, gd)));
  return inverse_transform(first);
}

/// ‖x h‖_{L^{p1}} with x the nearest-image signed coordinate in (−π, π]².
inline double moment_norm(const RealField& h, double p1) {
  const GridSpec& g = h.grid;
  const double dx = g.spacing();
  RealField m(g);
  for (int i2 = 0; i2 < g.n; ++i2) {
    double y = dx * i2;
    if (y > M_PI) y -= kTwoPi;
    for (int i1 = 0; i1 < g.n; ++i1) {
      double x = dx * i1;
      if (x > M_PI) x -= kTwoPi;
      m.at(i1, i2) = std::hypot(x, y) * std::abs(h.at(i1, i2));
    }
  }
  return lp_norm(m, p1);
}

/// Kernel of Δ_j as a periodic convolution: h = (2π)^{-2} Σ_k φ(2^{-j}|k|) e^{ik·x}.
inline RealField dyadic_kernel(const GridSpec& g, int j) {
  SpectralField h(g);
  const Wavenumbers& w = wavenumbers(g);
  const double scale = std::ldexp(1.0, -j);
  for (std::size_t i = 0; i < h.coeffs.size(); ++i) h.coeffs[i] = DyadicCutoffs::phi(scale * w.kabs[i]) / g.area();
  return inverse_transform(h);
}

/// Discrete unit mass at the origin; h⋆ is then the identity.
inline RealField dirac_kernel(const GridSpec& g) {
  RealField h(g);
  h.at(0, 0) = static_cast<double>(g.size()) / g.area();
  return h;
}

/// ‖h⋆(fg) − f(h⋆g)‖_{L^p} against ‖xh‖_{L^{p1}}‖∇f‖_∞‖g‖_{L^{p2}}, 1 + 1/p = 1/p1 + 1/p2.
inline AuditRecord conv_audit(const RealField& hker, const RealField& f, const RealField& g, double p, double p1, double p2,
                              std::uint64_t seed = 0) {
  using detail::inv_exponent;
  detail::require_exponents(detail::same_exponent(1.0 + inv_exponent(p), inv_exponent(p1) + inv_exponent(p2)),
                            "1 + 1/p = 1/p1 + 1/p2");
  const double lhs = lp_norm(convolution_commutator(hker, f, g), p);
  const double xh = moment_norm(hker, p1);
  const double gf = gradient_lp_norm(dealias(forward_transform(f)), INFINITY);
  const double gl = lp_norm(inverse_transform(dealias(forward_transform(g))), p2);

  AuditRecord rec;
  rec.estimate = "convolution";
  rec.seed = seed;
  rec.n = g.grid.n;
  rec.params = {{"p", p}, {"p1", p1}, {"p2", p2}};
  rec.lhs = lhs;
  rec.factors = {{"xh_lp1", xh}, {"grad_f_linf", gf}, {"g_lp2", gl}};
  rec.rhs = xh * gf * gl;
  rec.ratio = audit_ratio(lhs, rec.rhs);
  return rec;
}

// ---------------------------------------------------------------------------
// Riesz advection commutator [R, u·∇]v = R(u·∇v) − u·∇(Rv).
// ---------------------------------------------------------------------------

inline SpectralField riesz_adv_commutator_unchecked(const VectorField& u_meanfree, const SpectralVector& v) {
  SpectralField first = riesz_div(advect(u_meanfree, v));
  first -= advect(u_meanfree, inverse_transform(gradient(riesz_div(v))));
  return first;
}

inline SpectralField riesz_adv_commutator(const SpectralVector& u, const SpectralVector& v) {
  require_solenoidal(u);
  return riesz_adv_commutator_unchecked(meanfree_physical(u), dealias(v));
}

inline RealField riesz_adv_commutator(const VectorField& u, const VectorField& v) {
  return inverse_transform(riesz_adv_commutator(forward_transform(u), forward_transform(v)));
}

/// ‖[R, u·∇]v‖_{L²} against ‖u‖_∞‖∇v‖_{L²}.
inline AuditRecord riesz_audit(const VectorField& u, const VectorField& v, std::uint64_t seed = 0) {
  const SpectralVector uh = dealias(forward_transform(u));
  const SpectralVector vh = dealias(forward_transform(v));
  const double lhs = lp_norm(inverse_transform(riesz_adv_commutator(uh, vh)), 2.0);
  const double ul = lp_norm(inverse_transform(uh), INFINITY);
  const double gv = std::sqrt(hs_seminorm_sq(vh, 1.0));

  AuditRecord rec;
  rec.estimate = "riesz";
  rec.seed = seed;
  rec.n = u.grid().n;
  rec.lhs = lhs;
  rec.factors = {{"u_linf", ul}, {"grad_v_l2", gv}};
  rec.rhs = ul * gv;
  rec.ratio = audit_ratio(lhs, rec.rhs);
  return rec;
}

// ---------------------------------------------------------------------------
// Seeded audit corpus.
// ---------------------------------------------------------------------------

struct CorpusBand {
  double slope = -1.5;
  int k_lo = 1;
  int k_hi = 16;
};

/// Leray-projected random vector field; identical trigonometric polynomial on every resolving grid.
inline VectorField corpus_solenoidal(const GridSpec& g, std::uint64_t seed, const CorpusBand& band) {
  VectorField w(random_band_field(g, 4 * seed + 1, band.slope, band.k_lo, band.k_hi),
                random_band_field(g, 4 * seed + 2, band.slope, band.k_lo, band.k_hi));
  return inverse_transform(leray_project(forward_transform(w)));
}

inline RealField corpus_scalar(const GridSpec& g, std::uint64_t seed, const CorpusBand& band, int slot = 0) {
  return random_band_field(g, 4 * seed + 3 + 1000003ull * static_cast<std::uint64_t>(slot), band.slope, band.k_lo, band.k_hi);
}

}  // namespace tcm
