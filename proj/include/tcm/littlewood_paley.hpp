#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tcm/audit.hpp"
#include "tcm/spectral.hpp"

namespace tcm {

/// Radial cutoffs of the Littlewood–Paley decomposition.
///
/// chi is 1 on [0, 3/4], 0 on [1, ∞), glued by the smooth step built from
/// exp(-1/t). phi(r) = chi(r/2) - chi(r) is supported in [3/4, 2], so
/// chi(r) + Σ_{j=0}^{J} phi(2^{-j} r) telescopes to chi(2^{-J-1} r).
/// Because chi(r) = 0 for r >= 1, phi(2^{-j}|k|) vanishes for j < 0 on every
/// nonzero lattice vector and the homogeneous sum on the torus starts at j = 0.
struct DyadicCutoffs {
  static constexpr double kInner = 0.75;
  static constexpr double kOuter = 1.0;
  // Nominal supports: ball |ξ| <= 4/3, annulus 3/4 <= |ξ| <= 8/3.
  static constexpr double kBallRadius = 4.0 / 3.0;
  static constexpr double kAnnulusLo = 0.75;
  static constexpr double kAnnulusHi = 8.0 / 3.0;

  int j_min = 0;
  int j_max = 0;

  static double chi(double r) {
    if (r <= kInner) return 1.0;
    if (r >= kOuter) return 0.0;
    const double t = (kOuter - r) / (kOuter - kInner);
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
  }

  static double phi(double r) { return chi(0.5 * r) - chi(r); }

  /// Last block index used by norms; covers every mode representable on the grid.
  [[nodiscard]] int j_top() const { return j_max + 1; }
};

inline DyadicCutoffs build_cutoffs(const GridSpec& g) {
  if (g.n < 16) throw std::invalid_argument("grid too small to host one full dyadic annulus");
  DyadicCutoffs c;
  c.j_min = 0;
  int j = 0;
  while (DyadicCutoffs::kAnnulusLo * std::ldexp(1.0, j + 1) <= g.k_max()) ++j;
  c.j_max = j;
  return c;
}

struct BesovIndex {
  double s = 0.0;
  double p = 2.0;
  double q = 2.0;
  bool homogeneous = true;

  void validate() const {
    if (!(p >= 1.0) || !(q >= 1.0)) throw std::invalid_argument("Besov index needs p, q >= 1");
  }
};

/// Δ_j f = φ(2^{-j}D) f. Blocks outside [j_min - 1, j_max + 1] are zero.
inline SpectralField delta_j(const SpectralField& f, int j, const DyadicCutoffs& cut) {
  if (j < cut.j_min - 1 || j > cut.j_max + 1) return SpectralField(f.grid);
  const double scale = std::ldexp(1.0, -j);
  return apply_symbol(f, [scale](const Wavenumbers& w, std::size_t i) { return DyadicCutoffs::phi(scale * w.kabs[i]); });
}

/// S_j f = χ(2^{-j}D) f.
inline SpectralField s_j(const SpectralField& f, int j) {
  const double scale = std::ldexp(1.0, -j);
  return apply_symbol(f, [scale](const Wavenumbers& w, std::size_t i) { return DyadicCutoffs::chi(scale * w.kabs[i]); });
}

inline SpectralVector delta_j(const SpectralVector& v, int j, const DyadicCutoffs& cut) {
  return {delta_j(v.x, j, cut), delta_j(v.y, j, cut)};
}

inline SpectralVector s_j(const SpectralVector& v, int j) { return {s_j(v.x, j), s_j(v.y, j)}; }

inline RealField delta_j(const RealField& f, int j, const DyadicCutoffs& cut) {
  return inverse_transform(delta_j(forward_transform(f), j, cut));
}

inline RealField s_j(const RealField& f, int j) { return inverse_transform(s_j(forward_transform(f), j)); }

namespace detail {

template <typename BlockNorm>
double besov_sum(const BesovIndex& idx, const DyadicCutoffs& cut, BlockNorm&& block_norm) {
  idx.validate();
  double acc = 0.0;
  for (int j = cut.j_min; j <= cut.j_top(); ++j) {
    const double b = std::pow(2.0, idx.s * j) * block_norm(j);
    if (std::isinf(idx.q)) {
      acc = std::max(acc, b);
    } else {
      acc += std::pow(b, idx.q);
    }
  }
  return std::isinf(idx.q) ? acc : std::pow(acc, 1.0 / idx.q);
}

}  // namespace detail

/// ‖f‖_{Ḃ^s_{p,q}} = (Σ_j 2^{sqj} ‖Δ_j f‖^q_{L^p})^{1/q}; inhomogeneous adds ‖f‖_{L^p}.
inline double besov_norm(const SpectralField& f, const BesovIndex& idx, const DyadicCutoffs& cut) {
  double hom = detail::besov_sum(idx, cut, [&](int j) { return lp_norm(inverse_transform(delta_j(f, j, cut)), idx.p); });
  if (idx.homogeneous) return hom;
  return lp_norm(inverse_transform(f), idx.p) + hom;
}

inline double besov_norm(const SpectralVector& f, const BesovIndex& idx, const DyadicCutoffs& cut) {
  double hom = detail::besov_sum(idx, cut, [&](int j) { return lp_norm(inverse_transform(delta_j(f, j, cut)), idx.p); });
  if (idx.homogeneous) return hom;
  return lp_norm(inverse_transform(f), idx.p) + hom;
}

inline double besov_norm(const RealField& f, const BesovIndex& idx, const DyadicCutoffs& cut) {
  return besov_norm(forward_transform(f), idx, cut);
}

inline double besov_norm(const VectorField& f, const BesovIndex& idx, const DyadicCutoffs& cut) {
  return besov_norm(forward_transform(f), idx, cut);
}

/// ‖f‖_{Ḣ^s} = ‖Λ^s f‖_{L²};  ‖f‖_{H^s} = ‖f‖_{L²} + ‖Λ^s f‖_{L²}.
inline double sobolev_norm(const SpectralField& f, double s, bool homogeneous) {
  const double hom = std::sqrt(hs_seminorm_sq(f, s));
  if (homogeneous) return hom;
  return std::sqrt(hs_seminorm_sq(f, 0.0)) + hom;
}

inline double sobolev_norm(const SpectralVector& f, double s, bool homogeneous) {
  const double hom = std::sqrt(hs_seminorm_sq(f, s));
  if (homogeneous) return hom;
  return std::sqrt(hs_seminorm_sq(f, 0.0)) + hom;
}

inline double sobolev_norm(const RealField& f, double s, bool homogeneous) {
  return sobolev_norm(forward_transform(f), s, homogeneous);
}

/// Audits ‖(-Δ)^γ f‖_{L^q} against 2^{2γj + 2j(1/p - 1/q)} ‖f‖_{L^p} for a frequency-localized f.
/// Annulus-supported f (as produced by delta_j) also gets the lower-bound ratio
/// 2^{2γj}‖f‖_{L^q} / ‖(-Δ)^γ f‖_{L^q}; ball-supported f (s_j) gets the upper ratio only.
inline AuditRecord bernstein_audit(const RealField& f, int j, double gamma, double p, double q) {
  if (gamma < 0.0) throw std::invalid_argument("bernstein_audit: gamma must be >= 0");
  if (!(p >= 1.0) || !(q >= p)) throw std::invalid_argument("bernstein_audit: need 1 <= p <= q");
  constexpr double kLeakTol = 1e-9;
  const SpectralField fh = forward_transform(f);
  const double two_j = std::ldexp(1.0, j);
  const bool annulus = spectral_leakage(fh, DyadicCutoffs::kAnnulusLo * two_j, DyadicCutoffs::kAnnulusHi * two_j) <= kLeakTol;
  const bool ball = spectral_leakage(fh, 0.0, DyadicCutoffs::kBallRadius * two_j) <= kLeakTol;
  if (!annulus && !ball) throw std::invalid_argument("bernstein_audit: input is not frequency-localized at block j");

  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  const double lhs = lp_norm(inverse_transform(fractional_laplacian(fh, 2.0 * gamma)), q);
  const double f_p = lp_norm(f, p);
  const double f_q = lp_norm(f, q);
  const double scale_up = std::pow(2.0, 2.0 * gamma * j + 2.0 * j * (inv_p - inv_q));

  AuditRecord rec;
  rec.estimate = "bernstein";
  rec.n = f.grid.n;
  rec.params = {{"j", static_cast<double>(j)}, {"gamma", gamma}, {"p", p}, {"q", q}};
  rec.lhs = lhs;
  rec.factors = {{"f_lp", f_p}, {"f_lq", f_q}};
  rec.rhs = scale_up * f_p;
  rec.ratio = audit_ratio(lhs, rec.rhs);
  rec.regime = annulus ? "annulus" : "ball";
  if (annulus) rec.ratio_lower = audit_ratio(std::pow(2.0, 2.0 * gamma * j) * f_q, lhs);
  return rec;
}

}  // namespace tcm
