#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "tcm/fft.hpp"

namespace tcm {

// ---------------------------------------------------------------------------
// Fourier multipliers. All act on the stored half-spectrum; a multiplier m(k)
// must satisfy m(-k) = conj(m(k)) so the result stays the transform of a real
// field. Odd symbols (derivatives, Riesz) vanish on the Nyquist lines.
// ---------------------------------------------------------------------------

template <typename Symbol>
SpectralField apply_symbol(const SpectralField& f, Symbol&& symbol) {
  const Wavenumbers& w = wavenumbers(f.grid);
  SpectralField out(f.grid);
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) out.coeffs[i] = symbol(w, i) * f.coeffs[i];
  return out;
}

/// Λ^a: multiplies by |k|^a. The zero mode is kept only for a = 0.
inline SpectralField fractional_laplacian(const SpectralField& f, double a) {
  if (a == 0.0) return f;
  return apply_symbol(f, [a](const Wavenumbers& w, std::size_t i) {
    return w.ksq[i] == 0.0 ? 0.0 : std::pow(w.kabs[i], a);
  });
}

inline SpectralVector fractional_laplacian(const SpectralVector& v, double a) {
  return {fractional_laplacian(v.x, a), fractional_laplacian(v.y, a)};
}

inline RealField fractional_laplacian(const RealField& f, double a) {
  return inverse_transform(fractional_laplacian(forward_transform(f), a));
}

inline SpectralField laplacian(const SpectralField& f) {
  return apply_symbol(f, [](const Wavenumbers& w, std::size_t i) { return -w.ksq[i]; });
}

inline SpectralField partial_x(const SpectralField& f) {
  return apply_symbol(f, [](const Wavenumbers& w, std::size_t i) { return std::complex<double>(0.0, w.kd1[i]); });
}

inline SpectralField partial_y(const SpectralField& f) {
  return apply_symbol(f, [](const Wavenumbers& w, std::size_t i) { return std::complex<double>(0.0, w.kd2[i]); });
}

inline SpectralVector gradient(const SpectralField& f) { return {partial_x(f), partial_y(f)}; }

inline VectorField gradient(const RealField& f) { return inverse_transform(gradient(forward_transform(f))); }

inline SpectralField divergence(const SpectralVector& v) {
  const Wavenumbers& w = wavenumbers(v.grid());
  SpectralField out(v.grid());
  const std::complex<double> I(0.0, 1.0);
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
    out.coeffs[i] = I * (w.kd1[i] * v.x.coeffs[i] + w.kd2[i] * v.y.coeffs[i]);
  }
  return out;
}

inline RealField divergence(const VectorField& v) { return inverse_transform(divergence(forward_transform(v))); }

/// Rotated gradient (-∂₂ψ, ∂₁ψ); always divergence-free.
inline SpectralVector perp_gradient(const SpectralField& psi) { return {-1.0 * partial_y(psi), partial_x(psi)}; }

/// R = Λ⁻¹ div. Zero mode annihilated.
inline SpectralField riesz_div(const SpectralVector& v) {
  const Wavenumbers& w = wavenumbers(v.grid());
  SpectralField out(v.grid());
  const std::complex<double> I(0.0, 1.0);
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
    if (w.ksq[i] == 0.0) continue;
    out.coeffs[i] = I * (w.kd1[i] * v.x.coeffs[i] + w.kd2[i] * v.y.coeffs[i]) / w.kabs[i];
  }
  return out;
}

inline RealField riesz_div(const VectorField& v) { return inverse_transform(riesz_div(forward_transform(v))); }

/// L²-orthogonal projection onto divergence-free fields; the mean is kept.
inline SpectralVector leray_project(const SpectralVector& v) {
  const Wavenumbers& w = wavenumbers(v.grid());
  SpectralVector out(v);
  for (std::size_t i = 0; i < w.kd1.size(); ++i) {
    const double a = w.kd1[i];
    const double b = w.kd2[i];
    const double q = a * a + b * b;
    if (q == 0.0) continue;
    const std::complex<double> proj = (a * v.x.coeffs[i] + b * v.y.coeffs[i]) / q;
    out.x.coeffs[i] -= a * proj;
    out.y.coeffs[i] -= b * proj;
  }
  return out;
}

inline VectorField leray_project(const VectorField& v) { return inverse_transform(leray_project(forward_transform(v))); }

/// 2/3 rule: zero every mode with max(|k₁|,|k₂|) > k_max.
inline SpectralField dealias(const SpectralField& f) {
  const Wavenumbers& w = wavenumbers(f.grid);
  SpectralField out(f);
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
    if (!w.retained[i]) out.coeffs[i] = 0.0;
  }
  return out;
}

inline SpectralVector dealias(const SpectralVector& v) { return {dealias(v.x), dealias(v.y)}; }

inline SpectralField remove_mean(const SpectralField& f) {
  SpectralField out(f);
  out.coeffs[0] = 0.0;
  return out;
}

inline SpectralVector remove_mean(const SpectralVector& v) { return {remove_mean(v.x), remove_mean(v.y)}; }

inline RealField remove_mean(const RealField& f) { return inverse_transform(remove_mean(forward_transform(f))); }

/// Dealiased transform of a pointwise product.
inline SpectralField product(const RealField& a, const RealField& b) { return dealias(forward_transform(hadamard(a, b))); }

/// Dealiased transform of f·∇g given the physical gradient of g.
inline SpectralField advect(const VectorField& f, const VectorField& grad_g) {
  return dealias(forward_transform(dot(f, grad_g)));
}

/// Dealiased (f·∇)w for vector w, given physical f and w in spectral form.
inline SpectralVector advect(const VectorField& f, const SpectralVector& w) {
  return {advect(f, inverse_transform(gradient(w.x))), advect(f, inverse_transform(gradient(w.y)))};
}

// ---------------------------------------------------------------------------
// Norms and inner products. Grid quadrature of the periodic trapezoid rule;
// exact for trigonometric polynomials of degree < n.
// ---------------------------------------------------------------------------

inline double lp_norm(const RealField& f, double p) {
  if (p < 1.0) throw std::invalid_argument("lp_norm requires p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : f.values) m = std::max(m, std::abs(x));
    return m;
  }
  const double cell = f.grid.area() / static_cast<double>(f.grid.size());
  double acc = 0.0;
  if (p == 2.0) {
    for (double x : f.values) acc += x * x;
    return std::sqrt(acc * cell);
  }
  if (p == 1.0) {
    for (double x : f.values) acc += std::abs(x);
    return acc * cell;
  }
  for (double x : f.values) acc += std::pow(std::abs(x), p);
  return std::pow(acc * cell, 1.0 / p);
}

/// L^p norm of the pointwise Euclidean magnitude.
inline double lp_norm(const VectorField& v, double p) {
  RealField mag(v.grid());
  for (std::size_t i = 0; i < mag.values.size(); ++i) mag.values[i] = std::hypot(v.x.values[i], v.y.values[i]);
  return lp_norm(mag, p);
}

/// L^p norm of the pointwise Frobenius norm of ∇v.
inline double gradient_lp_norm(const SpectralVector& v, double p) {
  const VectorField gx = inverse_transform(gradient(v.x));
  const VectorField gy = inverse_transform(gradient(v.y));
  RealField mag(v.grid());
  for (std::size_t i = 0; i < mag.values.size(); ++i) {
    mag.values[i] = std::sqrt(gx.x.values[i] * gx.x.values[i] + gx.y.values[i] * gx.y.values[i] +
                              gy.x.values[i] * gy.x.values[i] + gy.y.values[i] * gy.y.values[i]);
  }
  return lp_norm(mag, p);
}

inline double gradient_lp_norm(const SpectralField& f, double p) { return lp_norm(inverse_transform(gradient(f)), p); }

/// (a|b) = ∫ a b dx.
inline double inner(const RealField& a, const RealField& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) acc += a.values[i] * b.values[i];
  return acc * a.grid.area() / static_cast<double>(a.grid.size());
}

inline double inner(const VectorField& a, const VectorField& b) { return inner(a.x, b.x) + inner(a.y, b.y); }

/// (Λ^s a|Λ^s b) evaluated on coefficients; s = 0 gives the L² pairing.
inline double inner_hs(const SpectralField& a, const SpectralField& b, double s = 0.0) {
  const Wavenumbers& w = wavenumbers(a.grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    double weight = w.weight[i];
    if (s != 0.0) {
      if (w.ksq[i] == 0.0) continue;
      weight *= std::pow(w.ksq[i], s);
    }
    acc += weight * (a.coeffs[i].real() * b.coeffs[i].real() + a.coeffs[i].imag() * b.coeffs[i].imag());
  }
  return acc * a.grid.area();
}

inline double inner_hs(const SpectralVector& a, const SpectralVector& b, double s = 0.0) {
  return inner_hs(a.x, b.x, s) + inner_hs(a.y, b.y, s);
}

/// ‖Λ^s f‖²_{L²} from coefficients (Parseval).
inline double hs_seminorm_sq(const SpectralField& f, double s = 0.0) { return inner_hs(f, f, s); }
inline double hs_seminorm_sq(const SpectralVector& f, double s = 0.0) { return inner_hs(f, f, s); }

/// Largest |c_k| over modes with |k|² outside [lo², hi²] relative to the largest overall.
inline double spectral_leakage(const SpectralField& f, double lo, double hi) {
  const Wavenumbers& w = wavenumbers(f.grid);
  double outside = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
    const double a = std::abs(f.coeffs[i]);
    total = std::max(total, a);
    if (w.kabs[i] < lo || w.kabs[i] > hi) outside = std::max(outside, a);
  }
  return total == 0.0 ? 0.0 : outside / total;
}

// ---------------------------------------------------------------------------
// Corpus generation.
// ---------------------------------------------------------------------------

/// Mean-zero random field with i.i.d. complex Gaussian coefficients scaled by |k|^slope
/// on k_lo <= |k| <= k_hi. The draw order depends only on the band, so the same seed
/// gives the same trigonometric polynomial on every grid that resolves the band.
inline RealField random_band_field(const GridSpec& g, std::uint64_t seed, double slope, int k_lo, int k_hi) {
  if (k_lo < 1 || k_hi < k_lo || k_hi > g.k_max()) {
    throw std::invalid_argument("random_band_field: need 1 <= k_lo <= k_hi <= k_max");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField f(g);
  const int lo2 = k_lo * k_lo;
  const int hi2 = k_hi * k_hi;
  for (int k2 = -k_hi; k2 <= k_hi; ++k2) {
    for (int k1 = 0; k1 <= k_hi; ++k1) {
      if (k1 == 0 && k2 <= 0) continue;
      const int r2 = k1 * k1 + k2 * k2;
      if (r2 < lo2 || r2 > hi2) continue;
      const double re = normal(rng);
      const double im = normal(rng);
      const double amp = std::pow(std::sqrt(static_cast<double>(r2)), slope) / std::sqrt(2.0);
      f.set_mode(k1, k2, amp * std::complex<double>(re, im));
    }
  }
  return inverse_transform(f);
}

}  // namespace tcm
