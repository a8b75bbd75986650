#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include "tcm/grid.hpp"

namespace tcm {

/// Real samples of a scalar field on the periodic grid.
struct RealField {
  GridSpec grid;
  RealBuffer values;

  RealField() = default;
  explicit RealField(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}

  /// Samples fn(x₁, x₂) at the grid nodes.
  static RealField sample(const GridSpec& g, const std::function<double(double, double)>& fn) {
    RealField f(g);
    const double h = g.spacing();
    for (int i2 = 0; i2 < g.n; ++i2) {
      for (int i1 = 0; i1 < g.n; ++i1) {
        f.values[static_cast<std::size_t>(i2) * g.n + i1] = fn(h * i1, h * i2);
      }
    }
    return f;
  }

  static RealField constant(const GridSpec& g, double c) {
    RealField f(g);
    std::fill(f.values.begin(), f.values.end(), c);
    return f;
  }

  [[nodiscard]] double& at(int i1, int i2) { return values[static_cast<std::size_t>(i2) * grid.n + i1]; }
  [[nodiscard]] double at(int i1, int i2) const { return values[static_cast<std::size_t>(i2) * grid.n + i1]; }

  [[nodiscard]] bool finite() const {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
  }

  RealField& operator+=(const RealField& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  RealField& operator-=(const RealField& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  RealField& operator*=(double c) {
    for (double& x : values) x *= c;
    return *this;
  }
};

inline RealField operator+(RealField a, const RealField& b) { return a += b; }
inline RealField operator-(RealField a, const RealField& b) { return a -= b; }
inline RealField operator*(double c, RealField a) { return a *= c; }
inline RealField operator*(RealField a, double c) { return a *= c; }

/// Pointwise product.
inline RealField hadamard(const RealField& a, const RealField& b) {
  RealField r(a.grid);
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] * b.values[i];
  return r;
}

/// Two-component field; both components share one grid.
struct VectorField {
  RealField x;
  RealField y;

  VectorField() = default;
  explicit VectorField(const GridSpec& g) : x(g), y(g) {}
  VectorField(RealField a, RealField b) : x(std::move(a)), y(std::move(b)) {
    if (!(x.grid == y.grid)) throw std::invalid_argument("vector components must share one grid");
  }

  [[nodiscard]] const GridSpec& grid() const { return x.grid; }
  [[nodiscard]] bool finite() const { return x.finite() && y.finite(); }

  VectorField& operator+=(const VectorField& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  VectorField& operator*=(double c) {
    x *= c;
    y *= c;
    return *this;
  }
};

inline VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
inline VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
inline VectorField operator*(double c, VectorField a) { return a *= c; }

/// a·b pointwise.
inline RealField dot(const VectorField& a, const VectorField& b) {
  RealField r(a.grid());
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    r.values[i] = a.x.values[i] * b.x.values[i] + a.y.values[i] * b.y.values[i];
  }
  return r;
}

/// Fourier coefficients of a real field, f(x) = Σ_k c_k e^{ik·x}, stored on the
/// half-spectrum k₁ ∈ [0, n/2], k₂ ∈ [-n/2, n/2). Modes with k₁ < 0 are implied
/// by Hermitian symmetry.
struct SpectralField {
  GridSpec grid;
  ComplexBuffer coeffs;

  SpectralField() = default;
  explicit SpectralField(const GridSpec& g) : grid(g), coeffs(g.spectral_size(), std::complex<double>{}) {}

  [[nodiscard]] std::size_t index_of(int k1, int k2) const {
    const int n = grid.n;
    const int r = ((k2 % n) + n) % n;
    return static_cast<std::size_t>(r) * grid.spectral_cols() + k1;
  }

  /// Coefficient of e^{ik·x} for any |k_i| <= n/2.
  [[nodiscard]] std::complex<double> coeff(int k1, int k2) const {
    if (std::abs(k1) > grid.n / 2 || std::abs(k2) > grid.n / 2) {
      throw std::out_of_range("wavevector outside the grid");
    }
    if (k1 >= 0) return coeffs[index_of(k1, k2)];
    return std::conj(coeffs[index_of(-k1, -k2)]);
  }

  /// Sets the coefficient at k and, where both k and -k are stored, its conjugate partner.
  void set_mode(int k1, int k2, std::complex<double> c) {
    if (k1 < 0) {
      k1 = -k1;
      k2 = -k2;
      c = std::conj(c);
    }
    coeffs[index_of(k1, k2)] = c;
    if (k1 == 0 || k1 == grid.n / 2) coeffs[index_of(k1, -k2)] = std::conj(c);
  }

  SpectralField& operator+=(const SpectralField& o) {
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
    return *this;
  }
  SpectralField& operator*=(double c) {
    for (auto& z : coeffs) z *= c;
    return *this;
  }
};

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double c, SpectralField a) { return a *= c; }

struct SpectralVector {
  SpectralField x;
  SpectralField y;

  SpectralVector() = default;
  explicit SpectralVector(const GridSpec& g) : x(g), y(g) {}
  SpectralVector(SpectralField a, SpectralField b) : x(std::move(a)), y(std::move(b)) {}

  [[nodiscard]] const GridSpec& grid() const { return x.grid; }

  SpectralVector& operator+=(const SpectralVector& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  SpectralVector& operator-=(const SpectralVector& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  SpectralVector& operator*=(double c) {
    x *= c;
    y *= c;
    return *this;
  }
};

inline SpectralVector operator+(SpectralVector a, const SpectralVector& b) { return a += b; }
inline SpectralVector operator-(SpectralVector a, const SpectralVector& b) { return a -= b; }
inline SpectralVector operator*(double c, SpectralVector a) { return a *= c; }

}  // namespace tcm
