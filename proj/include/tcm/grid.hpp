#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcm {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// 64-byte aligned storage so every buffer handed to FFTW has the same alignment
/// as the buffers its plans were created with.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlign = 64;

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    std::size_t bytes = ((count * sizeof(T) + kAlign - 1) / kAlign) * kAlign;
    if (bytes == 0) bytes = kAlign;
    void* p = std::aligned_alloc(kAlign, bytes);
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using RealBuffer = std::vector<double, AlignedAllocator<double>>;
using ComplexBuffer = std::vector<std::complex<double>, AlignedAllocator<std::complex<double>>>;

/// Uniform N×N grid on the torus [0, 2π)². Physical samples are row-major with
/// x₁ along a row: index = i2 * n + i1, x = (2π i1 / n, 2π i2 / n).
struct GridSpec {
  int n = 64;

  static GridSpec make(int n) {
    if (n < 16 || (n & (n - 1)) != 0) {
      throw std::invalid_argument("grid size must be a power of two >= 16, got " + std::to_string(n));
    }
    return GridSpec{n};
  }

  [[nodiscard]] double length() const { return kTwoPi; }
  /// Largest retained wavenumber (per axis) under the 2/3 rule.
  [[nodiscard]] int k_max() const { return n / 3; }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
  /// Columns of the half-spectrum (k₁ = 0..n/2).
  [[nodiscard]] int spectral_cols() const { return n / 2 + 1; }
  [[nodiscard]] std::size_t spectral_size() const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(spectral_cols());
  }
  [[nodiscard]] double area() const { return kTwoPi * kTwoPi; }
  [[nodiscard]] double spacing() const { return kTwoPi / n; }

  bool operator==(const GridSpec&) const = default;
};

/// Signed wavenumber stored at FFT index i. Index n/2 maps to -n/2 (Nyquist).
inline int signed_wavenumber(int i, int n) { return i < n / 2 ? i : i - n; }

/// Per-grid wavenumber tables over the half-spectrum, shared and immutable.
struct Wavenumbers {
  int n = 0;
  int cols = 0;
  std::vector<int> k1, k2;     // integer wavevector per stored mode
  std::vector<double> kd1, kd2;  // differentiation wavenumbers (0 on Nyquist lines)
  std::vector<double> kabs;    // |k|
  std::vector<double> ksq;     // |k|²
  std::vector<double> weight;  // Parseval multiplicity of the stored mode (1 or 2)
  std::vector<unsigned char> retained;  // max(|k₁|,|k₂|) <= k_max

  static std::shared_ptr<const Wavenumbers> build(const GridSpec& g) {
    auto w = std::make_shared<Wavenumbers>();
    w->n = g.n;
    w->cols = g.spectral_cols();
    const std::size_t m = g.spectral_size();
    w->k1.resize(m);
    w->k2.resize(m);
    w->kd1.resize(m);
    w->kd2.resize(m);
    w->kabs.resize(m);
    w->ksq.resize(m);
    w->weight.resize(m);
    w->retained.resize(m);
    const int half = g.n / 2;
    const int kmax = g.k_max();
    for (int r = 0; r < g.n; ++r) {
      const int kk2 = signed_wavenumber(r, g.n);
      for (int c = 0; c < w->cols; ++c) {
        const std::size_t idx = static_cast<std::size_t>(r) * w->cols + c;
        const int kk1 = c;
        w->k1[idx] = kk1;
        w->k2[idx] = kk2;
        w->kd1[idx] = (kk1 == half) ? 0.0 : static_cast<double>(kk1);
        w->kd2[idx] = (r == half) ? 0.0 : static_cast<double>(kk2);
        w->ksq[idx] = static_cast<double>(kk1) * kk1 + static_cast<double>(kk2) * kk2;
        w->kabs[idx] = std::sqrt(w->ksq[idx]);
        w->weight[idx] = (kk1 == 0 || kk1 == half) ? 1.0 : 2.0;
        w->retained[idx] = (std::abs(kk1) <= kmax && std::abs(kk2) <= kmax) ? 1 : 0;
      }
    }
    return w;
  }
};

inline const Wavenumbers& wavenumbers(const GridSpec& g) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const Wavenumbers>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(g.n);
  if (it == cache.end()) it = cache.emplace(g.n, Wavenumbers::build(g)).first;
  return *it->second;
}

}  // namespace tcm
