#pragma once

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

#include "tcm/field.hpp"

namespace tcm {

namespace detail {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class FftPlans {
 public:
  explicit FftPlans(int n) {
    RealBuffer real(static_cast<std::size_t>(n) * n);
    ComplexBuffer spec(static_cast<std::size_t>(n) * (n / 2 + 1));
    r2c_ = fftw_plan_dft_r2c_2d(n, n, real.data(), reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
    c2r_ = fftw_plan_dft_c2r_2d(n, n, reinterpret_cast<fftw_complex*>(spec.data()), real.data(), FFTW_ESTIMATE);
  }
  ~FftPlans() {
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  void forward(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(r2c_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  // Destroys `in`.
  void inverse(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

inline std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

inline const FftPlans& plans_for(int n) {
  static std::map<int, std::unique_ptr<FftPlans>> cache;
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftPlans>(n)).first;
  return *it->second;
}

}  // namespace detail

/// Unit-normalized coefficients: f(x) = Σ_k c_k e^{ik·x}.
inline SpectralField forward_transform(const RealField& f) {
  SpectralField out(f.grid);
  detail::plans_for(f.grid.n).forward(f.values.data(), out.coeffs.data());
  const double scale = 1.0 / static_cast<double>(f.grid.size());
  for (auto& c : out.coeffs) c *= scale;
  return out;
}

inline RealField inverse_transform(const SpectralField& f) {
  RealField out(f.grid);
  ComplexBuffer scratch(f.coeffs);
  detail::plans_for(f.grid.n).inverse(scratch.data(), out.values.data());
  return out;
}

inline SpectralVector forward_transform(const VectorField& v) {
  return {forward_transform(v.x), forward_transform(v.y)};
}

inline VectorField inverse_transform(const SpectralVector& v) {
  return {inverse_transform(v.x), inverse_transform(v.y)};
}

}  // namespace tcm
