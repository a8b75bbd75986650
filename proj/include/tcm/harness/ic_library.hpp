#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "tcm/commutator.hpp"
#include "tcm/harness/csv.hpp"
#include "tcm/diagnostics.hpp"
#include "tcm/solver.hpp"

namespace tcm::harness {

struct IcBand {
  double slope = -2.0;
  int k_lo = 1;
  int k_hi = 8;
};

namespace detail {

inline State unit_profile(const std::string& name, const GridSpec& g, std::uint64_t seed, const IcBand& band) {
  State x = State::zero(g);
  if (name == "taylor-green") {
    // Steady Euler vortex for u; a compressive v and a tilted θ wave so every coupling is active.
    x.u = VectorField(RealField::sample(g, [](double a, double b) { return std::sin(a) * std::cos(b); }),
                      RealField::sample(g, [](double a, double b) { return -std::cos(a) * std::sin(b); }));
    x.v = VectorField(RealField::sample(g, [](double a, double b) { return std::sin(a) * std::cos(b); }),
                      RealField::sample(g, [](double a, double b) { return std::cos(a) * std::sin(b); }));
    x.theta = RealField::sample(g, [](double a, double b) { return std::cos(a + b); });
  } else if (name == "shear") {
    // Kolmogorov-type shear in u with a weak cross mode; v and θ carry a second wavenumber.
    x.u = VectorField(RealField::sample(g, [](double, double b) { return std::sin(b); }),
                      RealField::sample(g, [](double a, double) { return 0.1 * std::sin(a); }));
    x.v = VectorField(RealField::sample(g, [](double a, double) { return std::cos(2.0 * a); }),
                      RealField::sample(g, [](double, double b) { return 0.5 * std::sin(2.0 * b); }));
    x.theta = RealField::sample(g, [](double a, double b) { return std::sin(a) * std::sin(2.0 * b); });
  } else if (name == "random-band") {
    const CorpusBand cb{band.slope, band.k_lo, band.k_hi};
    x.u = corpus_solenoidal(g, seed, cb);
    x.v = VectorField(corpus_scalar(g, seed, cb, 1), corpus_scalar(g, seed, cb, 2));
    x.theta = corpus_scalar(g, seed, cb, 3);
  } else {
    throw std::invalid_argument("unknown initial-condition profile: " + name);
  }
  return x;
}

}  // namespace detail

/// Named initial state scaled so that ‖u₀‖_{H^s} + ‖v₀‖_{H^s} + ‖θ₀‖_{H^s} = amplitude.
/// Profiles: taylor-green, shear, random-band (u Leray-projected).
inline State ic_library(const std::string& name, double amplitude, std::uint64_t seed, const GridSpec& g, double s,
                        const IcBand& band = {}) {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("amplitude must be >= 0");
  State x = to_physical(to_spectral(detail::unit_profile(name, g, seed, band)), 0.0);
  const double norm = hs_sum(x, s);
  const double c = amplitude == 0.0 ? 0.0 : amplitude / norm;
  x.u *= c;
  x.v *= c;
  x.theta *= c;
  return x;
}

inline State load_snapshot_file(const std::string& path, SnapshotMeta* meta = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot: " + path);
  return read_snapshot(in, meta);
}

}  // namespace tcm::harness
