// Transforms, Fourier multipliers, norms and band-limited generators.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support/oracles.hpp"
#include "tcm/spectral.hpp"

using namespace tcm;

namespace {

const double kPi = std::numbers::pi;

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double x : f.values) m = std::max(m, std::abs(x));
  return m;
}

double max_diff(const RealField& a, const RealField& b) { return max_abs(a - b); }

RealField cos_mode(const GridSpec& g, int k1, int k2, double amp = 1.0) {
  return RealField::sample(g, [=](double x, double y) { return amp * std::cos(k1 * x + k2 * y); });
}

}  // namespace

// --- transforms -------------------------------------------------------------

TEST(Transform, ConstantHasUnitZeroMode) {
  const GridSpec g = GridSpec::make(16);
  const SpectralField c = forward_transform(RealField::constant(g, 1.0));
  for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
    EXPECT_EQ(std::abs(c.coeffs[i] - (i == 0 ? 1.0 : 0.0)), 0.0) << i;
  }
}

TEST(Transform, CosineSplitsIntoHalves) {
  const GridSpec g = GridSpec::make(32);
  const SpectralField c = forward_transform(cos_mode(g, 1, 0));
  EXPECT_NEAR(std::abs(c.coeff(1, 0) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c.coeff(-1, 0) - 0.5), 0.0, 1e-15);
  double rest = 0.0;
  for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
    if (i != c.index_of(1, 0)) rest = std::max(rest, std::abs(c.coeffs[i]));
  }
  EXPECT_LT(rest, 1e-15);
}

TEST(Transform, MatchesDirectDft) {
  const GridSpec g = GridSpec::make(16);
  oracle::Gen gen(11);
  RealField f(g);
  for (double& x : f.values) x = gen.uniform(-1, 1);
  const SpectralField c = forward_transform(f);
  for (int k2 = -8; k2 < 8; ++k2) {
    for (int k1 = -7; k1 <= 8; ++k1) {
      EXPECT_LT(std::abs(c.coeff(k1, k2) - oracle::dft_coeff(f, k1, k2)), 1e-14) << k1 << "," << k2;
    }
  }
}

TEST(Transform, RoundTripRandomFields) {
  for (int n : {16, 64, 128}) {
    const GridSpec g = GridSpec::make(n);
    oracle::Gen gen(n);
    RealField f(g);
    for (double& x : f.values) x = gen.uniform(-3, 3);
    EXPECT_LT(max_diff(inverse_transform(forward_transform(f)), f), 1e-12) << n;
  }
}

TEST(Transform, GridRejectsBadSizes) {
  EXPECT_THROW(GridSpec::make(8), std::invalid_argument);
  EXPECT_THROW(GridSpec::make(48), std::invalid_argument);
  EXPECT_NO_THROW(GridSpec::make(256));
}

// --- multipliers ------------------------------------------------------------

TEST(Multiplier, FractionalLaplacianExamples) {
  const GridSpec g = GridSpec::make(32);
  const RealField c1 = cos_mode(g, 1, 0);
  EXPECT_LT(max_diff(fractional_laplacian(c1, 1.5), c1), 1e-13);
  const RealField c2 = cos_mode(g, 2, 0);
  EXPECT_LT(max_diff(fractional_laplacian(c2, 2.0), 4.0 * c2), 1e-13);
  const RealField f = RealField::constant(g, 2.5) + c2;
  EXPECT_LT(max_diff(fractional_laplacian(f, 0.0), f), 1e-14);
}

TEST(Multiplier, SemigroupProperty) {
  const GridSpec g = GridSpec::make(64);
  oracle::Gen gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const SpectralField f = forward_transform(random_band_field(g, gen.seed(), -1.5, 1, 16));
    const double a = gen.uniform(-1, 2), b = gen.uniform(-1, 2);
    const SpectralField lhs = fractional_laplacian(fractional_laplacian(f, a), b);
    const SpectralField rhs = fractional_laplacian(remove_mean(f), a + b);
    const double err = std::sqrt(hs_seminorm_sq(lhs - rhs)) / std::sqrt(hs_seminorm_sq(rhs));
    EXPECT_LT(err, 1e-12) << a << " " << b;
  }
}

TEST(Multiplier, DivergenceOfGradientIsLaplacian) {
  const GridSpec g = GridSpec::make(32);
  const RealField c2 = cos_mode(g, 2, 0);
  EXPECT_LT(max_diff(divergence(gradient(c2)), -4.0 * c2), 1e-13);
}

TEST(Multiplier, RieszDivergenceExamples) {
  const GridSpec g = GridSpec::make(32);
  const RealField c1 = cos_mode(g, 1, 0);
  EXPECT_LT(max_diff(riesz_div(gradient(c1)), -1.0 * c1), 1e-14);
  const VectorField sol = inverse_transform(perp_gradient(forward_transform(
      RealField::sample(g, [](double x, double y) { return std::sin(x + 3 * y); }))));
  EXPECT_LT(max_abs(riesz_div(sol)), 1e-14);
  const VectorField c{RealField::constant(g, 3.0), RealField::constant(g, -1.0)};
  EXPECT_EQ(max_abs(riesz_div(c)), 0.0);
}

TEST(Multiplier, RieszIsL2Contraction) {
  const GridSpec g = GridSpec::make(64);
  oracle::Gen gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorField w{random_band_field(g, gen.seed(), -1.0, 1, 20), random_band_field(g, gen.seed(), -1.0, 1, 20)};
    EXPECT_LE(lp_norm(riesz_div(w), 2.0), lp_norm(w, 2.0) * (1.0 + 1e-12));
  }
}

TEST(Multiplier, LerayExamples) {
  const GridSpec g = GridSpec::make(32);
  const RealField p = RealField::sample(g, [](double x, double y) { return std::sin(2 * x) * std::cos(3 * y); });
  const VectorField gp = gradient(p);
  EXPECT_LT(lp_norm(leray_project(gp), std::numeric_limits<double>::infinity()), 1e-13);
  const SpectralField psi = forward_transform(RealField::sample(g, [](double x, double y) { return std::cos(x + 2 * y); }));
  const VectorField w = inverse_transform(perp_gradient(psi));
  EXPECT_LT(lp_norm(leray_project(w) - w, std::numeric_limits<double>::infinity()), 1e-14);
}

TEST(Multiplier, LerayPropertiesOnRandomFields) {
  const GridSpec g = GridSpec::make(64);
  oracle::Gen gen(23);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorField w{random_band_field(g, gen.seed(), -1.0, 1, 20), random_band_field(g, gen.seed(), -1.0, 1, 20)};
    const VectorField pw = leray_project(w);
    EXPECT_LT(lp_norm(leray_project(pw) - pw, 2.0), 1e-12 * lp_norm(w, 2.0));
    EXPECT_LT(std::abs(inner(pw, w - pw)), 1e-10 * inner(w, w));
    EXPECT_LT(max_abs(divergence(pw)), 1e-12);
  }
}

TEST(Multiplier, DealiasKeepsBandAndKillsNyquist) {
  const GridSpec g = GridSpec::make(32);
  const RealField f = cos_mode(g, g.k_max(), g.k_max()) + cos_mode(g, 1, -g.k_max());
  EXPECT_LT(max_diff(inverse_transform(dealias(forward_transform(f))), f), 1e-13);
  const RealField nyq = cos_mode(g, g.n / 2, 0);
  EXPECT_EQ(max_abs(inverse_transform(dealias(forward_transform(nyq)))), 0.0);
}

TEST(Multiplier, AdvectionCancellation) {
  const GridSpec g = GridSpec::make(64);
  const CorpusBand band{-1.5, 1, 16};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const VectorField u = corpus_solenoidal(g, seed, band);
    const RealField f = corpus_scalar(g, seed, band);
    const double c = inner(inverse_transform(advect(u, gradient(f))), f);
    EXPECT_LT(std::abs(c), 1e-10) << seed;
  }
}

// --- norms ------------------------------------------------------------------

TEST(Norm, ConstantField) {
  const GridSpec g = GridSpec::make(16);
  const RealField f = RealField::constant(g, -3.0);
  for (double p : {1.0, 2.0, 3.0}) EXPECT_NEAR(lp_norm(f, p), 3.0 * std::pow(2 * kPi, 2.0 / p), 1e-12) << p;
  EXPECT_EQ(lp_norm(f, std::numeric_limits<double>::infinity()), 3.0);
}

TEST(Norm, SineField) {
  const GridSpec g = GridSpec::make(64);
  const RealField f = RealField::sample(g, [](double x, double) { return std::sin(x); });
  EXPECT_NEAR(lp_norm(f, 2.0), std::sqrt(2 * kPi * kPi), 1e-12);
  EXPECT_NEAR(lp_norm(f, std::numeric_limits<double>::infinity()), 1.0, 1e-12);
}

TEST(Norm, ParsevalAgreesWithQuadrature) {
  const GridSpec g = GridSpec::make(64);
  oracle::Gen gen(29);
  for (int trial = 0; trial < 10; ++trial) {
    const RealField a = random_band_field(g, gen.seed(), -1.0, 1, 21);
    const RealField b = random_band_field(g, gen.seed(), -1.0, 1, 21);
    const double q = oracle::quadrature(a, b);
    EXPECT_NEAR(inner_hs(forward_transform(a), forward_transform(b)), q, 1e-10 * std::abs(q) + 1e-13);
    EXPECT_NEAR(inner(a, b), q, 1e-10 * std::abs(q) + 1e-13);
  }
}

// --- generators -------------------------------------------------------------

TEST(Generator, UnitBandIsSupportedOnUnitCircle) {
  const GridSpec g = GridSpec::make(32);
  const SpectralField f = forward_transform(random_band_field(g, 3, -2.0, 1, 1));
  const Wavenumbers& w = wavenumbers(g);
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
    if (w.ksq[i] != 1.0) {
      EXPECT_LT(std::abs(f.coeffs[i]), 1e-15) << w.k1[i] << "," << w.k2[i];
    }
  }
  EXPECT_GT(hs_seminorm_sq(f), 0.0);
}

TEST(Generator, SameSeedSameField) {
  const GridSpec g = GridSpec::make(64);
  const RealField a = random_band_field(g, 42, -2.0, 1, g.k_max());
  const RealField b = random_band_field(g, 42, -2.0, 1, g.k_max());
  EXPECT_EQ(a.values, b.values);
  const RealField c = random_band_field(g, 43, -2.0, 1, g.k_max());
  EXPECT_NE(a.values, c.values);
}

TEST(Generator, GradientRatioFinite) {
  const GridSpec g = GridSpec::make(64);
  const SpectralField f = forward_transform(random_band_field(g, 7, -2.0, 1, g.k_max()));
  const double r = std::sqrt(hs_seminorm_sq(f, 1.0) / hs_seminorm_sq(f));
  EXPECT_TRUE(std::isfinite(r));
  EXPECT_GE(r, 1.0);
  EXPECT_LE(r, std::sqrt(2.0) * g.k_max());
}

TEST(Generator, RejectsBandOutsideGrid) {
  const GridSpec g = GridSpec::make(32);
  EXPECT_THROW(random_band_field(g, 1, -2.0, 0, 4), std::invalid_argument);
  EXPECT_THROW(random_band_field(g, 1, -2.0, 4, 2), std::invalid_argument);
  EXPECT_THROW(random_band_field(g, 1, -2.0, 1, g.k_max() + 1), std::invalid_argument);
}
