// Commutators: closed-form single-mode oracles, trivial cases, Bony splits, audits.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support/oracles.hpp"
#include "tcm/commutator.hpp"

using namespace tcm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double x : f.values) m = std::max(m, std::abs(x));
  return m;
}

const CorpusBand kBand{-1.5, 1, 16};

}  // namespace

// --- closed forms -------------------------------------------------------------
// f = (0, a cos(p x₁)), g = cos(q x₂): f·∇g = −aq cos(p x₁) sin(q x₂), a single
// frequency pair with |k| = √(p² + q²), so every commutator is a scalar multiple.

TEST(AdvCommutator, SingleModeClosedForm) {
  const GridSpec g = GridSpec::make(64);
  const double a = 0.7;
  const int p = 2, q = 3;
  const VectorField f{RealField(g), RealField::sample(g, [&](double x, double) { return a * std::cos(p * x); })};
  const RealField gg = RealField::sample(g, [&](double, double y) { return std::cos(q * y); });
  for (double s : {0.5, 1.0, 2.5}) {
    const double c = -a * q * (std::pow(std::hypot(p, q), s) - std::pow(q, s));
    const RealField want = RealField::sample(g, [&](double x, double y) { return c * std::cos(p * x) * std::sin(q * y); });
    EXPECT_LT(max_abs(adv_commutator(f, gg, s) - want), 1e-12 * std::abs(c)) << s;
  }
}

TEST(KatoPonce, SingleModeClosedForm) {
  const GridSpec g = GridSpec::make(64);
  const RealField f = RealField::sample(g, [](double x, double) { return std::cos(2 * x); });
  const RealField gg = RealField::sample(g, [](double, double y) { return std::cos(3 * y); });
  for (double s : {0.5, 1.5}) {
    const double c = std::pow(std::hypot(2.0, 3.0), s) - std::pow(3.0, s);
    const RealField want = RealField::sample(g, [&](double x, double y) { return c * std::cos(2 * x) * std::cos(3 * y); });
    EXPECT_LT(max_abs(kato_ponce_commutator(f, gg, s) - want), 1e-12) << s;
  }
}

TEST(Mollifier, SingleModeClosedForm) {
  const GridSpec g = GridSpec::make(64);
  const RealField a = RealField::sample(g, [](double x, double) { return std::cos(2 * x); });
  const RealField b = RealField::sample(g, [](double, double y) { return std::cos(3 * y); });
  for (double lam : {3.0, 3.5, 4.0}) {
    const double c = oracle::chi(std::hypot(2.0, 3.0) / lam) - oracle::chi(3.0 / lam);
    const RealField want = RealField::sample(g, [&](double x, double y) { return c * std::cos(2 * x) * std::cos(3 * y); });
    EXPECT_LT(max_abs(mollifier_commutator(a, b, lam, MollifierProfile::Chi) - want), 1e-14) << lam;
  }
}

TEST(Convolution, DyadicKernelReproducesBlock) {
  const GridSpec g = GridSpec::make(64);
  const DyadicCutoffs cut = build_cutoffs(g);
  const SpectralField w = forward_transform(corpus_scalar(g, 5, kBand));
  for (int j = 0; j <= 3; ++j) {
    const SpectralField via_kernel = convolve(forward_transform(dyadic_kernel(g, j)), w);
    EXPECT_LT(std::sqrt(hs_seminorm_sq(via_kernel - delta_j(w, j, cut))), 1e-12 * std::sqrt(hs_seminorm_sq(w))) << j;
  }
}

TEST(Convolution, DiracKernelIsIdentity) {
  const GridSpec g = GridSpec::make(32);
  const SpectralField w = forward_transform(random_band_field(g, 2, -1.0, 1, 10));
  const SpectralField c = convolve(forward_transform(dirac_kernel(g)), w);
  EXPECT_LT(std::sqrt(hs_seminorm_sq(c - w)), 1e-13);
  EXPECT_EQ(moment_norm(dirac_kernel(g), 2.0), 0.0);
}

// --- trivial zero cases ---------------------------------------------------------

TEST(ZeroCases, AdvectiveCommutator) {
  const GridSpec g = GridSpec::make(64);
  const VectorField f = corpus_solenoidal(g, 1, kBand);
  const RealField gg = corpus_scalar(g, 1, kBand);
  const VectorField fc{RealField::constant(g, 0.3), RealField::constant(g, -2.0)};
  EXPECT_EQ(max_abs(adv_commutator(fc, gg, 1.5)), 0.0);
  EXPECT_EQ(max_abs(adv_commutator(f, RealField::constant(g, 4.0), 1.5)), 0.0);
  EXPECT_EQ(max_abs(adv_commutator(f, gg, 0.0)), 0.0);
}

TEST(ZeroCases, Prop27ConstantFieldGivesZeroRatio) {
  const GridSpec g = GridSpec::make(64);
  const VectorField fc{RealField::constant(g, 1.0), RealField::constant(g, 1.0)};
  const AuditRecord r = prop27_audit(fc, corpus_scalar(g, 3, kBand), 1.0, 0.0, 2.0, 2.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.ratio, 0.0);
}

TEST(ZeroCases, KatoPonceMollifierConvolutionRiesz) {
  const GridSpec g = GridSpec::make(64);
  const RealField a = corpus_scalar(g, 2, kBand);
  const RealField b = corpus_scalar(g, 2, kBand, 1);
  const RealField c = RealField::constant(g, 1.7);
  const RealField z(g);
  EXPECT_EQ(max_abs(kato_ponce_commutator(c, b, 1.5)), 0.0);
  EXPECT_EQ(max_abs(kato_ponce_commutator(a, z, 1.5)), 0.0);
  EXPECT_EQ(kp_audit(a, z, 1.5, 2.0, kInf, 2.0, kInf, 2.0).lhs, 0.0);
  EXPECT_EQ(max_abs(mollifier_commutator(c, b, 4.0, MollifierProfile::Chi)), 0.0);
  EXPECT_EQ(max_abs(mollifier_commutator(a, z, 4.0, MollifierProfile::Phi)), 0.0);
  EXPECT_EQ(max_abs(convolution_commutator(dyadic_kernel(g, 2), c, b)), 0.0);
  EXPECT_EQ(max_abs(convolution_commutator(dirac_kernel(g), a, b)), 0.0);

  const VectorField u = corpus_solenoidal(g, 2, kBand);
  const VectorField v{a, b};
  EXPECT_EQ(max_abs(riesz_adv_commutator(VectorField(g), v)), 0.0);
  const VectorField uc{RealField::constant(g, 0.5), RealField::constant(g, 0.25)};
  EXPECT_EQ(max_abs(riesz_adv_commutator(uc, gradient(a))), 0.0);
  EXPECT_GT(max_abs(riesz_adv_commutator(u, v)), 0.0);
}

// --- errors -------------------------------------------------------------------

TEST(Errors, NonSolenoidalAdvectingField) {
  const GridSpec g = GridSpec::make(32);
  const VectorField f{RealField::sample(g, [](double x, double) { return std::cos(x); }), RealField(g)};
  const RealField gg = corpus_scalar(g, 1, CorpusBand{-1.5, 1, 8});
  EXPECT_THROW(adv_commutator(f, gg, 1.0), std::invalid_argument);
  EXPECT_THROW(bony_split(f, gg, 1.0, 1, BonyWhich::K1), std::invalid_argument);
  EXPECT_THROW(riesz_adv_commutator(f, VectorField(g)), std::invalid_argument);
}

TEST(Errors, ExponentMismatch) {
  const GridSpec g = GridSpec::make(32);
  const RealField a = corpus_scalar(g, 1, CorpusBand{-1.5, 1, 8});
  EXPECT_THROW(kp_audit(a, a, 1.5, 2.0, kInf, 3.0, kInf, 2.0), std::invalid_argument);
  EXPECT_THROW(kp_audit(a, a, 0.0, 2.0, kInf, 2.0, kInf, 2.0), std::invalid_argument);
  EXPECT_THROW(product_audit(a, a, 1.0, 2.0, 2.0, 4.0, 2.0, kInf, 2.0), std::invalid_argument);
  EXPECT_THROW(mollifier_audit(a, a, 2.0, MollifierProfile::Chi, kInf, 2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(conv_audit(dirac_kernel(g), a, a, 2.0, 2.0, 2.0), std::invalid_argument);
  EXPECT_THROW(mollifier_commutator(a, a, 0.0, MollifierProfile::Chi), std::invalid_argument);
}

TEST(Errors, Prop27Hypotheses) {
  const GridSpec g = GridSpec::make(32);
  const CorpusBand b{-1.5, 1, 8};
  const VectorField f = corpus_solenoidal(g, 1, b);
  const RealField gg = corpus_scalar(g, 1, b);
  EXPECT_THROW(prop27_audit(f, gg, 1.0, -1.0, 2.0, 2.0), std::invalid_argument);
  EXPECT_THROW(prop27_audit(f, gg, -0.5, 0.0, 2.0, 2.0), std::invalid_argument);
  const AuditRecord r = prop27_audit(f, gg, 0.5, -1.2, 2.0, 2.0, 0, false);
  EXPECT_EQ(r.regime, "sigma<=-1;s+sigma>-1");
  EXPECT_TRUE(r.valid());
}

// --- Bony split ---------------------------------------------------------------

TEST(Bony, ConstantAdvectorGivesZeroTerms) {
  const GridSpec g = GridSpec::make(64);
  const VectorField fc{RealField::constant(g, 1.0), RealField::constant(g, 2.0)};
  const RealField gg = corpus_scalar(g, 4, kBand);
  for (BonyWhich w : {BonyWhich::K1, BonyWhich::K2}) {
    const BonySplit b = bony_split(fc, gg, 1.0, 2, w);
    for (const BonyTerm& t : b.terms) EXPECT_EQ(max_abs(t.field), 0.0) << t.name;
    EXPECT_EQ(max_abs(b.direct), 0.0);
  }
}

TEST(Bony, SupportDisjointnessKillsHighLowTerms) {
  const GridSpec g = GridSpec::make(128);
  const VectorField f{RealField(g), RealField::sample(g, [](double x, double) { return std::cos(x); })};
  const RealField gg = RealField::sample(g, [](double x, double y) { return std::cos(32 * x + 5 * y); });
  for (BonyWhich w : {BonyWhich::K1, BonyWhich::K2}) {
    const BonySplit b = bony_split(f, gg, 1.5, 5, w);
    // Only transform roundoff survives in the high-low and remainder groups.
    EXPECT_LT(max_abs(b.terms[1].field), 1e-20) << b.terms[1].name;
    EXPECT_LT(max_abs(b.terms[3].field), 1e-20) << b.terms[3].name;
    EXPECT_GT(max_abs(b.direct), 1e-3);
    EXPECT_LT(b.recombination_error(), 1e-8);
  }
}

TEST(Bony, RecombinationOnRandomPairs) {
  const GridSpec g = GridSpec::make(64);
  oracle::Gen gen(53);
  for (int trial = 0; trial < 8; ++trial) {
    const std::uint64_t seed = gen.seed() % 100000;
    const VectorField f = corpus_solenoidal(g, seed, kBand);
    const RealField gg = corpus_scalar(g, seed, kBand);
    const double s = gen.uniform(0.0, 2.0);
    const int j = gen.integer(0, 4);
    for (BonyWhich w : {BonyWhich::K1, BonyWhich::K2}) {
      EXPECT_LT(bony_split(f, gg, s, j, w).recombination_error(), 1e-8) << seed << " " << j;
    }
  }
}

TEST(Bony, BlocksOfCommutatorDifference) {
  // Δ_j[Λ^s, f·∇]g = K2 block − K1 block, up to the mean-free split of f.
  const GridSpec g = GridSpec::make(64);
  const DyadicCutoffs cut = build_cutoffs(g);
  const VectorField f = corpus_solenoidal(g, 8, kBand);
  const RealField gg = corpus_scalar(g, 8, kBand);
  for (int j = 0; j <= 4; ++j) {
    const RealField lhs = delta_j(adv_commutator(f, gg, 1.0), j, cut);
    const RealField rhs = bony_split(f, gg, 1.0, j, BonyWhich::K2).direct - bony_split(f, gg, 1.0, j, BonyWhich::K1).direct;
    EXPECT_LT(lp_norm(lhs - rhs, 2.0), 1e-12 * std::max(1.0, lp_norm(lhs, 2.0))) << j;
  }
}

// --- audits -------------------------------------------------------------------

TEST(Audit, RecordsAreValidAndPositive) {
  const GridSpec g = GridSpec::make(64);
  const VectorField f = corpus_solenoidal(g, 6, kBand);
  const RealField a = corpus_scalar(g, 6, kBand);
  const RealField b = corpus_scalar(g, 6, kBand, 1);
  const std::vector<AuditRecord> recs = {
      prop27_audit(f, a, 1.0, 0.0, 2.0, 2.0, 6),
      kp_audit(a, b, 1.5, 2.0, kInf, 2.0, kInf, 2.0, 6),
      product_audit(a, b, 1.0, 2.0, 2.0, kInf, 2.0, kInf, 2.0, 6),
      mollifier_audit(a, b, 4.0, MollifierProfile::Chi, 2.0, kInf, 2.0, 6),
      conv_audit(dyadic_kernel(g, 2), a, b, 2.0, 1.0, 2.0, 6),
      riesz_audit(f, VectorField(a, b), 6),
  };
  for (const AuditRecord& r : recs) {
    EXPECT_TRUE(r.valid()) << r.estimate;
    EXPECT_GT(r.ratio, 0.0) << r.estimate;
    EXPECT_EQ(r.seed, 6u) << r.estimate;
    EXPECT_NEAR(r.ratio, r.lhs / r.rhs, 1e-15 * r.ratio) << r.estimate;
  }
}

TEST(Audit, MollifierBoundScalesInverselyWithLambda) {
  const GridSpec g = GridSpec::make(64);
  const RealField a = corpus_scalar(g, 9, kBand);
  const RealField b = corpus_scalar(g, 9, kBand, 1);
  const AuditRecord r2 = mollifier_audit(a, b, 2.0, MollifierProfile::Chi, 2.0, kInf, 2.0);
  const AuditRecord r4 = mollifier_audit(a, b, 4.0, MollifierProfile::Chi, 2.0, kInf, 2.0);
  EXPECT_NEAR(r2.rhs, 2.0 * r4.rhs, 1e-14 * r2.rhs);
}

TEST(Audit, ResolutionIndependentCorpus) {
  // The corpus is the same trigonometric polynomial on every grid that resolves it.
  const RealField a64 = corpus_scalar(GridSpec::make(64), 12, kBand);
  const RealField a128 = corpus_scalar(GridSpec::make(128), 12, kBand);
  const SpectralField h64 = forward_transform(a64), h128 = forward_transform(a128);
  for (int k2 = -16; k2 <= 16; ++k2) {
    for (int k1 = 0; k1 <= 16; ++k1) EXPECT_LT(std::abs(h64.coeff(k1, k2) - h128.coeff(k1, k2)), 1e-15);
  }
}
