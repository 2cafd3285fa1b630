#include "support.hpp"

using namespace tricorr;
using tricorr::testing::agree;
using tricorr::testing::K;
using tricorr::testing::throws_code;

namespace {

// Frozen at 70 digits from closed-form expressions in an independent implementation, (K1,K2,K3) = (0.3,0.2,0.1).
const char* kZeta[4] = {
    "50.3023219339055092448301590317429216731692129796091771054697",
    "2.00124623290517653696781506190504497434501914704618100751384",
    "0.499688635789867946191618623664005851287170747294985969673307",
    "0.0198797980203368171844988680548686145719065410536937903007246",
};
const char* kGamma = "0.632244553329755186763842620245912180574453108576306168056572";
const char* kDeltaSq = "0.34089541808311904986150709920893830926902580941816691765388";

}  // namespace

TEST(Params, SingularPointsMatchFrozenValues) {
  PrecisionScope p(70);
  LatticeData d = derive(K("0.3", "0.2", "0.1"));
  for (int i = 0; i < 4; ++i) {
    EXPECT_TRUE(agree(d.zeta[i].re, kZeta[i], 58)) << "zeta_" << i + 1;
    EXPECT_TRUE(d.zeta[i].im.is_zero());
  }
  EXPECT_TRUE(agree(d.gamma, kGamma, 58));
  EXPECT_TRUE(agree(d.delta_sq, kDeltaSq, 58));
  EXPECT_EQ(d.regime, Regime::FerroDisordered);
}

TEST(Params, SingularPointProductsAndPairings) {
  PrecisionScope p(60);
  for (const auto& c : {K("0.5", "0.4", "0.3"), K("0.6", "0.5", "-0.2"), K("1.2", "1.0", "-0.5")}) {
    LatticeData d = derive(c);
    ComplexReal prod = d.zeta[0] * d.zeta[1] * d.zeta[2] * d.zeta[3];
    EXPECT_TRUE(abs(prod.re - 1) < Real::pow10(-55));
    ComplexReal p14 = d.zeta[0] * d.zeta[3], p23 = d.zeta[1] * d.zeta[2];
    EXPECT_TRUE(abs(p14.re - 1) < Real::pow10(-55));
    EXPECT_TRUE(abs(p23.re - 1) < Real::pow10(-55));
    ComplexReal z3 = d.zeta[0] * (d.z[2] * d.z[2]);
    EXPECT_TRUE(abs(z3.re - d.zeta[2].re) <= Real::pow10(-55) * abs(d.zeta[2].re));
  }
}

TEST(Params, SymmetricCoefficientsAreBitwiseEqual) {
  PrecisionScope p(50);
  LatticeData d = derive(K("0.7", "0.2", "0.45"));
  EXPECT_EQ(mpfr_cmp(d.e[1].raw(), d.e[3].raw()), 0);
  EXPECT_EQ(mpfr_cmp(d.m[1].raw(), d.m[3].raw()), 0);
  EXPECT_TRUE(d.e[0] == Real(1));
  EXPECT_TRUE(d.e[4] == Real(1));
}

TEST(Params, SwappingFirstTwoCouplingsLeavesInvariantsUnchanged) {
  PrecisionScope p(50);
  LatticeData a = derive(K("0.3", "0.2", "0.1")), b = derive(K("0.2", "0.3", "0.1"));
  EXPECT_TRUE(agree(a.gamma, b.gamma, 48));
  EXPECT_TRUE(agree(a.delta_sq, b.delta_sq, 48));
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(agree(a.zeta[i].re, b.zeta[i].re, 48));
}

TEST(Params, ScriptDiscriminantFormsAgree) {
  PrecisionScope p(50);
  for (const auto& c : {K("0.3", "0.2", "0.1"), K("0.6", "0.5", "-0.2"), K("0.8", "-0.3", "-0.2")}) {
    LatticeData d = derive(c);
    ComplexReal dsq = d.d_script * d.d_script;
    EXPECT_TRUE(abs(dsq.re - d.d_script_sq_zform) <= Real::pow10(-45) * (1 + abs(d.d_script_sq_zform)));
  }
}

TEST(Params, DeltaBarSquaredProductAndQuadraticForms) {
  PrecisionScope p(50);
  for (const auto& c : {K("0.3", "0.2", "0.1"), K("1.2", "1.0", "-0.5")}) {
    LatticeData d = derive(c);
    Real v3s = d.v[2] * d.v[2];
    Real expect = ((1 + v3s) * (1 + v3s) * d.delta_sq - 4 * v3s * d.gamma * d.gamma) / ((1 - v3s) * (1 - v3s));
    EXPECT_TRUE(agree(d.delta_bar_sq, expect, 45));
  }
}

TEST(Params, ClassifiesRegimes) {
  PrecisionScope p(50);
  EXPECT_EQ(classify_couplings(K("1", "1", "1")).regime, Regime::FerroOrdered);
  EXPECT_EQ(classify_couplings(K("0.3", "0.2", "0.1")).regime, Regime::FerroDisordered);
  EXPECT_EQ(classify_couplings(K("1.2", "1.0", "-0.5")).regime, Regime::AntiferroLowT);
  EXPECT_EQ(classify_couplings(K("0.6", "0.5", "-0.2")).regime, Regime::AntiferroIntermediate);
  EXPECT_EQ(classify_couplings(K("0.3", "0.3", "-0.1")).regime, Regime::AntiferroHighT);
  EXPECT_EQ(classify_couplings(K("0.8", "-0.3", "-0.2")).regime, Regime::FerroOrdered);
}

TEST(Params, DetectsCriticalManifolds) {
  PrecisionScope p(60);
  Real k("0.3");
  Real u = exp(-2 * k);
  Real curie = -log((1 - u * u) / (2 * u)) / 2;
  RegimeReport c = classify_couplings({k, k, curie});
  EXPECT_EQ(c.regime, Regime::CuriePoint);
  EXPECT_TRUE(abs(c.curie_residual) < Real::pow10(-50));

  Real disorder = -atanh(tanh(k) * tanh(k));
  RegimeReport d = classify_couplings({k, k, disorder});
  EXPECT_EQ(d.regime, Regime::DisorderPoint);
  EXPECT_TRUE(abs(d.disorder_residual) < Real::pow10(-50));

  Real a = exp(Real(2)), b = exp(Real("1.6"));
  Real neel = log((a * b - 1) / (a + b)) / 2;
  EXPECT_EQ(classify_couplings({Real(1), Real("0.8"), -neel}).regime, Regime::NeelPoint);
}

TEST(Params, AmbiguityIsReportedWithLooseTolerance) {
  PrecisionScope p(40);
  Tolerances loose;
  loose.regime = 0.5;
  EXPECT_TRUE(throws_code([&] { classify_couplings(K("0.1", "0.1", "-0.1"), loose); }, ErrorCode::AmbiguousRegime));
  EXPECT_NO_THROW(classify_couplings(K("0.1", "0.1", "-0.1")));
}

TEST(Params, RejectsNonFiniteAndAllZeroInput) {
  PrecisionScope p(40);
  Couplings bad{Real(1), Real(0), Real(0)};
  mpfr_set_inf(bad.k2.raw(), 1);
  EXPECT_TRUE(throws_code([&] { classify_couplings(bad); }, ErrorCode::NonFiniteInput));
  EXPECT_TRUE(throws_code([&] { classify_couplings(K("0", "0", "0")); }, ErrorCode::InvalidInput));
}

TEST(Params, SymmetryTransforms) {
  PrecisionScope p(40);
  Couplings c = K("0.5", "0.4", "0.3");
  SymmetryImage a = symmetry_transform(c, {-1, -1, 1});
  EXPECT_EQ(a.parity, Parity::Even);
  EXPECT_TRUE(a.couplings.k1 == Real("-0.5"));
  SymmetryImage b = symmetry_transform(c, {1, -1, -1});
  EXPECT_EQ(b.parity, Parity::Alternating);
  EXPECT_EQ(b.sign(1), 1);
  EXPECT_EQ(b.sign(2), -1);
  EXPECT_EQ(symmetry_transform(c, {1, 1, 1}).parity, Parity::Even);
  EXPECT_TRUE(throws_code([&] { symmetry_transform(c, {-1, 1, 1}); }, ErrorCode::InvalidFlipPattern));
  EXPECT_TRUE(throws_code([&] { symmetry_transform(c, {-1, -1, -1}); }, ErrorCode::InvalidFlipPattern));
  EXPECT_TRUE(throws_code([&] { symmetry_transform(c, {2, 1, 1}); }, ErrorCode::InvalidFlipPattern));
}

TEST(Params, ZeroThirdCouplingIsTheSquareLattice) {
  PrecisionScope p(40);
  EXPECT_TRUE(throws_code([&] { garnier_correlations(K("0.5", "0.4", "0"), 3, 30); }, ErrorCode::SquareDiagonalLimit));
}
