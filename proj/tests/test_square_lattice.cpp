#include "support.hpp"

using namespace tricorr;
using tricorr::testing::agree;
using tricorr::testing::throws_code;

TEST(Column, RecoveryMatchesDeterminantOnBothSidesOfTheTransition) {
  const int P = 40;
  for (auto [a, b] : {std::pair{"0.3", "0.6"}, std::pair{"0.2", "0.9"}, std::pair{"0.5", "1.5"}}) {
    PrecisionScope p(P + 10);
    ColumnParams cp = ColumnParams::from_alphas(Real(a), Real(b));
    GarnierReport rep = column_correlations(cp, 8, P);
    ASSERT_TRUE(rep.converged) << a << "," << b;
    EXPECT_GE(rep.attempts.front().min_matching, P / 3.0);
    EXPECT_EQ(rep.regime, cp.k > 1 ? Regime::FerroOrdered : Regime::FerroDisordered);
    for (const Real& x : rep.irecur_residual) EXPECT_TRUE(x < Real::pow10(-P / 2));
  }
}

TEST(Column, CouplingConstructionAndOrdering) {
  PrecisionScope p(50);
  ColumnParams hot = ColumnParams::from_couplings(Real("0.2"), Real("0.15"));
  ColumnParams cold = ColumnParams::from_couplings(Real("0.9"), Real("0.7"));
  EXPECT_TRUE(hot.k < Real(1));
  EXPECT_TRUE(cold.k > Real(1));
  EXPECT_TRUE(hot.ordering_holds());
  EXPECT_TRUE(cold.ordering_holds());
  auto z = cold.singular_points();
  EXPECT_TRUE(agree(z[0] * z[3], Real(1), 45));
  EXPECT_TRUE(agree(z[1] * z[2], Real(1), 45));
  EXPECT_TRUE(throws_code([] { ColumnSystem(ColumnParams{Real(0), Real("0.5"), Real(1)}); }, ErrorCode::InvalidInput));
}

TEST(Column, IsTheLimitOfAVanishingMiddleCoupling) {
  LimitReport rep = column_limit_check(Real("0.5"), Real("0.3"), {Real("1e-3"), Real("1e-4")}, 4, 40);
  ASSERT_EQ(rep.max_diff.size(), 2u);
  EXPECT_GT(rep.order, 0.8);
  EXPECT_LT(rep.order, 1.2);
}

TEST(DPV, RecoveryMatchesDeterminant) {
  const int P = 40;
  for (const char* a : {"0.5", "2", "-0.7"}) {
    GarnierReport rep = dpv_correlations(Real(a), 10, P);
    ASSERT_TRUE(rep.converged) << a;
    EXPECT_GE(rep.attempts.front().min_matching, P / 3.0) << a;
    PrecisionScope p(P);
    for (const Real& x : rep.irecur_residual) EXPECT_TRUE(x < Real::pow10(-P / 2)) << a;
  }
}

TEST(DPV, InitialValuesFromTheFirstMoments) {
  PrecisionScope p(50);
  Real alpha("0.5");
  MomentTable t = moment_window(SquareDiagonalWeight{alpha}, -2, 2, 45);
  DPVState s = DPVSystem(alpha).init_state(t);
  ReflectionPair rp = reflection_from_determinants(t, 1);
  EXPECT_TRUE(agree(rp.r[1], (alpha - s.f / alpha) / (1 - s.f), 40));
  EXPECT_EQ(s.n, 0);
}

TEST(DPV, FrozenWeightIsRefusedAndTheDeterminantIsOne) {
  EXPECT_TRUE(throws_code([] { DPVSystem(Real(0)); }, ErrorCode::InvalidInput));
  EXPECT_TRUE(throws_code([] { dpv_correlations(Real(0), 4, 30); }, ErrorCode::InvalidInput));
  MomentTable t = moment_window(SquareDiagonalWeight{Real(0)}, -8, 8, 30);
  for (const Real& x : determinant_series(t, 8).values) EXPECT_TRUE(x == Real(1));
}

TEST(DPV, IsTheLimitOfAVanishingThirdCoupling) {
  LimitReport rep = triangular_limit_check(Real("0.6"), Real("0.5"), {Real("1e-3"), Real("1e-4")}, 4, 40);
  ASSERT_EQ(rep.max_diff.size(), 2u);
  EXPECT_GT(rep.order, 0.8);
  EXPECT_LT(rep.order, 1.2);
  EXPECT_TRUE(rep.max_diff[1] < rep.max_diff[0]);
}

TEST(Series, CoefficientsNearTheBoundary) {
  for (int N = 1; N <= 4; ++N) {
    PrecisionScope p(50);
    Real exact = boundary_series_exact(N);
    Real est = boundary_series_estimate(N, Real("1e-3"), 40);
    EXPECT_TRUE(relative_error(est, exact) < Real("0.01")) << "N=" << N << " " << est.str(10) << " vs " << exact.str(10);
  }
  PrecisionScope p(30);
  EXPECT_TRUE(agree(boundary_series_exact(0), Real(1) / 4, 28));
  EXPECT_TRUE(agree(boundary_series_exact(1), Real(3) / 64, 28));
}

TEST(Sigma, ResidualVanishesOnBothSidesOfCriticality) {
  const int P = 40;
  for (const char* t : {"0.25", "4"}) {
    for (int N : {0, 1, 3, 5}) {
      SigmaReport s = sigma_pvi_residual(Real(t), N, P);
      PrecisionScope p(P);
      EXPECT_TRUE(s.residual < Real::pow10(-P / 3)) << "t=" << t << " N=" << N << " " << s.residual.str(6);
    }
  }
}

TEST(Sigma, StencilMayNotStraddleTheCriticalPoint) {
  EXPECT_TRUE(throws_code([] { sigma_pvi_residual(Real(1), 2, 30); }, ErrorCode::StencilCrossesCritical));
  PrecisionScope p(40);
  EXPECT_TRUE(throws_code([] { sigma_pvi_residual(Real("0.99"), 2, 30, Real("0.1")); }, ErrorCode::StencilCrossesCritical));
}

TEST(Sigma, CouplingOverloadUsesTheDiagonalModulus) {
  const int P = 40;
  SigmaReport s = sigma_pvi_residual(Real("0.5"), Real("0.3"), 2, P);
  PrecisionScope p(P + 10);
  Real a = diagonal_alpha(Real("0.5"), Real("0.3"));
  EXPECT_TRUE(agree(s.t, a * a, 35));
  EXPECT_TRUE(s.residual < Real::pow10(-P / 3));
  Real k("0.3");
  Real critical = atanh(exp(-2 * k));
  EXPECT_TRUE(throws_code([&] { sigma_pvi_residual(k, critical, 2, P); }, ErrorCode::RegimeRefused));
}

TEST(Sigma, DiagonalCorrelationAtLowTemperatureIsNearItsLimit) {
  PrecisionScope p(40);
  Real t("0.01");
  Real I = diagonal_correlation(3, t, 30);
  EXPECT_TRUE(abs(I - pow(1 - t, Real(1) / 4)) < Real("1e-7"));
}
