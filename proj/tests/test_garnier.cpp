#include "support.hpp"

using namespace tricorr;
using tricorr::testing::agree;
using tricorr::testing::K;
using tricorr::testing::throws_code;

// The Lax-pair states are rational functions of the bi-orthogonal data (r_n, rbar_n, lambda_n,
// lambdabar_n). Here those are formed independently from bordered Toeplitz determinants and
// compared with the iterated f_n and g_n.
TEST(Garnier, StatesMatchBiorthogonalReconstruction) {
  const int P = 50, N = 6;
  Couplings c = K("0.5", "0.4", "0.3");
  Weight w = [&] {
    PrecisionScope p(P + 15);
    return Weight(triangular_weight(c));
  }();
  MomentTable t = moment_window(w, -14, 14, P);
  PrecisionScope p(P + 10);
  LatticeData d = derive(c);
  TriangularGarnier<Real> sys(d);
  GarnierRun<Real> run = iterate(sys, t, N);

  ReflectionPair rp = reflection_from_determinants(t, N + 2);
  const auto& r = rp.r;
  const auto& rb = rp.rbar;
  std::vector<Real> lam{Real(0)}, lamb{Real(0)};
  for (int n = 0; n <= N + 1; ++n) {
    lam.push_back(lam.back() + r[n + 1] * rb[n]);
    lamb.push_back(lamb.back() + rb[n + 1] * r[n]);
  }
  const Real &e1 = d.e[1], &e3 = d.e[3], &e4 = d.e[4], &m1 = d.m[1], &m3 = d.m[3];
  const std::array<Real, 4> xi{d.zeta[3].re, d.zeta[2].re, d.zeta[0].re, d.zeta[1].re};

  for (int n = 1; n <= 4; ++n) {
    Real th0 = (n * e3 - m3 + e4 * ((n + 1) * lamb[n + 1] - (n - 1) * (lamb[n - 1] + r[n - 1] / r[n]))) * r[n] / r[n + 1];
    Real th1 = -(n + 1) * e1 - m1 + (n + 2) * (r[n + 2] / r[n + 1] - lam[n + 2]) + n * lam[n];
    auto Th = [&](const Real& z) { return -n * e4 * (r[n] / r[n + 1]) / z + th0 + th1 * z + (n + 1) * z * z; };
    const GarnierState<Real>& s = run.states[static_cast<size_t>(n)];
    ASSERT_EQ(s.n, n);
    for (int j = 0; j < 3; ++j) {
      Real f = xi[j] / xi[3] * Th(xi[j]) / Th(xi[3]);
      EXPECT_TRUE(agree(s.f[j], f, 30)) << "f" << j + 1 << " at n=" << n;
    }
    Real g1 = n * e3 - m3 + e4 * ((n + 1) * lamb[n + 1] - n * (lamb[n] + r[n] / r[n + 1]));
    Real g3 = -e1 - m1 + (n + 1) * lam[n + 1] - (n + 2) * (lam[n + 2] - r[n + 2] / r[n + 1]);
    EXPECT_TRUE(agree(s.g[0], g1, 30)) << "g1 at n=" << n;
    EXPECT_TRUE(agree(s.g[2], g3, 30)) << "g3 at n=" << n;
  }
  for (int n = 1; n <= N; ++n) {
    EXPECT_TRUE(agree(run.recovery[static_cast<size_t>(n)].r, r[n], 30)) << "r at n=" << n;
    EXPECT_TRUE(agree(run.recovery[static_cast<size_t>(n)].rbar, rb[n], 30)) << "rbar at n=" << n;
  }
}

TEST(Garnier, AgreesWithDeterminantAcrossTheGrid) {
  const int P = 40;
  for (const GridPoint& g : verification_grid()) {
    PrecisionScope p(P);
    GarnierReport rep = garnier_correlations(g.couplings(), 8, P);
    EXPECT_EQ(rep.regime, g.expected) << g.label();
    ASSERT_TRUE(rep.converged) << g.label();
    EXPECT_EQ(rep.attempts.size(), 1u) << g.label();
    EXPECT_GE(rep.attempts.front().min_matching, P / 3.0) << g.label();
    for (const Real& x : rep.irecur_residual) EXPECT_TRUE(x < Real::pow10(-P / 2)) << g.label();
    if (rep.complex_engine) EXPECT_TRUE(rep.max_imag < Real::pow10(-P / 2)) << g.label();
  }
}

TEST(Garnier, ComplexDiscriminantIsEitherHandledOrRefused) {
  const int P = 40;
  int complex_points = 0;
  for (const GridPoint& g : verification_grid()) {
    PrecisionScope p(P);
    if (!derive(g.couplings()).complex_discriminant()) continue;
    ++complex_points;
    GarnierOptions strict;
    strict.allow_complex = false;
    EXPECT_TRUE(throws_code([&] { garnier_correlations(g.couplings(), 4, P, strict); }, ErrorCode::ComplexDiscriminant))
        << g.label();
    EXPECT_TRUE(throws_code([&] { TriangularGarnier<Real>{derive(g.couplings())}; }, ErrorCode::ComplexDiscriminant));
    EXPECT_TRUE(garnier_correlations(g.couplings(), 4, P).complex_engine);
  }
  EXPECT_GT(complex_points, 0);
}

TEST(Garnier, CriticalPointsAreRefusedWithTheirRegime) {
  for (const detail::CriticalPoint& cp : detail::critical_points()) {
    try {
      garnier_correlations(cp.c, 4, 40);
      ADD_FAILURE() << cp.label << " was not refused";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::RegimeRefused) << cp.label;
      EXPECT_NE(e.detail().find(std::string("regime=") + to_string(cp.expected)), std::string::npos) << e.what();
    }
  }
}

TEST(Garnier, OversizedGuardTripsAtTheFirstCheck) {
  GarnierOptions opt;
  opt.tol_guard = 1e6;
  try {
    garnier_correlations(K("0.5", "0.4", "0.3"), 4, 40, opt);
    ADD_FAILURE() << "no guard fired";
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::InitDenominatorZero || e.code() == ErrorCode::GuardBracketZero ||
                e.code() == ErrorCode::GuardSZero || e.code() == ErrorCode::ZeroF)
        << e.what();
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos) << e.what();
  }
}

TEST(Garnier, EscalatesThroughThreePrecisionsWhenTheTargetIsOutOfReach) {
  GarnierOptions opt;
  const int P = 40;
  opt.required_digits = P - 1;
  GarnierReport rep = garnier_correlations(K("0.3", "0.2", "0.1"), 10, P, opt);
  ASSERT_EQ(rep.attempts.size(), 3u);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.attempts[0].precision, P);
  EXPECT_EQ(rep.attempts[1].precision, 2 * P);
  EXPECT_EQ(rep.attempts[2].precision, 4 * P);
  for (const auto& a : rep.attempts) {
    EXPECT_FALSE(a.accepted);
    EXPECT_EQ(a.digit_loss.size(), 11u);
  }
}

TEST(Garnier, RecoveryDualRoutesAgree) {
  const int P = 50;
  GarnierReport rep = garnier_correlations(K("0.5", "0.4", "0.3"), 8, P);
  ASSERT_TRUE(rep.converged);
  PrecisionScope p(P);
  EXPECT_TRUE(rep.max_rbar_gap < Real::pow10(-P / 2));
  ASSERT_EQ(rep.rbar_dual.size(), rep.rbar.size());
}

TEST(Garnier, NegativeOrderIsRejected) {
  EXPECT_TRUE(throws_code([&] { garnier_correlations(K("0.5", "0.4", "0.3"), -1, 30); }, ErrorCode::InvalidInput));
}

TEST(Garnier, CorruptedMomentIsDetected) {
  GarnierOptions opt;
  opt.max_escalations = 0;
  opt.moment_hook = [](MomentTable& t) { t.set(3, t.at(3) * (1 + Real::pow10(-20))); };
  GarnierReport rep = garnier_correlations(K("0.5", "0.4", "0.3"), 8, 50, opt);
  PrecisionScope p(50);
  Real worst(0);
  for (const Real& x : rep.irecur_residual) worst = max(worst, x);
  EXPECT_TRUE(worst > Real::pow10(-30)) << worst.str(6);
}
