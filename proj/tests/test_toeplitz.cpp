#include "support.hpp"

using namespace tricorr;
using tricorr::testing::agree;
using tricorr::testing::K;
using tricorr::testing::throws_code;

namespace {

// Laplace expansion along the first row; exponential cost, used only as an oracle for small n.
Real cofactor_det(const std::vector<std::vector<Real>>& a) {
  const size_t n = a.size();
  if (n == 0) return Real(1);
  if (n == 1) return a[0][0];
  Real sum(0);
  for (size_t c = 0; c < n; ++c) {
    std::vector<std::vector<Real>> minor;
    for (size_t r = 1; r < n; ++r) {
      std::vector<Real> row;
      for (size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(a[r][k]);
      minor.push_back(row);
    }
    Real term = a[0][c] * cofactor_det(minor);
    sum += c % 2 == 0 ? term : -term;
  }
  return sum;
}

MomentTable window(const char* a, const char* b, const char* c, int lo, int hi, int digits) {
  Weight w = [&] {
    PrecisionScope p(digits + 15);
    return Weight(triangular_weight(K(a, b, c)));
  }();
  return moment_window(w, lo, hi, digits);
}

}  // namespace

TEST(Toeplitz, EliminationAgreesWithCofactorExpansion) {
  MomentTable t = window("0.6", "0.5", "-0.2", -6, 6, 50);
  PrecisionScope p(60);
  for (int n = 1; n <= 6; ++n) {
    for (int shift : {-1, 0, 1}) {
      std::vector<std::vector<Real>> a(static_cast<size_t>(n));
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) a[static_cast<size_t>(j)].push_back(t.at(j - k + shift));
      EXPECT_TRUE(agree(toeplitz_determinant(t, n, shift), cofactor_det(a), 45)) << "n=" << n << " shift=" << shift;
    }
  }
}

TEST(Toeplitz, FirstCorrelationIsTheZerothMoment) {
  MomentTable t = window("0.3", "0.2", "0.1", -3, 3, 40);
  CorrelationSeries s = determinant_series(t, 3);
  ASSERT_EQ(s.values.size(), 4u);
  EXPECT_TRUE(s.values[0] == Real(1));
  EXPECT_TRUE(agree(s.values[1], t.at(0), 39));
  EXPECT_EQ(s.method, CorrelationMethod::Determinant);
  EXPECT_EQ(s.precision, 40);
}

TEST(Toeplitz, RankOneMatrixIsSingular) {
  PrecisionScope p(40);
  MomentTable t(SquareDiagonalWeight{Real("0.5")}, -2, 40);
  for (int n = -2; n <= 2; ++n) t.push_back(Real(1), MomentSource::Quadrature);
  EXPECT_TRUE(throws_code([&] { toeplitz_determinant(t, 2); }, ErrorCode::SingularMatrix));
}

TEST(Toeplitz, WindowMustCoverTheMatrix) {
  MomentTable t = window("0.3", "0.2", "0.1", -2, 2, 30);
  EXPECT_TRUE(throws_code([&] { toeplitz_determinant(t, 4); }, ErrorCode::WindowTooSmall));
  EXPECT_TRUE(throws_code([&] { toeplitz_determinant(t, 3, 1); }, ErrorCode::WindowTooSmall));
  EXPECT_TRUE(throws_code([&] { determinant_series(t, -1); }, ErrorCode::InvalidInput));
}

TEST(Toeplitz, DeterminantRatioIdentity) {
  MomentTable t = window("0.5", "0.4", "0.3", -7, 7, 50);
  CorrelationSeries s = determinant_series(t, 6);
  ReflectionPair rp = reflection_from_determinants(t, 5);
  std::vector<Real> res = det_ratio_check(s, rp.r, rp.rbar);
  ASSERT_EQ(res.size(), 5u);
  for (const Real& x : res) EXPECT_TRUE(x < Real::pow10(-40));
  EXPECT_TRUE(rp.r[0] == Real(1));
  EXPECT_TRUE(rp.rbar[0] == Real(1));
}

TEST(Toeplitz, DeterminantRatioCheckOnShortInput) {
  PrecisionScope p(30);
  CorrelationSeries s{{Real(1), Real("0.5")}, CorrelationMethod::Determinant, 30};
  EXPECT_TRUE(det_ratio_check(s, {Real(1), Real("0.1")}, {Real(1), Real("0.2")}).empty());
  EXPECT_TRUE(det_ratio_check({}, {}, {}).empty());
}

TEST(Toeplitz, CorrelationsAreSymmetricInTheFirstTwoCouplings) {
  CorrelationSeries a = determinant_series(window("0.3", "0.2", "0.1", -5, 5, 50), 6);
  CorrelationSeries b = determinant_series(window("0.2", "0.3", "0.1", -5, 5, 50), 6);
  for (size_t n = 0; n < a.values.size(); ++n) EXPECT_TRUE(agree(a.values[n], b.values[n], 45)) << "n=" << n;
}

TEST(Toeplitz, SignFlipsMapCorrelations) {
  const int P = 50;
  CorrelationSeries base = determinant_series(window("0.5", "0.4", "0.3", -5, 5, P), 6);
  CorrelationSeries even = determinant_series(window("-0.5", "-0.4", "0.3", -5, 5, P), 6);
  PrecisionScope p(P);
  for (size_t n = 0; n < base.values.size(); ++n) EXPECT_TRUE(agree(base.values[n], even.values[n], 45)) << n;
}
