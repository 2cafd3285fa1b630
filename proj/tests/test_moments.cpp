#include "support.hpp"

using namespace tricorr;
using tricorr::testing::agree;
using tricorr::testing::K;
using tricorr::testing::throws_code;

namespace {

// Fixed 2^16-node trapezoid at 70 digits on the cosine-sum form of the symbol, (K1,K2,K3) = (0.3,0.2,0.1).
const char* kWm1 = "-0.929394239268685460112328580004144580582219309096252085626167";
const char* kW0 = "0.26809126768884216927136266141658220487053858992593136185005";
const char* kW1 = "0.0309856379903639960461825946688369989487026744359639176908401";
const char* kW5 = "0.000348166652205829412938755094800714236349168110132141650989616";

Weight tri(const char* a, const char* b, const char* c, int digits) {
  PrecisionScope p(digits + 15);
  return triangular_weight(K(a, b, c));
}

}  // namespace

TEST(Moments, QuadratureMatchesFrozenValues) {
  MomentTable t = moment_window(tri("0.3", "0.2", "0.1", 60), -1, 5, 60);
  PrecisionScope p(70);
  EXPECT_TRUE(agree(t.at(-1), kWm1, 57));
  EXPECT_TRUE(agree(t.at(0), kW0, 57));
  EXPECT_TRUE(agree(t.at(1), kW1, 57));
  EXPECT_TRUE(agree(t.at(5), kW5, 55));
  EXPECT_EQ(t.source(3), MomentSource::Quadrature);
  EXPECT_EQ(t.scheme(), QuadratureScheme::Trapezoid);
}

TEST(Moments, LinearRecurrenceResidualIsAtRoundoff) {
  for (const char* k3 : {"0.1", "-0.2"}) {
    MomentTable t = moment_window(tri("0.6", "0.5", k3, 50), -6, 6, 50);
    PrecisionScope p(60);
    for (int q = -2; q <= 5; ++q) EXPECT_TRUE(recurrence_residual(t, q) < Real::pow10(-40)) << "relation " << q;
  }
}

TEST(Moments, RecurrenceExtensionAgreesWithQuadrature) {
  Weight w = tri("0.5", "0.4", "0.3", 60);
  MomentTable seed = moment_window(w, -1, 2, 60);
  MomentTable ext = extend_by_recurrence(seed, -5, 10);
  MomentTable quad = moment_window(w, -5, 10, 60);
  PrecisionScope p(70);
  for (int n = -5; n <= 10; ++n) {
    if (n >= -1 && n <= 2) {
      EXPECT_EQ(ext.source(n), MomentSource::Quadrature);
      continue;
    }
    EXPECT_EQ(ext.source(n), MomentSource::LinearRecurrence);
    EXPECT_TRUE(abs(ext.at(n) - quad.at(n)) <= Real::pow10(-40) * (abs(quad.at(n)) + Real::pow10(-10))) << "n=" << n;
  }
}

TEST(Moments, RecurrenceNeverProducesTheZerothMoment) {
  Weight w = tri("0.5", "0.4", "0.3", 40);
  MomentTable upper = moment_window(w, 1, 4, 40);
  EXPECT_TRUE(throws_code([&] { extend_by_recurrence(upper, -1, 4); }, ErrorCode::OrderDropIndex));
  MomentTable diag = moment_window(SquareDiagonalWeight{Real("0.5")}, 1, 3, 40);
  EXPECT_TRUE(throws_code([&] { extend_by_recurrence(diag, -1, 3); }, ErrorCode::MissingMoments));
}

TEST(Moments, ExtensionNeedsAFullStencil) {
  MomentTable t = moment_window(tri("0.5", "0.4", "0.3", 40), 1, 2, 40);
  EXPECT_TRUE(throws_code([&] { extend_by_recurrence(t, 1, 6); }, ErrorCode::WindowTooSmall));
  EXPECT_NO_THROW(extend_by_recurrence(t, 1, 2));
}

TEST(Moments, TrapezoidRefusesAWeightOnItsCriticalCircle) {
  PrecisionScope p(60);
  Real k("0.3");
  Real u = exp(-2 * k);
  Real curie = -log((1 - u * u) / (2 * u)) / 2;
  Weight w = triangular_weight({k, k, curie});
  QuadratureOptions no_tanh_sinh;
  no_tanh_sinh.tanh_sinh_below = 0;
  EXPECT_TRUE(throws_code([&] { moment_window(w, -2, 2, 40, no_tanh_sinh); }, ErrorCode::DenominatorVanishes));
  MomentTable t = moment_window(w, -2, 2, 40);
  EXPECT_EQ(t.scheme(), QuadratureScheme::TanhSinh);
}

TEST(Moments, ColumnWeightReflection) {
  PrecisionScope p(50);
  Real a1("0.3"), a2("0.7");
  MomentTable f = moment_window(SquareColumnWeight{a1, a2}, -4, 4, 45);
  MomentTable b = moment_window(SquareColumnWeight{a2, a1}, -4, 4, 45);
  for (int n = -4; n <= 4; ++n) EXPECT_TRUE(agree(f.at(n), b.at(-n), 42)) << "n=" << n;
}

TEST(Moments, ColumnModulusIsProductOfHyperbolicSines) {
  PrecisionScope p(50);
  for (auto [a, b] : {std::pair{"0.5", "0.3"}, std::pair{"0.2", "0.15"}, std::pair{"0.9", "0.7"}}) {
    Real k1(a), k2(b);
    Real k = column_modulus(column_weight(k1, k2));
    EXPECT_TRUE(agree(k, sinh(2 * k1) * sinh(2 * k2), 45));
  }
}

TEST(Moments, FrozenDiagonalWeightIsExact) {
  MomentTable t = moment_window(SquareDiagonalWeight{Real(0)}, -6, 6, 40);
  for (int n = -6; n <= 6; ++n) EXPECT_TRUE(t.at(n) == Real(n == 0 ? 1 : 0)) << "n=" << n;
}

TEST(Moments, DiagonalRecurrenceResidual) {
  MomentTable t = moment_window(SquareDiagonalWeight{Real("0.4")}, -6, 6, 50);
  PrecisionScope p(60);
  for (int q = -4; q <= 5; ++q) EXPECT_TRUE(recurrence_residual(t, q) < Real::pow10(-40)) << "relation " << q;
}

TEST(Moments, EmptyWindowIsRejected) {
  EXPECT_TRUE(throws_code([&] { moment_window(SquareDiagonalWeight{Real("0.4")}, 2, 1, 30); }, ErrorCode::InvalidInput));
}
