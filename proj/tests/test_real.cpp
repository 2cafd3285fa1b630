#include "support.hpp"

using namespace tricorr;

TEST(Real, ParsesDecimalText) {
  PrecisionScope p(40);
  Real x("0.1");
  EXPECT_EQ(x.str(5), "1.0000e-01");
  EXPECT_TRUE(Real("-2.5e3") == Real(-2500));
}

TEST(Real, RejectsMalformedText) {
  EXPECT_THROW(Real("0.1x"), std::invalid_argument);
  EXPECT_THROW(Real(""), std::invalid_argument);
  EXPECT_THROW(Real("nan"), std::invalid_argument);
}

TEST(Real, PrecisionScopeNestsAndRestores) {
  int before = working_digits();
  {
    PrecisionScope a(80);
    EXPECT_EQ(working_digits(), 80);
    {
      PrecisionScope b(120);
      EXPECT_GE(Real(1).digits(), 120);
    }
    EXPECT_EQ(working_digits(), 80);
  }
  EXPECT_EQ(working_digits(), before);
  EXPECT_THROW(PrecisionScope(2), std::invalid_argument);
}

TEST(Real, ThirdIsAccurateToWorkingPrecision) {
  PrecisionScope p(60);
  Real third = Real(1) / 3;
  EXPECT_TRUE(tricorr::testing::agree(third, "0.333333333333333333333333333333333333333333333333333333333333", 59));
  EXPECT_GT(matching_digits(third, third), 1e5);
}

TEST(Real, ComplexSquareRootOfNegative) {
  PrecisionScope p(40);
  ComplexReal z = sqrt(ComplexReal(Real(-4)));
  EXPECT_TRUE(abs(z.re) < Real::pow10(-35));
  EXPECT_TRUE(tricorr::testing::agree(abs(z.im), Real(2), 38));
}
