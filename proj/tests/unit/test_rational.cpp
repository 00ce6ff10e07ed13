#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "roundstat/errors.hpp"
#include "roundstat/rational.hpp"

using namespace roundstat;

TEST(Rational, ParseForms) {
  EXPECT_EQ(Rational::parse("3"), Rational(3));
  EXPECT_EQ(Rational::parse("-1.25"), Rational(-5, 4));
  EXPECT_EQ(Rational::parse("1/3"), Rational(1, 3));
  EXPECT_EQ(Rational::parse("2.5e-3"), Rational(1, 400));
  EXPECT_EQ(Rational::parse("4/6"), Rational(2, 3));
  EXPECT_THROW(Rational::parse(""), PreconditionError);
  EXPECT_THROW(Rational::parse("abc"), PreconditionError);
  EXPECT_THROW(Rational::parse("1/0"), PreconditionError);
}

TEST(Rational, ArithmeticAndOrdering) {
  const Rational a(1, 3), b(1, 6);
  EXPECT_EQ(a + b, Rational(1, 2));
  EXPECT_EQ(a - b, b);
  EXPECT_EQ(a * b, Rational(1, 18));
  EXPECT_EQ(a / b, Rational(2));
  EXPECT_LT(b, a);
  EXPECT_EQ(-a, Rational(-1, 3));
  EXPECT_THROW(a / Rational(0), PreconditionError);
}

TEST(Rational, PowersIncludingNegative) {
  EXPECT_EQ(pow(Rational(2, 3), 3), Rational(8, 27));
  EXPECT_EQ(pow(Rational(2, 3), 0), Rational(1));
  EXPECT_EQ(pow(Rational(2, 3), -2), Rational(9, 4));
  EXPECT_EQ(Rational::pow2(-3), Rational(1, 8));
  EXPECT_EQ(Rational::pow2(10), Rational(1024));
}

TEST(Rational, FromDoubleIsExact) {
  EXPECT_EQ(Rational::from_double(0.75), Rational(3, 4));
  EXPECT_EQ(Rational::from_double(std::ldexp(1.0, -1074)), Rational::pow2(-1074));
  EXPECT_THROW(Rational::from_double(std::nan("")), PreconditionError);
}

TEST(Rational, ToDoubleCorrectlyRounded) {
  EXPECT_EQ(Rational(1, 3).to_double(), 1.0 / 3.0);
  EXPECT_EQ(Rational(2, 3).to_double(), 2.0 / 3.0);
  EXPECT_EQ(Rational(-1, 10).to_double(), -0.1);
  // 1 + 2^-53 is a tie: rounds to the even neighbour 1
  EXPECT_EQ((Rational(1) + Rational::pow2(-53)).to_double(), 1.0);
  EXPECT_EQ((Rational(1) + Rational::pow2(-53) + Rational::pow2(-200)).to_double(), 1.0 + std::ldexp(1.0, -52));
  EXPECT_EQ((Rational(1) + 3 * Rational::pow2(-53)).to_double(), 1.0 + std::ldexp(1.0, -51));
}

// Division of two doubles is correctly rounded by IEEE; so must be p/q.
TEST(RationalProperty, QuotientMatchesHardwareDivision) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> v(-(1L << 52), 1L << 52);
  for (int i = 0; i < 20000; ++i) {
    const long p = v(rng), q = v(rng);
    if (q == 0) continue;
    ASSERT_EQ(Rational(p, q).to_double(), static_cast<double>(p) / static_cast<double>(q)) << p << "/" << q;
  }
}

TEST(RationalProperty, RoundTripThroughDouble) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-1000, 1000);
  for (int i = 0; i < 20000; ++i) {
    const double x = std::ldexp(mant(rng), expo(rng));
    ASSERT_EQ(Rational::from_double(x).to_double(), x);
  }
}
