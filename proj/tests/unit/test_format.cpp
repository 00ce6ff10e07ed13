#include <gtest/gtest.h>

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <limits>
#include <random>

#include "roundstat/errors.hpp"
#include "roundstat/format.hpp"

using namespace roundstat;

namespace {

// Scale-and-nearbyint reference, independent of the masking implementation.
double reference_round(double x, int t, int e_min) {
  if (x == 0.0) return x;
  const int e = std::max(std::ilogb(x), e_min);
  const double ulp = std::ldexp(1.0, e - t + 1);
  return std::nearbyint(x / ulp) * ulp;
}

}  // namespace

TEST(Format, PresetsMatchTable) {
  const auto f32 = make_format("fp32");
  EXPECT_EQ(f32.t, 24);
  EXPECT_NEAR(f32.u, 5.96e-8, 0.005e-8);
  EXPECT_NEAR(f32.x_min, 1.18e-38, 0.005e-38);
  EXPECT_NEAR(f32.x_max, 3.40e38, 0.005e38);
  EXPECT_EQ(f32.x_max, static_cast<double>(std::numeric_limits<float>::max()));
  EXPECT_EQ(f32.x_min, static_cast<double>(std::numeric_limits<float>::min()));

  const auto f16 = make_format("fp16");
  EXPECT_EQ(f16.t, 11);
  EXPECT_NEAR(f16.u, 4.88e-4, 0.005e-4);
  EXPECT_EQ(f16.x_max, 65504.0);
  EXPECT_NEAR(f16.x_min, 6.10e-5, 0.005e-5);

  const auto bf = make_format("bfloat16");
  EXPECT_EQ(bf.t, 8);
  EXPECT_NEAR(bf.u, 3.91e-3, 0.005e-3);
  EXPECT_NEAR(bf.x_max, 3.39e38, 0.005e38);
}

TEST(Format, Fp64UnitRoundoffIsTwoToMinus53) {
  // The table prints 4.88e-16 for fp64; u = 2^-t with t = 53 is 1.11e-16.
  const auto f = make_format("fp64");
  EXPECT_EQ(unit_roundoff(f), std::ldexp(1.0, -53));
  EXPECT_EQ(f.x_min, std::numeric_limits<double>::min());
  EXPECT_TRUE(f.is_carrier());
  EXPECT_EQ(make_format("fp64-carrier").t, 53);
}

TEST(Format, CustomParameters) {
  EXPECT_EQ(make_format(24, -126, 127).u, make_format("fp32").u);
  EXPECT_EQ(unit_roundoff(make_format(2, -4, 4)), 0.25);
  EXPECT_THROW(make_format(1, -4, 4), PreconditionError);
  EXPECT_THROW(make_format(8, 4, 4), PreconditionError);
  EXPECT_THROW(make_format(8, 5, 4), PreconditionError);
  EXPECT_THROW(make_format("fp8"), PreconditionError);
}

TEST(Format, TargetPrecisionAboveThirtyTwoRejected) {
  const auto f = make_format(40, -500, 500);
  EXPECT_THROW(round_to_format(1.1, f), PreconditionError);
}

TEST(Format, TieRoundsToEven) {
  const auto f16 = make_format("fp16");
  EXPECT_EQ(round_to_format(1.0 + std::ldexp(1.0, -11), f16), 1.0);
  // 1 + 3*2^-11 lies halfway between 1 + 2^-10 (odd) and 1 + 2^-9 (even)
  EXPECT_EQ(round_to_format(1.0 + 3 * std::ldexp(1.0, -11), f16), 1.0 + std::ldexp(1.0, -9));
  EXPECT_EQ(round_to_format(-(1.0 + std::ldexp(1.0, -11)), f16), -1.0);
  // just past the tie goes up
  EXPECT_EQ(round_to_format(1.0 + std::ldexp(1.0, -11) + std::ldexp(1.0, -40), f16),
            1.0 + std::ldexp(1.0, -10));
}

TEST(Format, PointOneMatchesBinary32Conversion) {
  EXPECT_EQ(round_to_format(0.1, make_format("fp32")), static_cast<double>(0.1f));
}

TEST(Format, Fp32AgreesWithHardwareConversion) {
  ASSERT_EQ(std::fegetround(), FE_TONEAREST);
  const auto f = make_format("fp32");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-150, 127);
  for (int i = 0; i < 200000; ++i) {
    const double x = std::ldexp(mant(rng), expo(rng));
    const float hw = static_cast<float>(x);
    if (std::isinf(hw)) continue;
    ASSERT_EQ(round_to_format(x, f), static_cast<double>(hw)) << "x = " << x;
  }
}

TEST(Format, HalfAndBfloatAgreeWithScaledReference) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mant(1.0, 2.0);
  for (const char* name : {"fp16", "bfloat16"}) {
    const auto f = make_format(name);
    std::uniform_int_distribution<int> expo(f.e_min - f.t, f.e_max - 1);
    for (int i = 0; i < 100000; ++i) {
      const double x = (i % 2 ? -1.0 : 1.0) * std::ldexp(mant(rng), expo(rng));
      ASSERT_EQ(round_to_format(x, f), reference_round(x, f.t, f.e_min)) << name << " x = " << x;
    }
  }
}

TEST(Format, SubnormalsAndUnderflow) {
  const auto f16 = make_format("fp16");
  const double tiny = std::ldexp(1.0, -24);  // smallest fp16 subnormal
  EXPECT_EQ(round_to_format(tiny, f16), tiny);
  EXPECT_EQ(round_to_format(1.4 * tiny, f16), tiny);
  EXPECT_EQ(round_to_format(1.6 * tiny, f16), 2 * tiny);
  EXPECT_EQ(round_to_format(0.5 * tiny, f16), 0.0);  // tie to even zero
  EXPECT_EQ(round_to_format(0.51 * tiny, f16), tiny);
  EXPECT_EQ(round_to_format(1e-30, f16), 0.0);
  EXPECT_TRUE(std::signbit(round_to_format(-1e-30, f16)));
}

TEST(Format, OverflowAndNaN) {
  const auto f16 = make_format("fp16");
  EXPECT_EQ(round_to_format(65504.0, f16), 65504.0);
  EXPECT_EQ(round_to_format(65519.0, f16), 65504.0);
  EXPECT_THROW(round_to_format(65520.0, f16), OverflowError);
  EXPECT_THROW(round_to_format(-1e6, f16), OverflowError);
  EXPECT_THROW(round_to_format(std::nan(""), f16), PreconditionError);
  EXPECT_THROW(round_to_format(1e39, make_format("fp32")), OverflowError);
}

TEST(Format, CarrierIsIdentity) {
  const auto f = make_format("fp64");
  for (double x : {0.1, -3.7e-310, 1e308, 1.0 / 3.0}) EXPECT_EQ(round_to_format(x, f), x);
}

// Properties over random carrier values.
TEST(FormatProperty, IdempotentMonotoneAndRelativeErrorBounded) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mant(-2.0, 2.0);
  for (const char* name : {"bfloat16", "fp16", "fp32"}) {
    const auto f = make_format(name);
    std::uniform_int_distribution<int> expo(f.e_min, f.e_max - 1);
    double prev_x = -std::numeric_limits<double>::infinity(), prev_r = prev_x;
    std::vector<double> xs;
    for (int i = 0; i < 50000; ++i) xs.push_back(std::ldexp(mant(rng), expo(rng)));
    std::sort(xs.begin(), xs.end());
    for (double x : xs) {
      const double r = round_to_format(x, f);
      ASSERT_EQ(round_to_format(r, f), r);
      if (std::abs(x) >= f.x_min) {
        ASSERT_LE(std::abs(r - x), f.u * std::abs(x)) << name << " " << x;
      }
      ASSERT_GE(r, prev_r) << "monotonicity at " << prev_x << " -> " << x;
      prev_x = x;
      prev_r = r;
    }
  }
}
