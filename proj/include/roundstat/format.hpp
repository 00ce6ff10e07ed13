#pragma once

#include <string>
#include <string_view>

namespace roundstat {

// Binary floating-point format with t significand bits (implicit bit
// included). Values are always held in a double carrier.
struct FloatFormat {
  std::string name;
  int t = 53;
  int e_min = -1022;
  int e_max = 1023;
  double u = 0x1p-53;      // 2^-t
  double x_min = 0x1p-1022;
  double x_max = 0x1.fffffffffffffp1023;

  bool is_carrier() const noexcept { return t >= 53; }
};

// Largest precision accepted as a rounding target; the carrier must be
// strictly wider.
inline constexpr int kMaxTargetPrecision = 32;

// "bfloat16", "fp16", "fp32", "fp64" (alias "fp64-carrier").
FloatFormat make_format(std::string_view name);
FloatFormat make_format(int t, int e_min, int e_max, std::string name = "custom");

double unit_roundoff(const FloatFormat& fmt) noexcept;

// Round-to-nearest, ties to even. Gradual underflow; throws OverflowError
// past x_max and PreconditionError on NaN. Identity for the carrier.
double round_to_format(double x, const FloatFormat& fmt);

}  // namespace roundstat
