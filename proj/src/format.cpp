#include "roundstat/format.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

#include "roundstat/errors.hpp"

namespace roundstat {

namespace {

constexpr std::uint64_t kSignMask = 0x8000000000000000ULL;
constexpr std::uint64_t kFracMask = 0x000fffffffffffffULL;

// 2^e as a double, exact for normal exponents.
double pow2(int e) {
  if (e >= -1022 && e <= 1023)
    return std::bit_cast<double>(static_cast<std::uint64_t>(e + 1023) << 52);
  return std::ldexp(1.0, e);
}

}  // namespace

FloatFormat make_format(int t, int e_min, int e_max, std::string name) {
  if (t < 2) throw PreconditionError("make_format: t must be at least 2");
  if (t > 53) throw PreconditionError("make_format: t cannot exceed the 53-bit carrier");
  if (e_min >= e_max) throw PreconditionError("make_format: e_min must be below e_max");
  if (e_min < -1022 || e_max > 1023)
    throw PreconditionError("make_format: exponent range exceeds the carrier");

  FloatFormat f;
  f.name = std::move(name);
  f.t = t;
  f.e_min = e_min;
  f.e_max = e_max;
  f.u = pow2(-t);
  f.x_min = pow2(e_min);
  // (2 - 2^(1-t)) * 2^e_max, written so it never overflows the carrier
  f.x_max = (1.0 - pow2(-t)) * pow2(e_max) * 2.0;
  return f;
}

FloatFormat make_format(std::string_view name) {
  if (name == "bfloat16") return make_format(8, -126, 127, "bfloat16");
  if (name == "fp16") return make_format(11, -14, 15, "fp16");
  if (name == "fp32") return make_format(24, -126, 127, "fp32");
  if (name == "fp64" || name == "fp64-carrier") return make_format(53, -1022, 1023, "fp64");
  throw PreconditionError("make_format: unknown format '" + std::string(name) + "'");
}

double unit_roundoff(const FloatFormat& fmt) noexcept { return fmt.u; }

double round_to_format(double x, const FloatFormat& fmt) {
  if (std::isnan(x)) throw PreconditionError("round_to_format: NaN input");
  if (std::isinf(x)) throw OverflowError("round_to_format: infinite input");
  if (fmt.is_carrier()) return x;
  if (fmt.t > kMaxTargetPrecision)
    throw PreconditionError("round_to_format: target precision must not exceed 32 bits");
  if (x == 0.0) return x;

  const auto bits = std::bit_cast<std::uint64_t>(x);
  const bool negative = (bits & kSignMask) != 0;
  const int biased = static_cast<int>((bits >> 52) & 0x7ff);

  std::uint64_t sig = bits & kFracMask;
  int e = -1022;
  if (biased != 0) {
    sig |= 1ULL << 52;
    e = biased - 1023;
  }

  // value = sig * 2^(e-52); the target quantum is 2^(max(e, e_min) - t + 1)
  const int quantum = (e > fmt.e_min ? e : fmt.e_min) - fmt.t + 1;
  const int shift = quantum - (e - 52);

  double mag;
  if (shift >= 64) {
    mag = 0.0;  // below half the smallest subnormal
  } else {
    std::uint64_t keep = sig >> shift;
    const std::uint64_t rem = sig & ((1ULL << shift) - 1);
    const std::uint64_t half = 1ULL << (shift - 1);
    if (rem > half || (rem == half && (keep & 1ULL))) ++keep;
    mag = static_cast<double>(keep) * pow2(quantum);
  }
  if (mag > fmt.x_max)
    throw OverflowError("round_to_format: result exceeds x_max of " + fmt.name);
  return negative ? -mag : mag;
}

}  // namespace roundstat
