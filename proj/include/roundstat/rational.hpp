#pragma once

#include <gmpxx.h>

#include <compare>
#include <string>
#include <string_view>

namespace roundstat {

// Exact rational scalar backed by GMP. Conversion to double is correctly
// rounded (nearest, ties to even).
class Rational {
 public:
  Rational() = default;
  Rational(long v) : q_(v) {}  // NOLINT: implicit from integers is intended
  Rational(long num, long den);
  explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

  // Accepts "3", "-1.25", "1/3", "2.5e-3"
  static Rational parse(std::string_view text);
  // Exact value of a finite double.
  static Rational from_double(double x);
  static Rational pow2(long e);

  double to_double() const;
  std::string str() const { return q_.get_str(); }
  int sign() const { return sgn(q_); }
  const mpq_class& raw() const { return q_; }

  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.q_)); }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  mpq_class q_;
};

// Integer powers; negative exponents invert.
Rational pow(const Rational& base, long k);
Rational abs(const Rational& x);
inline double to_double(const Rational& x) { return x.to_double(); }
inline double to_double(double x) { return x; }

}  // namespace roundstat
