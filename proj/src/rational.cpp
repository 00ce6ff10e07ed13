#include "roundstat/rational.hpp"

#include <cmath>
#include <cstdint>

#include "roundstat/errors.hpp"

namespace roundstat {

Rational::Rational(long num, long den) {
  if (den == 0) throw PreconditionError("Rational: zero denominator");
  q_ = mpq_class(num, den);
  q_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.q_ == 0) throw PreconditionError("Rational: division by zero");
  q_ /= o.q_;
  return *this;
}

Rational Rational::pow2(long e) {
  mpz_class one = 1;
  mpz_class p;
  mpz_mul_2exp(p.get_mpz_t(), one.get_mpz_t(), static_cast<mp_bitcnt_t>(e < 0 ? -e : e));
  return e < 0 ? Rational(mpq_class(one, p)) : Rational(mpq_class(p));
}

Rational Rational::from_double(double x) {
  if (!std::isfinite(x)) throw PreconditionError("Rational: non-finite double");
  int e = 0;
  const double m = std::frexp(x, &e);
  // m * 2^53 is an integer
  const auto sig = static_cast<std::int64_t>(std::ldexp(m, 53));
  return Rational(static_cast<long>(sig)) * pow2(e - 53);
}

Rational Rational::parse(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw PreconditionError("Rational: empty number");
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw PreconditionError("Rational: cannot parse '" + s + "'");
    if (q.get_den() == 0) throw PreconditionError("Rational: zero denominator");
    q.canonicalize();
    return Rational(q);
  }
  long exp10 = 0;
  if (const auto epos = s.find_first_of("eE"); epos != std::string::npos) {
    try {
      exp10 = std::stol(s.substr(epos + 1));
    } catch (const std::exception&) {
      throw PreconditionError("Rational: cannot parse '" + s + "'");
    }
    s.erase(epos);
  }
  if (const auto dot = s.find('.'); dot != std::string::npos) {
    exp10 -= static_cast<long>(s.size() - dot - 1);
    s.erase(dot, 1);
  }
  mpz_class digits;
  if (s == "-" || s == "+" || digits.set_str(s[0] == '+' ? s.substr(1) : s, 10) != 0)
    throw PreconditionError("Rational: cannot parse '" + std::string(text) + "'");
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
  mpq_class q = exp10 < 0 ? mpq_class(digits, scale) : mpq_class(digits * scale);
  q.canonicalize();
  return Rational(q);
}

double Rational::to_double() const {
  if (q_ == 0) return 0.0;
  mpz_class a = abs(q_.get_num());
  const mpz_class& b = q_.get_den();

  // Scale so the integer quotient has 55 or 56 bits, then round to 53 with a
  // sticky bit from the remainder.
  const long la = static_cast<long>(mpz_sizeinbase(a.get_mpz_t(), 2));
  const long lb = static_cast<long>(mpz_sizeinbase(b.get_mpz_t(), 2));
  const long s = 55 + lb - la;
  if (s > 0)
    mpz_mul_2exp(a.get_mpz_t(), a.get_mpz_t(), static_cast<mp_bitcnt_t>(s));
  mpz_class den = b;
  if (s < 0)
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-s));
  mpz_class quot, rem;
  mpz_tdiv_qr(quot.get_mpz_t(), rem.get_mpz_t(), a.get_mpz_t(), den.get_mpz_t());

  const long lq = static_cast<long>(mpz_sizeinbase(quot.get_mpz_t(), 2));
  const long drop = lq - 53;
  const std::uint64_t qv = mpz_get_ui(quot.get_mpz_t());
  std::uint64_t keep = qv >> drop;
  const std::uint64_t low = qv & ((1ULL << drop) - 1);
  const std::uint64_t half = 1ULL << (drop - 1);
  const bool sticky = rem != 0;
  if (low > half || (low == half && (sticky || (keep & 1ULL)))) ++keep;
  const double mag = std::ldexp(static_cast<double>(keep), static_cast<int>(drop - s));
  return sgn(q_) < 0 ? -mag : mag;
}

Rational pow(const Rational& base, long k) {
  if (k < 0) return Rational(1) / pow(base, -k);
  // powers of a canonical num/den stay coprime
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.raw().get_num_mpz_t(), static_cast<unsigned long>(k));
  mpz_pow_ui(den.get_mpz_t(), base.raw().get_den_mpz_t(), static_cast<unsigned long>(k));
  return Rational(mpq_class(num, den));
}

Rational abs(const Rational& x) { return x.sign() < 0 ? -x : x; }

}  // namespace roundstat
