#pragma once

#include <string>
#include <vector>

#include "roundstat/distributions.hpp"
#include "roundstat/format.hpp"
#include "roundstat/rational.hpp"

namespace roundstat {

enum class Method { exact_rational, fast_float, asymptotic };
const char* method_name(Method m) noexcept;
Method parse_method(std::string_view name);

// Largest n the rational evaluator accepts.
inline constexpr long kMaxRationalN = 1'000'000;

struct InputMoments {
  Rational mean;
  Rational variance;
};
InputMoments moments_of(const ScalarDistribution& d);

// Second-order moments of the summands z_k = x_k y_k: E(z^2) and E(z_j z_k)
// for j != k. Independent inputs give (tau, mx^2 my^2).
struct ProductMoments {
  Rational second;
  Rational cross;
};

Rational tau(const Rational& mx, const Rational& vx, const Rational& my, const Rational& vy);
ProductMoments product_moments(const InputMoments& x, const InputMoments& y);

// Variance of the left-to-right accumulation error with per-op variance s.
Rational hbar_exact(const ProductMoments& z, long n, const Rational& sigma2);
double hbar_fast(double second, double cross, long n, double sigma2);
double hbar_asymptotic(double second, double cross, long n, double sigma2);

struct MomentPrediction {
  std::string kernel = "dot";
  long n = 0;
  long m = 0;
  long p = 0;
  std::string element;
  std::string format;
  std::string dist_x;
  std::string dist_y;
  double expectation = 0.0;
  double variance = 0.0;
  Method method = Method::exact_rational;
};
std::string to_json(const MomentPrediction& p);
std::string to_json(const std::vector<MomentPrediction>& ps);

MomentPrediction inner_variance(const ScalarDistribution& x, const ScalarDistribution& y, long n,
                                const FloatFormat& fmt, Method method);
inline MomentPrediction inner_variance_exact(const ScalarDistribution& x, const ScalarDistribution& y,
                                             long n, const FloatFormat& fmt) {
  return inner_variance(x, y, n, fmt, Method::exact_rational);
}
inline MomentPrediction inner_variance_asymptotic(const ScalarDistribution& x,
                                                  const ScalarDistribution& y, long n,
                                                  const FloatFormat& fmt) {
  return inner_variance(x, y, n, fmt, Method::asymptotic);
}

// R = E(dy dy^T) (matvec) or E(dC dC^T) (matmul): constant diagonal, zero
// off the diagonal.
struct AutocorrDescription {
  long dim = 0;
  double diagonal = 0.0;
  double off_diagonal = 0.0;
  Method method = Method::exact_rational;
};
AutocorrDescription matvec_autocorr(const ScalarDistribution& a, const ScalarDistribution& b, long m,
                                    long n, const FloatFormat& fmt, Method method);
AutocorrDescription matmul_autocorr(const ScalarDistribution& a, const ScalarDistribution& b, long m,
                                    long n, long p, const FloatFormat& fmt, Method method);

// Forward substitution with a Bartlett factor of W_n(m, I) and N(0,1)
// right-hand side; index i-1 holds row i.
template <class S>
struct TriSolveRecursionState {
  std::vector<S> var_x;
  std::vector<S> var_dx;
  std::vector<S> sigma_psi2;  // var_dx / var_x
};

TriSolveRecursionState<Rational> trisolve_variances_exact(int n, long m, const Rational& sigma2);
TriSolveRecursionState<double> trisolve_variances_fast(int n, long m, double sigma2);
TriSolveRecursionState<double> trisolve_variances(int n, long m, const FloatFormat& fmt, Method method);
// Standalone closed form for row 3.
Rational trisolve_x3_example(long m, const Rational& sigma2);

// Unpivoted Doolittle LU of W_n(m, I); index k-1 holds row/column k.
template <class S>
struct LuRecursionState {
  std::vector<S> var_du_diag;      // V(du_kk)
  std::vector<S> var_du_offdiag;   // V(du_kj), j > k
  std::vector<S> var_dl;           // V(dl_ik), i > k
  std::vector<S> sigma_eta2;       // V(du_kj) / (m-k+1)
  std::vector<S> sigma_eta_diag2;  // V(du_kk) / ((m-k+1)(m-k+3))
  std::vector<S> sigma_eps2;       // (m-k-1) V(dl_ik)
};

LuRecursionState<Rational> lu_variances_exact(int n, long m, const Rational& sigma2);
LuRecursionState<double> lu_variances_fast(int n, long m, double sigma2);
// Exact LU states roughly triple in size per step (n = 12 is ~17M digits),
// so the rational path stops here.
inline constexpr int kLuExactMaxN = 10;

// Picks exact_rational when n allows it, otherwise fast_float.
Method lu_method_for(int n, Method requested);
LuRecursionState<double> lu_variances(int n, long m, const FloatFormat& fmt, Method method);

struct LuK3Example {
  Rational u33;
  Rational u3j;  // j > 3
  Rational li3;  // i > 3
};
// Standalone closed forms for k = 3.
LuK3Example lu_k3_examples(long m, const Rational& sigma2);

}  // namespace roundstat
