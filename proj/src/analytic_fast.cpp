#include <cmath>
#include <string>

#include "roundstat/analytic.hpp"
#include "roundstat/delta_model.hpp"
#include "roundstat/errors.hpp"

namespace roundstat {

namespace {

constexpr double kSeriesTol = 1e-17;

// sum_{j>=j0} C(k, j) s^(j - shift), terms descending in magnitude
double binomial_tail(long k, double s, long j0, long shift) {
  if (k < j0) return 0.0;
  // C(k, j0) s^(j0 - shift)
  double term = std::pow(s, static_cast<double>(j0 - shift));
  for (long j = 1; j <= j0; ++j) term *= static_cast<double>(k - j0 + j) / static_cast<double>(j);
  double sum = 0.0;
  for (long j = j0; j <= k; ++j) {
    sum += term;
    if (term <= kSeriesTol * sum) break;
    term *= static_cast<double>(k - j) / static_cast<double>(j + 1) * s;
  }
  return sum;
}

// (1+s)^k - 1 without cancellation
double powm1(double s, long k) { return std::expm1(static_cast<double>(k) * std::log1p(s)); }

}  // namespace

double hbar_fast(double second, double cross, long n, double s) {
  if (n < 1) throw PreconditionError("hbar: n must be at least 1");
  if (!(s > 0.0)) throw PreconditionError("hbar: sigma^2 must be positive");
  const double N = static_cast<double>(n);
  const long k = n - 1;
  double first, tail;
  if (N * s <= 0.5) {
    // (n-1)s + E2(n) + E2(n+1)/s, with E2(k) = (1+s)^k - 1 - ks
    first = (N - 1.0) * s + binomial_tail(n, s, 2, 0) + binomial_tail(n + 1, s, 2, 1);
    // ks + (2s + s^2) C(k,2) + (1+s)^2 sum_{j>=3} C(k,j) s^(j-2)
    const double K = static_cast<double>(k);
    tail = K * s + (2.0 * s + s * s) * K * (K - 1.0) / 2.0 + (1.0 + s) * (1.0 + s) * binomial_tail(k, s, 3, 2);
  } else {
    // large ns: the cancellation is mild enough for the direct form
    const double a = 1.0 + s;
    first = powm1(s, n) + a * a * powm1(s, k) / s - (N - 1.0);
    tail = a * a * powm1(s, k) / (s * s) - (N - 1.0) * a / s - N * (N - 1.0) / 2.0;
  }
  return second * first + 2.0 * cross * tail;
}

double hbar_asymptotic(double second, double cross, long n, double s) {
  if (n < 1) throw PreconditionError("hbar: n must be at least 1");
  const double N = static_cast<double>(n);
  return 0.5 * second * N * N * s + cross / 3.0 * N * N * N * s;
}

TriSolveRecursionState<double> trisolve_variances_fast(int n, long m, double s) {
  if (n < 1) throw PreconditionError("trisolve_variances: n must be positive");
  if (m <= n + 1) throw PreconditionError("trisolve_variances: m must exceed n+1");
  TriSolveRecursionState<double> st;
  for (int i = 1; i <= n; ++i) {
    const double denom = static_cast<double>(m - i - 1);
    double sum_vx = 0.0, sum = 0.0;
    for (int j = 1; j < i; ++j) {
      const double vx = st.var_x[j - 1];
      const long p = i - j + 2;
      // (1+psi)(1+s)^p - 1 = psi (1+s)^p + ((1+s)^p - 1)
      sum_vx += vx;
      sum += vx * (st.sigma_psi2[j - 1] * std::exp(p * std::log1p(s)) + powm1(s, p));
    }
    const double vx = (1.0 + sum_vx) / denom;
    const double vdx = (powm1(s, i) + sum) / denom;
    st.var_x.push_back(vx);
    st.var_dx.push_back(vdx);
    st.sigma_psi2.push_back(vdx / vx);
  }
  return st;
}

LuRecursionState<double> lu_variances_fast(int n, long m, double s) {
  if (n < 1) throw PreconditionError("lu_variances: n must be positive");
  if (m <= n + 3) throw PreconditionError("m must exceed n+3 for LU");
  const double M = static_cast<double>(m);
  const double L = std::log1p(s);
  LuRecursionState<double> st;
  for (int k = 1; k <= n; ++k) {
    // X_i - 1 and Y_i - 1 with X = (1+eps)(1+eta)(1+s)^p, split to avoid cancellation
    double sx = 0.0, sy = 0.0, sy_full = 0.0;
    for (int i = 1; i < k; ++i) {
      const double e = st.sigma_eps2[i - 1], h = st.sigma_eta2[i - 1];
      const double w = e + h + e * h;
      const long px = k - i + 1, py = k - i + 2;
      sx += w * std::exp(px * L) + powm1(s, px);
      sy += w * std::exp(py * L) + powm1(s, py);
      sy_full += (1.0 + w) * std::exp(py * L);
    }
    // g - (k - 2) = sum_{r=1}^{k-2} ((1+s)^r - 1); zero for k <= 2
    double g_excess = 0.0;
    for (long r = 1; r <= k - 2; ++r) g_excess += powm1(s, r);
    // h = (1+s) g; h - (k - 2) = sum_{r=2}^{k-1} ((1+s)^r - 1), and -s at k = 1
    double h_excess = 0.0, h = 0.0;
    if (k == 1) {
      h_excess = -s;
      h = -(1.0 + s);
    } else {
      for (long r = 2; r <= k - 1; ++r) h_excess += powm1(s, r);
      h = h_excess + static_cast<double>(k - 2);
    }

    const double vkk = (M * M - 4.0) * powm1(s, k - 1) + 3.0 * sx - 2.0 * (M + 2.0) * g_excess;
    const double vkj = (M - 2.0) * powm1(s, k - 1) + sx - 2.0 * g_excess;
    const double etad = vkk / (static_cast<double>(m - k + 1) * static_cast<double>(m - k + 3));
    const double num = (M - 6.0) * (etad * std::exp(k * L) + powm1(s, k)) + (etad * sy_full + sy) -
                       2.0 * (etad * h + h_excess);
    const double vl = num / (static_cast<double>(m - k - 1) * static_cast<double>(m - k - 3));

    st.var_du_diag.push_back(vkk);
    st.var_du_offdiag.push_back(vkj);
    st.var_dl.push_back(vl);
    st.sigma_eta2.push_back(vkj / static_cast<double>(m - k + 1));
    st.sigma_eta_diag2.push_back(etad);
    st.sigma_eps2.push_back(static_cast<double>(m - k - 1) * vl);
  }
  return st;
}

namespace {

template <class S>
TriSolveRecursionState<double> to_double_state(const TriSolveRecursionState<S>& st) {
  TriSolveRecursionState<double> out;
  for (const auto& v : st.var_x) out.var_x.push_back(to_double(v));
  for (const auto& v : st.var_dx) out.var_dx.push_back(to_double(v));
  for (const auto& v : st.sigma_psi2) out.sigma_psi2.push_back(to_double(v));
  return out;
}

std::vector<double> to_doubles(const std::vector<Rational>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.to_double());
  return out;
}

}  // namespace

TriSolveRecursionState<double> trisolve_variances(int n, long m, const FloatFormat& fmt, Method method) {
  if (method == Method::exact_rational)
    return to_double_state(trisolve_variances_exact(n, m, sigma2_exact(fmt)));
  if (method == Method::asymptotic)
    throw PreconditionError("trisolve_variances: no asymptotic form");
  return trisolve_variances_fast(n, m, delta_model(fmt).sigma2);
}

Method lu_method_for(int n, Method requested) {
  return requested == Method::exact_rational && n > kLuExactMaxN ? Method::fast_float : requested;
}

LuRecursionState<double> lu_variances(int n, long m, const FloatFormat& fmt, Method method) {
  if (method == Method::fast_float) return lu_variances_fast(n, m, delta_model(fmt).sigma2);
  if (method == Method::asymptotic) throw PreconditionError("lu_variances: no asymptotic form");
  if (n > kLuExactMaxN)
    throw UnavailableError("lu_variances: exact recursion limited to n <= " + std::to_string(kLuExactMaxN));
  const auto ex = lu_variances_exact(n, m, sigma2_exact(fmt));
  return {to_doubles(ex.var_du_diag),    to_doubles(ex.var_du_offdiag), to_doubles(ex.var_dl),
          to_doubles(ex.sigma_eta2),     to_doubles(ex.sigma_eta_diag2), to_doubles(ex.sigma_eps2)};
}

}  // namespace roundstat
