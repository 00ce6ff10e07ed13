#include "roundstat/analytic.hpp"

#include <json.hpp>

#include "roundstat/delta_model.hpp"
#include "roundstat/errors.hpp"

namespace roundstat {

const char* method_name(Method m) noexcept {
  switch (m) {
    case Method::exact_rational: return "exact_rational";
    case Method::fast_float: return "fast_float";
    case Method::asymptotic: return "asymptotic";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "exact" || name == "exact_rational") return Method::exact_rational;
  if (name == "fast" || name == "fast_float") return Method::fast_float;
  if (name == "asymptotic") return Method::asymptotic;
  throw PreconditionError("unknown method '" + std::string(name) + "'");
}

InputMoments moments_of(const ScalarDistribution& d) { return {d.mean_exact(), d.variance_exact()}; }

Rational tau(const Rational& mx, const Rational& vx, const Rational& my, const Rational& vy) {
  if (vx.sign() < 0 || vy.sign() < 0) throw PreconditionError("tau: negative variance");
  const Rational mx2 = mx * mx, my2 = my * my;
  return vx * vy + vx * my2 + vy * mx2 + mx2 * my2;
}

ProductMoments product_moments(const InputMoments& x, const InputMoments& y) {
  const Rational cross = x.mean * x.mean * y.mean * y.mean;
  return {tau(x.mean, x.variance, y.mean, y.variance), cross};
}

Rational hbar_exact(const ProductMoments& z, long n, const Rational& sigma2) {
  if (n < 1) throw PreconditionError("hbar: n must be at least 1");
  if (n > kMaxRationalN) throw PreconditionError("hbar: rational evaluation is capped at n = 10^6");
  if (sigma2.sign() <= 0) throw PreconditionError("hbar: sigma^2 must be positive");
  const Rational a = Rational(1) + sigma2;
  const Rational an = pow(a, n);
  const Rational an1 = an / a;
  const Rational N(n);
  const Rational first = an + a * a * (an1 - Rational(1)) / sigma2 - N;
  const Rational second = a * a * (an1 - Rational(1)) / (sigma2 * sigma2) -
                          (N - Rational(1)) * a / sigma2 - N * (N - Rational(1)) / Rational(2);
  return z.second * first + Rational(2) * z.cross * second;
}

std::string to_json(const MomentPrediction& p) {
  nlohmann::ordered_json j;
  j["kernel"] = p.kernel;
  j["n"] = p.n;
  j["m"] = p.m;
  if (p.kernel == "matmul") j["p"] = p.p;
  if (!p.element.empty()) j["element"] = p.element;
  j["format"] = p.format;
  j["dist_x"] = p.dist_x;
  j["dist_y"] = p.dist_y;
  j["expectation"] = p.expectation;
  j["variance"] = p.variance;
  j["method"] = method_name(p.method);
  return j.dump();
}

std::string to_json(const std::vector<MomentPrediction>& ps) {
  std::string out = "[";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ",";
    out += to_json(ps[i]);
  }
  return out + "]";
}

MomentPrediction inner_variance(const ScalarDistribution& x, const ScalarDistribution& y, long n,
                                const FloatFormat& fmt, Method method) {
  if (n < 1) throw PreconditionError("inner_variance: n must be at least 1");
  MomentPrediction p;
  p.kernel = "dot";
  p.n = n;
  p.format = fmt.name;
  p.dist_x = x.spec();
  p.dist_y = y.spec();
  p.method = method;
  const ProductMoments z = product_moments(moments_of(x), moments_of(y));
  const double s = delta_model(fmt).sigma2;
  switch (method) {
    case Method::exact_rational: p.variance = hbar_exact(z, n, sigma2_exact(fmt)).to_double(); break;
    case Method::fast_float: p.variance = hbar_fast(z.second.to_double(), z.cross.to_double(), n, s); break;
    case Method::asymptotic:
      p.variance = hbar_asymptotic(z.second.to_double(), z.cross.to_double(), n, s);
      break;
  }
  return p;
}

AutocorrDescription matvec_autocorr(const ScalarDistribution& a, const ScalarDistribution& b, long m,
                                    long n, const FloatFormat& fmt, Method method) {
  if (m < 1 || n < 1) throw PreconditionError("matvec_autocorr: shapes must be positive");
  return {m, inner_variance(a, b, n, fmt, method).variance, 0.0, method};
}

AutocorrDescription matmul_autocorr(const ScalarDistribution& a, const ScalarDistribution& b, long m,
                                    long n, long p, const FloatFormat& fmt, Method method) {
  if (p < 1) throw PreconditionError("matmul_autocorr: p must be positive");
  AutocorrDescription d = matvec_autocorr(a, b, m, n, fmt, method);
  d.diagonal *= static_cast<double>(p);
  return d;
}

TriSolveRecursionState<Rational> trisolve_variances_exact(int n, long m, const Rational& sigma2) {
  if (n < 1) throw PreconditionError("trisolve_variances: n must be positive");
  if (m <= n + 1) throw PreconditionError("trisolve_variances: m must exceed n+1");
  const Rational a = Rational(1) + sigma2;
  TriSolveRecursionState<Rational> st;
  for (int i = 1; i <= n; ++i) {
    const Rational denom(m - i - 1);
    Rational sum_vx(0), sum(0);
    for (int j = 1; j < i; ++j) {
      sum_vx += st.var_x[j - 1];
      sum += st.var_x[j - 1] * (Rational(1) + st.sigma_psi2[j - 1]) * pow(a, i - j + 2);
    }
    const Rational vx = (Rational(1) + sum_vx) / denom;
    const Rational vdx = (pow(a, i) + sum) / denom - vx;
    st.var_x.push_back(vx);
    st.var_dx.push_back(vdx);
    st.sigma_psi2.push_back(vdx / vx);
  }
  return st;
}

Rational trisolve_x3_example(long m, const Rational& sigma2) {
  if (m <= 4) throw PreconditionError("trisolve_x3_example: m must exceed 4");
  const Rational a = Rational(1) + sigma2;
  const Rational M(m);
  const Rational psi2 =
      (a * a - Rational(1)) * (M + a * a - Rational(1)) / (M - Rational(1));
  const Rational vx3 = ((M - Rational(2)) * (M - Rational(3)) + Rational(2) * M - Rational(4)) /
                       ((M - Rational(2)) * (M - Rational(3)) * (M - Rational(4)));
  const Rational num = pow(a, 3) + pow(a, 5) / (M - Rational(2)) +
                       (M - Rational(1)) * (Rational(1) + psi2) * pow(a, 3) /
                           ((M - Rational(2)) * (M - Rational(3)));
  return num / (M - Rational(4)) - vx3;
}

LuRecursionState<Rational> lu_variances_exact(int n, long m, const Rational& sigma2) {
  if (n < 1) throw PreconditionError("lu_variances: n must be positive");
  if (m <= n + 3) throw PreconditionError("m must exceed n+3 for LU");
  const Rational a = Rational(1) + sigma2;
  const Rational one(1), two(2), M(m);
  LuRecursionState<Rational> st;
  for (int k = 1; k <= n; ++k) {
    const Rational K(k);
    Rational S(0), S2(0);
    for (int i = 1; i < k; ++i) {
      const Rational w = (one + st.sigma_eps2[i - 1]) * (one + st.sigma_eta2[i - 1]);
      S += w * pow(a, k - i + 1);
      S2 += w * pow(a, k - i + 2);
    }
    // (1+s)((1+s)^(k-2) - 1)/s, taken literally for k = 1
    const Rational g = a * (pow(a, k - 2) - one) / sigma2;
    const Rational h = a * g;
    const Rational ak1 = pow(a, k - 1) - one;
    const Rational vkk = (M * M - Rational(4)) * ak1 - Rational(3) * (K - one) + Rational(3) * S -
                         two * (M + two) * (g - K + two);
    const Rational vkj = (M - two) * ak1 + S - two * g + K - Rational(3);
    const Rational etad = vkk / (Rational(m - k + 1) * Rational(m - k + 3));
    const Rational vl = ((M - Rational(6)) * ((one + etad) * pow(a, k) - one) + (one + etad) * S2 - K +
                         one - two * ((one + etad) * h - K + two)) /
                        (Rational(m - k - 1) * Rational(m - k - 3));
    st.var_du_diag.push_back(vkk);
    st.var_du_offdiag.push_back(vkj);
    st.var_dl.push_back(vl);
    st.sigma_eta2.push_back(vkj / Rational(m - k + 1));
    st.sigma_eta_diag2.push_back(etad);
    st.sigma_eps2.push_back(Rational(m - k - 1) * vl);
  }
  return st;
}

LuK3Example lu_k3_examples(long m, const Rational& sigma2) {
  if (m <= 6) throw PreconditionError("lu_k3_examples: m must exceed 6");
  const Rational a = Rational(1) + sigma2;
  const Rational one(1), two(2), three(3), M(m);
  const Rational m2 = M * M;
  // diagonal ratio of row 2
  const Rational x = ((m2 - Rational(4)) * sigma2 + three * (pow(a, 3) - one)) / (m2 - one);
  // The (m-6) term carries (1+x)(1+s)^2 - 1; the l_i2 recursion at k = 2
  // reduces to this, while the bare (1+x) reading gives values near 1.
  const Rational eps2 =
      ((M - Rational(6)) * ((one + x) * a * a - one) + (one + x) * pow(a, 4) - one) / (M - Rational(5));
  const Rational eta2 = ((M - two) * sigma2 + pow(a, 3) - one) / (M - one);
  const Rational w2 = (one + eps2) * (one + eta2);

  LuK3Example r;
  r.u33 = (m2 - Rational(4)) * (a * a - one) + three * a * a * (w2 + a * a) - two * (M + two) * sigma2 -
          Rational(6);
  r.u3j = (M - two) * (a * a - one) + pow(a, 4) + w2 * a * a - two * a;
  const Rational eta3 = r.u33 / (m2 - two * M);
  const Rational d = (M - Rational(4)) * (M - Rational(6));
  // leading term over (m-4): the k = 3 denominator (m-4)(m-6) cancels its (m-6)
  r.li3 = ((one + eta3) * pow(a, 3) - one) / (M - Rational(4)) +
          (one + eta3) * (pow(a, 5) + w2 * pow(a, 3)) / d - two * (one + eta3) * a * a / d;
  return r;
}

}  // namespace roundstat
