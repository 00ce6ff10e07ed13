#include "roundstat/bounds.hpp"

#include <cmath>

#include "roundstat/analytic.hpp"
#include "roundstat/delta_model.hpp"
#include "roundstat/errors.hpp"

namespace roundstat {

namespace {

void require_nu_below_one(long n, double u) {
  if (n < 1) throw PreconditionError("bounds: n must be at least 1");
  if (!(static_cast<double>(n) * u < 1.0)) throw PreconditionError("bounds: need n*u < 1");
}

void require_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) throw PreconditionError(std::string(what) + " must lie in (0, 1)");
}

}  // namespace

void BoundParams::validate() const {
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  require_probability(zeta, "zeta");
  require_probability(eta, "eta");
}

double gamma_n(long n, double u) {
  require_nu_below_one(n, u);
  const double nu = static_cast<double>(n) * u;
  return nu / (1.0 - nu);
}

double abs_cross_moment(const ScalarDistribution& x, const ScalarDistribution& y, long n) {
  if (n < 1) throw PreconditionError("abs_cross_moment: n must be at least 1");
  const double N = static_cast<double>(n);
  const double ab = x.abs_mean() * y.abs_mean();
  return N * x.second_moment() * y.second_moment() + N * (N - 1.0) * ab * ab;
}

double db1_bound(long n, double u, const ScalarDistribution& x, const ScalarDistribution& y) {
  const double g = gamma_n(n, u);
  return g * g * abs_cross_moment(x, y, n);
}

double pb1_bound(long n, double u, double lambda, const ScalarDistribution& x,
                 const ScalarDistribution& y) {
  require_nu_below_one(n, u);
  if (!(lambda > 0.0)) throw PreconditionError("pb1: lambda must be positive");
  const double N = static_cast<double>(n);
  const double e = std::expm1(lambda * std::sqrt(N) * u + N * u * u / (1.0 - N * u));
  return e * e * abs_cross_moment(x, y, n);
}

double pb2_bound(long n, double u, double lambda, const ScalarDistribution& x,
                 const ScalarDistribution& y) {
  if (n < 1) throw PreconditionError("pb2: n must be at least 1");
  if (!(lambda > 0.0)) throw PreconditionError("pb2: lambda must be positive");
  const auto cx = x.bound(), cy = y.bound();
  if (!cx || !cy) throw UnavailableError("pb2: unbounded support");
  const double N = static_cast<double>(n);
  const double v = lambda * std::abs(x.mean() * y.mean()) * std::pow(N, 1.5) +
                   (lambda * lambda + 1.0) * (*cx) * (*cy) * N;
  return v * v * u * u;
}

Db2Pb3 db2_pb3_bounds(long n, double u, double zeta, const ScalarDistribution& x,
                      const ScalarDistribution& y) {
  if (n < 1) throw PreconditionError("db2/pb3: n must be at least 1");
  require_probability(zeta, "zeta");
  const double L = std::log1p(u);
  auto beta = [&](long k) { return std::expm1(static_cast<double>(k) * L); };
  // beta_n^2 + sum_{k=2}^{n} beta_{n-k+2}^2, the second sum reindexed to j = 2..n
  double sum = beta(n) * beta(n);
  for (long j = 2; j <= n; ++j) sum += beta(j) * beta(j);
  const double c2 = x.second_moment() * y.second_moment() * sum;
  return {static_cast<double>(n) * c2, 2.0 * std::log(2.0 / zeta) * c2};
}

Rational sum_c2_exact(long n, const Rational& u, const ScalarDistribution& x, const ScalarDistribution& y) {
  if (n < 1) throw PreconditionError("db2/pb3: n must be at least 1");
  const Rational a = Rational(1) + u;
  auto beta = [&](long k) { return pow(a, k) - Rational(1); };
  Rational sum = beta(n) * beta(n);
  for (long k = 2; k <= n; ++k) {
    const Rational b = beta(n - k + 2);
    sum += b * b;
  }
  return x.second_moment_exact() * y.second_moment_exact() * sum;
}

double corollary_bound(long n, double u, double eta, const ScalarDistribution& x,
                       const ScalarDistribution& y) {
  // eta = 1 is allowed here: the bound degenerates to one standard deviation
  if (!(eta > 0.0 && eta <= 1.0)) throw PreconditionError("eta must lie in (0, 1]");
  const ProductMoments z = product_moments(moments_of(x), moments_of(y));
  const double v = hbar_asymptotic(z.second.to_double(), z.cross.to_double(), n, u * u / 6.0);
  return std::sqrt(v / eta);
}

BoundReport bound_report(long n, const FloatFormat& fmt, const ScalarDistribution& x,
                         const ScalarDistribution& y, const BoundParams& params) {
  params.validate();
  BoundReport r;
  r.n = n;
  r.u = fmt.u;
  r.hbar = inner_variance(x, y, n, fmt, n <= kMaxRationalN ? Method::exact_rational : Method::asymptotic)
               .variance;
  r.db1 = db1_bound(n, fmt.u, x, y);
  r.pb1 = pb1_bound(n, fmt.u, params.lambda, x, y);
  try {
    r.pb2 = pb2_bound(n, fmt.u, params.lambda, x, y);
  } catch (const UnavailableError&) {
    r.pb2.reset();
  }
  const Db2Pb3 d = db2_pb3_bounds(n, fmt.u, params.zeta, x, y);
  r.db2 = d.db2;
  r.pb3 = d.pb3;
  r.corollary = corollary_bound(n, fmt.u, params.eta, x, y);
  return r;
}

}  // namespace roundstat
