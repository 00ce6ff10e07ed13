#include "roundstat/wishart.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "roundstat/errors.hpp"

namespace roundstat {

Eigen::MatrixXd sample_wishart_chol(int n, long m, Rng& rng) {
  if (n < 1) throw PreconditionError("sample_wishart_chol: n must be positive");
  if (m < n) throw PreconditionError("sample_wishart_chol: m must be at least n");
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    std::chi_squared_distribution<double> chi2(static_cast<double>(m - i));  // m-(i+1)+1
    T(i, i) = std::sqrt(chi2(rng));
    for (int j = 0; j < i; ++j) T(i, j) = normal(rng);
  }
  return T;
}

Eigen::MatrixXd sample_wishart(int n, long m, Rng& rng) {
  const Eigen::MatrixXd T = sample_wishart_chol(n, m, rng);
  Eigen::MatrixXd A = T * T.transpose();
  // exact symmetry regardless of the product's evaluation order
  A.triangularView<Eigen::StrictlyUpper>() = A.transpose().triangularView<Eigen::StrictlyUpper>();
  return A;
}

FactorStats lu_factor_stats(int n, long m, int i, int j) {
  if (m <= n + 1) throw PreconditionError("lu_factor_stats: m must exceed n+1");
  if (i < 1 || j < 1 || i > n || j > n) throw PreconditionError("lu_factor_stats: index out of range");
  if (i == j) {
    const double nu = static_cast<double>(m - i + 1);
    return {nu, 2.0 * nu};
  }
  if (i < j) return {0.0, static_cast<double>(m - i + 1)};
  if (m - j + 1 <= 2) throw UnavailableError("lu_factor_stats: l variance needs m-j+1 > 2");
  return {0.0, 1.0 / static_cast<double>(m - j - 1)};
}

double u_offdiag_pdf(double z, long nu) {
  if (nu < 2) throw PreconditionError("u_offdiag_pdf: nu must be at least 2");
  const double v = static_cast<double>(nu);
  const double a = 0.5 * (v - 1.0);
  const double az = std::abs(z);
  if (az == 0.0)
    return std::exp(std::lgamma(a) - std::lgamma(0.5 * v)) / (2.0 * std::sqrt(std::numbers::pi));

  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi) + (0.5 * v - 1.0) * std::log(2.0) +
                          std::lgamma(0.5 * v);
  const double k = std::cyl_bessel_k(a, az);
  if (std::isfinite(k) && k > 0.0) return std::exp(a * std::log(az) + std::log(k) - log_norm);

  // Large orders overflow K; integrate the product density directly,
  // r^(nu-2) exp(-r^2/2 - z^2/(2 r^2)), scaled by its peak.
  const double r2 = 0.5 * ((v - 2.0) + std::sqrt((v - 2.0) * (v - 2.0) + 4.0 * az * az));
  auto g = [&](double r) { return (v - 2.0) * std::log(r) - 0.5 * r * r - 0.5 * (az / r) * (az / r); };
  const double r0 = std::sqrt(r2), peak = g(r0);
  // nearly Gaussian in r; 40 widths either side leaves nothing measurable
  const double w = 1.0 / std::sqrt((v - 2.0) / r2 + 1.0 + 3.0 * az * az / (r2 * r2));
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double integral = integrator.integrate([&](double r) { return r > 0 ? std::exp(g(r) - peak) : 0.0; },
                                               std::max(0.0, r0 - 40.0 * w), r0 + 40.0 * w);
  return std::exp(std::log(integral) + peak - log_norm);
}

ScaledFactorMoments scaled_factor_moments(long m, int k, ScaledFactorCase which) {
  if (k < 1) throw PreconditionError("scaled_factor_moments: k must be positive");
  if (m <= k + 3) throw PreconditionError("scaled_factor_moments: m must exceed k+3");
  const Rational d = Rational(m - k - 1) * Rational(m - k - 3);
  switch (which) {
    case ScaledFactorCase::q_diag: return {Rational(1), Rational(2), Rational(2)};
    case ScaledFactorCase::q_offdiag: return {Rational(0), Rational(1), Rational(1)};
    case ScaledFactorCase::p: return {Rational(0), Rational(1) / d, std::nullopt};
    case ScaledFactorCase::o: return {Rational(0), Rational(m - 4) / d, Rational(1) / d};
  }
  throw PreconditionError("scaled_factor_moments: unknown case");
}

}  // namespace roundstat
