#pragma once

#include <span>
#include <vector>

#include "roundstat/format.hpp"
#include "roundstat/rational.hpp"
#include "roundstat/rng.hpp"

namespace roundstat {

enum class Op { add, sub, mul, div };
const char* op_name(Op op) noexcept;

// Relative-error model: δ has mean 0 and variance σ² = u²/6.
struct DeltaModel {
  double u;
  double sigma2;
};

DeltaModel delta_model(const FloatFormat& fmt);
// σ² = 2^(-2t)/6 exactly.
Rational sigma2_exact(const FloatFormat& fmt);

// 3/(4u) on |t| <= u/2, (1/(2u))(u/|t|-1) + (1/(4u))(u/|t|-1)^2 out to u.
double delta_pdf(double t, double u);
double delta_cdf(double t, double u);

struct DeltaMoments {
  double mean;
  double variance;
};
DeltaMoments delta_moments(double u);

// Inverse-CDF draw from the model density.
double sample_delta(double u, Rng& rng);

// fl(x op y)/(x op y) - 1 with the op done in the carrier. Throws
// PreconditionError when the exact result is zero.
double empirical_delta(double x, double y, Op op, const FloatFormat& fmt);

struct DeltaHistogram {
  std::vector<double> edges;  // bins + 1 entries over [-u, u]
  std::vector<double> empirical_density;
  std::vector<double> analytic_density;  // bin-averaged model density
  std::size_t count = 0;
};
DeltaHistogram delta_histogram(std::span<const double> deltas, double u, int bins);

struct GoodnessOfFit {
  double statistic;
  int dof;
  double p_value;
};
// Pearson chi-square against the model over equal-width bins on [-u, u].
GoodnessOfFit chi_square_gof(std::span<const double> deltas, double u, int bins);

// Kolmogorov-Smirnov distance to the model CDF.
double ks_statistic(std::vector<double> samples, double u);
// Asymptotic two-sided critical value at level alpha.
double ks_critical_value(std::size_t n, double alpha);

}  // namespace roundstat
