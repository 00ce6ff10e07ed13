#include "roundstat/delta_model.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "roundstat/errors.hpp"

namespace roundstat {

namespace {

void require_positive(double u) {
  if (!(u > 0.0)) throw PreconditionError("delta model: u must be positive");
}

// Upper-tail mass beyond s*u for s in [1/2, 1].
double tail_mass(double s) { return 1.0 / (4.0 * s) + s / 4.0 - 0.5; }

// Solves tail_mass(s) = q for q in [0, 1/8].
double tail_inverse(double q) {
  double s = 1.0 / (1.0 + 2.0 * q + 2.0 * std::sqrt(q * (1.0 + q)));
  if (std::abs(tail_mass(s) - q) <= 1e-14 * std::max(q, 1e-300)) return s;
  double lo = 0.5, hi = 1.0;  // tail_mass decreases in s
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tail_mass(mid) > q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

const char* op_name(Op op) noexcept {
  switch (op) {
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
  }
  return "?";
}

DeltaModel delta_model(const FloatFormat& fmt) { return {fmt.u, fmt.u * fmt.u / 6.0}; }

Rational sigma2_exact(const FloatFormat& fmt) { return Rational::pow2(-2L * fmt.t) / Rational(6); }

double delta_pdf(double t, double u) {
  require_positive(u);
  const double a = std::abs(t);
  if (a <= 0.5 * u) return 0.75 / u;
  if (a > u) return 0.0;
  const double r = u / a - 1.0;
  return r / (2.0 * u) + r * r / (4.0 * u);
}

double delta_cdf(double t, double u) {
  require_positive(u);
  if (t <= -u) return 0.0;
  if (t >= u) return 1.0;
  const double s = std::abs(t) / u;
  if (s <= 0.5) return 0.5 + 0.75 * t / u;
  return t > 0 ? 1.0 - tail_mass(s) : tail_mass(s);
}

DeltaMoments delta_moments(double u) {
  require_positive(u);
  return {0.0, u * u / 6.0};
}

double sample_delta(double u, Rng& rng) {
  require_positive(u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double w = unit(rng);
  if (w >= 0.125 && w <= 0.875) return (w - 0.5) * (4.0 / 3.0) * u;
  if (w > 0.875) return tail_inverse(1.0 - w) * u;
  return -tail_inverse(w) * u;
}

double empirical_delta(double x, double y, Op op, const FloatFormat& fmt) {
  double r = 0.0;
  switch (op) {
    case Op::add: r = x + y; break;
    case Op::sub: r = x - y; break;
    case Op::mul: r = x * y; break;
    case Op::div: r = x / y; break;
  }
  if (r == 0.0) throw PreconditionError("empirical_delta: exact result is zero");
  return round_to_format(r, fmt) / r - 1.0;
}

DeltaHistogram delta_histogram(std::span<const double> deltas, double u, int bins) {
  require_positive(u);
  if (bins < 1) throw PreconditionError("delta_histogram: need at least one bin");
  DeltaHistogram h;
  h.edges.resize(bins + 1);
  const double width = 2.0 * u / bins;
  for (int b = 0; b <= bins; ++b) h.edges[b] = -u + b * width;
  std::vector<double> counts(bins, 0.0);
  for (double d : deltas) {
    if (d < -u || d > u) continue;
    int b = static_cast<int>((d + u) / width);
    counts[std::clamp(b, 0, bins - 1)] += 1.0;
    ++h.count;
  }
  h.empirical_density.resize(bins);
  h.analytic_density.resize(bins);
  for (int b = 0; b < bins; ++b) {
    h.empirical_density[b] = h.count ? counts[b] / (h.count * width) : 0.0;
    h.analytic_density[b] = (delta_cdf(h.edges[b + 1], u) - delta_cdf(h.edges[b], u)) / width;
  }
  return h;
}

GoodnessOfFit chi_square_gof(std::span<const double> deltas, double u, int bins) {
  const DeltaHistogram h = delta_histogram(deltas, u, bins);
  if (h.count == 0) throw PreconditionError("chi_square_gof: no samples inside [-u, u]");
  const double width = 2.0 * u / bins;
  double stat = 0.0;
  int used = 0;
  for (int b = 0; b < bins; ++b) {
    const double expected = h.analytic_density[b] * width * h.count;
    if (expected <= 0.0) continue;
    const double observed = h.empirical_density[b] * width * h.count;
    stat += (observed - expected) * (observed - expected) / expected;
    ++used;
  }
  const int dof = used - 1;
  const double p = boost::math::gamma_q(0.5 * dof, 0.5 * stat);
  return {stat, dof, p};
}

double ks_statistic(std::vector<double> samples, double u) {
  if (samples.empty()) throw PreconditionError("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = delta_cdf(samples[i], u);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("ks_critical_value: alpha in (0,1)");
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

}  // namespace roundstat
