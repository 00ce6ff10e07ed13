#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "roundstat/delta_model.hpp"
#include "roundstat/errors.hpp"

using namespace roundstat;
using boost::math::quadrature::gauss_kronrod;

namespace {

// Integrates f against the model density, split at the branch points.
template <class F>
double integrate_pdf(F f, double u) {
  auto g = [&](double t) { return f(t) * delta_pdf(t, u); };
  double total = 0.0;
  for (auto [a, b] : {std::pair{-u, -u / 2}, {-u / 2, u / 2}, {u / 2, u}})
    total += gauss_kronrod<double, 61>::integrate(g, a, b, 15, 1e-15);
  return total;
}

}  // namespace

TEST(DeltaPdf, PointValues) {
  const double u = std::ldexp(1.0, -24);
  EXPECT_DOUBLE_EQ(delta_pdf(0.0, u), 3.0 / (4.0 * u));
  EXPECT_DOUBLE_EQ(delta_pdf(0.5 * u, u), 3.0 / (4.0 * u));
  EXPECT_EQ(delta_pdf(u, u), 0.0);
  EXPECT_EQ(delta_pdf(-u, u), 0.0);
  EXPECT_EQ(delta_pdf(1.5 * u, u), 0.0);
  // continuity at |t| = u/2: (1/(2u))(1) + (1/(4u))(1) = 3/(4u)
  EXPECT_NEAR(delta_pdf(0.5 * u * (1 + 1e-12), u) * u, 0.75, 1e-9);
  EXPECT_EQ(delta_pdf(0.3 * u, u), delta_pdf(-0.3 * u, u));
  EXPECT_THROW(delta_pdf(0.0, 0.0), PreconditionError);
}

TEST(DeltaPdf, IntegratesToOneWithModelMoments) {
  for (double u : {1.0, std::ldexp(1.0, -8), std::ldexp(1.0, -24)}) {
    EXPECT_NEAR(integrate_pdf([](double) { return 1.0; }, u), 1.0, 1e-12);
    EXPECT_NEAR(integrate_pdf([](double t) { return t; }, u) / u, 0.0, 1e-12);
    EXPECT_NEAR(integrate_pdf([](double t) { return t * t; }, u) / (u * u), 1.0 / 6.0, 1e-12);
  }
}

TEST(DeltaPdf, CdfMatchesIntegratedDensity) {
  const double u = 1.0;
  for (double t : {-0.9, -0.6, -0.5, -0.2, 0.0, 0.3, 0.5, 0.75, 0.99}) {
    auto g = [&](double s) { return delta_pdf(s, u); };
    double acc = 0.0;
    const double pts[] = {-1.0, -0.5, 0.5, 1.0};
    for (int k = 0; k < 3; ++k) {
      const double a = pts[k], b = std::min(pts[k + 1], t);
      if (b > a) acc += gauss_kronrod<double, 61>::integrate(g, a, b, 15, 1e-15);
    }
    EXPECT_NEAR(delta_cdf(t, u), acc, 1e-12) << "t = " << t;
  }
  EXPECT_EQ(delta_cdf(-2.0, u), 0.0);
  EXPECT_EQ(delta_cdf(2.0, u), 1.0);
}

TEST(DeltaMoments, Values) {
  const double u = std::ldexp(1.0, -24);
  EXPECT_NEAR(delta_moments(u).variance, 5.92e-16, 0.005e-16);
  EXPECT_EQ(delta_moments(1.0).mean, 0.0);
  EXPECT_EQ(delta_moments(1.0).variance, 1.0 / 6.0);
  EXPECT_EQ(delta_model(make_format("fp32")).sigma2, u * u / 6.0);
  EXPECT_EQ(sigma2_exact(make_format("fp32")), Rational::pow2(-48) / Rational(6));
}

TEST(DeltaSampler, MomentsAndSupport) {
  Rng rng(42);
  const long N = 10'000'000;
  double sum = 0.0, sq = 0.0, worst = 0.0;
  for (long i = 0; i < N; ++i) {
    const double d = sample_delta(1.0, rng);
    sum += d;
    sq += d * d;
    worst = std::max(worst, std::abs(d));
  }
  const double mean = sum / N, var = sq / N - mean * mean;
  EXPECT_LE(worst, 1.0);
  EXPECT_NEAR(var, 1.0 / 6.0, 0.01 / 6.0);
  EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(1.0 / 6.0 / N));
}

TEST(DeltaSampler, KolmogorovSmirnovAgainstCdf) {
  Rng rng(8);
  const double u = std::ldexp(1.0, -11);
  std::vector<double> s(200000);
  for (auto& d : s) d = sample_delta(u, rng);
  EXPECT_LT(ks_statistic(s, u), ks_critical_value(s.size(), 0.01));
}

TEST(EmpiricalDelta, ExactOperationsGiveZero) {
  const auto f = make_format("fp32");
  EXPECT_EQ(empirical_delta(1.5, 2.0, Op::mul, f), 0.0);
  EXPECT_EQ(empirical_delta(0.25, 0.5, Op::add, f), 0.0);
  EXPECT_EQ(empirical_delta(3.0, 4.0, Op::div, f), 0.0);
  EXPECT_THROW(empirical_delta(1.0, 1.0, Op::sub, f), PreconditionError);
}

TEST(EmpiricalDelta, BoundedByUnitRoundoff) {
  const auto f = make_format("fp16");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const double x = round_to_format(U(rng) + 0.1, f), y = round_to_format(U(rng) + 0.1, f);
    for (Op op : {Op::add, Op::mul, Op::div}) ASSERT_LE(std::abs(empirical_delta(x, y, op, f)), f.u);
  }
}

// Relative errors of fp32 products of rounded U(0,1) pairs, binned against
// the model density on [-u, u] at the 1% level.
TEST(EmpiricalDelta, ChiSquareAgainstModelShape) {
  const auto f = make_format("fp32");
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> d;
  d.reserve(1'000'000);
  while (d.size() < 1'000'000) {
    const double x = round_to_format(U(rng), f), y = round_to_format(U(rng), f);
    if (x * y == 0.0) continue;
    d.push_back(empirical_delta(x, y, Op::mul, f));
  }
  const auto gof = chi_square_gof(d, f.u, 50);
  RecordProperty("chi2", std::to_string(gof.statistic));
  EXPECT_GT(gof.p_value, 0.01) << "chi2 = " << gof.statistic << " on " << gof.dof << " dof";
}

TEST(DeltaHistogram, AnalyticDensityIntegratesToOne) {
  const auto h = delta_histogram(std::vector<double>{0.0, 0.1, -0.2}, 1.0, 40);
  double mass = 0.0, emp = 0.0;
  for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
    mass += h.analytic_density[b] * (h.edges[b + 1] - h.edges[b]);
    emp += h.empirical_density[b] * (h.edges[b + 1] - h.edges[b]);
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_NEAR(emp, 1.0, 1e-12);
  EXPECT_EQ(h.count, 3u);
}
