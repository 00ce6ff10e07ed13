#include "roundstat/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "roundstat/errors.hpp"

namespace roundstat {

namespace {

std::vector<std::string_view> split_params(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(s.substr(0, comma));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

long to_dof(const Rational& r, const char* what) {
  const double d = r.to_double();
  if (d != std::floor(d) || d < 1 || Rational(static_cast<long>(d)) != r)
    throw PreconditionError(std::string(what) + ": degrees of freedom must be a positive integer");
  return static_cast<long>(d);
}

}  // namespace

ScalarDistribution::ScalarDistribution(Family f, Rational p0, Rational p1, std::string spec)
    : family_(f), p0_(std::move(p0)), p1_(std::move(p1)), spec_(std::move(spec)) {}

ScalarDistribution ScalarDistribution::uniform(const Rational& a, const Rational& b) {
  if (!(a < b)) throw PreconditionError("uniform: need a < b");
  return {Family::uniform, a, b, "uniform:" + a.str() + "," + b.str()};
}

ScalarDistribution ScalarDistribution::gaussian(const Rational& mean, const Rational& variance) {
  if (variance.sign() <= 0) throw PreconditionError("gaussian: variance must be positive");
  return {Family::gaussian, mean, variance, "gaussian:" + mean.str() + "," + variance.str()};
}

ScalarDistribution ScalarDistribution::chi_square(long dof) {
  if (dof < 1) throw PreconditionError("chi_square: dof must be positive");
  return {Family::chi_square, Rational(dof), Rational(0), "chi_square:" + std::to_string(dof)};
}

ScalarDistribution ScalarDistribution::student_t(const Rational& scale, long dof) {
  if (scale.sign() <= 0) throw PreconditionError("student_t: scale must be positive");
  if (dof < 1) throw PreconditionError("student_t: dof must be positive");
  return {Family::student_t, scale, Rational(dof),
          "student_t:" + scale.str() + "," + std::to_string(dof)};
}

ScalarDistribution ScalarDistribution::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw PreconditionError("distribution spec '" + std::string(spec) + "' lacks ':'");
  const std::string_view family = spec.substr(0, colon);
  const auto params = split_params(spec.substr(colon + 1));
  std::vector<Rational> p;
  for (auto s : params) p.push_back(Rational::parse(s));

  auto need = [&](std::size_t k) {
    if (p.size() != k)
      throw PreconditionError("distribution spec '" + std::string(spec) + "' expects " +
                              std::to_string(k) + " parameter(s)");
  };
  if (family == "uniform") {
    need(2);
    return uniform(p[0], p[1]);
  }
  if (family == "gaussian" || family == "normal") {
    need(2);
    return gaussian(p[0], p[1]);
  }
  if (family == "chi_square" || family == "chisq") {
    need(1);
    return chi_square(to_dof(p[0], "chi_square"));
  }
  if (family == "student_t") {
    need(2);
    return student_t(p[0], to_dof(p[1], "student_t"));
  }
  throw PreconditionError("unknown distribution family '" + std::string(family) + "'");
}

Rational ScalarDistribution::mean_exact() const {
  switch (family_) {
    case Family::uniform: return (p0_ + p1_) / Rational(2);
    case Family::gaussian: return p0_;
    case Family::chi_square: return p0_;
    case Family::student_t:
      if (p1_ <= Rational(1)) throw UnavailableError("student_t: mean needs dof > 1");
      return Rational(0);
  }
  return Rational(0);
}

Rational ScalarDistribution::variance_exact() const {
  switch (family_) {
    case Family::uniform: {
      const Rational w = p1_ - p0_;
      return w * w / Rational(12);
    }
    case Family::gaussian: return p1_;
    case Family::chi_square: return Rational(2) * p0_;
    case Family::student_t:
      if (p1_ <= Rational(2)) throw UnavailableError("student_t: variance needs dof > 2");
      return p0_ * p0_ * p1_ / (p1_ - Rational(2));
  }
  return Rational(0);
}

bool ScalarDistribution::abs_mean_numeric() const noexcept {
  return family_ == Family::gaussian || family_ == Family::student_t;
}

double ScalarDistribution::abs_mean() const {
  switch (family_) {
    case Family::uniform: {
      const Rational a = p0_, b = p1_;
      if (a.sign() >= 0) return ((a + b) / Rational(2)).to_double();
      if (b.sign() <= 0) return (-(a + b) / Rational(2)).to_double();
      return ((a * a + b * b) / (Rational(2) * (b - a))).to_double();
    }
    case Family::chi_square: return p0_.to_double();
    case Family::gaussian: {
      // folded normal
      const double mu = p0_.to_double();
      const double sd = std::sqrt(p1_.to_double());
      const double z = mu / sd;
      return sd * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * z * z) +
             mu * (1.0 - std::erfc(z / std::numbers::sqrt2));
    }
    case Family::student_t: {
      const double nu = p1_.to_double();
      if (nu <= 1.0) throw UnavailableError("student_t: E|x| needs dof > 1");
      const double lg = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu);
      return p0_.to_double() * 2.0 * std::sqrt(nu) * std::exp(lg) /
             (std::sqrt(std::numbers::pi) * (nu - 1.0));
    }
  }
  return 0.0;
}

std::optional<double> ScalarDistribution::bound() const {
  if (family_ != Family::uniform) return std::nullopt;
  return std::max(std::abs(p0_.to_double()), std::abs(p1_.to_double()));
}

void ScalarDistribution::fill(Eigen::Ref<Eigen::MatrixXd> out, Rng& rng) const {
  // column-major draw order, one distribution object per call
  auto fill_with = [&](auto& d) {
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = d(rng);
  };
  switch (family_) {
    case Family::uniform: {
      std::uniform_real_distribution<double> d(p0_.to_double(), p1_.to_double());
      fill_with(d);
      break;
    }
    case Family::gaussian: {
      std::normal_distribution<double> d(p0_.to_double(), std::sqrt(p1_.to_double()));
      fill_with(d);
      break;
    }
    case Family::chi_square: {
      std::chi_squared_distribution<double> d(p0_.to_double());
      fill_with(d);
      break;
    }
    case Family::student_t: {
      std::student_t_distribution<double> t(p1_.to_double());
      const double scale = p0_.to_double();
      auto d = [&](Rng& g) { return scale * t(g); };
      fill_with(d);
      break;
    }
  }
}

Eigen::MatrixXd sample_dist(const ScalarDistribution& dist, Eigen::Index rows, Eigen::Index cols,
                            Rng& rng) {
  if (rows < 0 || cols < 0) throw PreconditionError("sample_dist: negative shape");
  Eigen::MatrixXd out(rows, cols);
  dist.fill(out, rng);
  return out;
}

Eigen::VectorXd sample_dist(const ScalarDistribution& dist, Eigen::Index n, Rng& rng) {
  return sample_dist(dist, n, 1, rng);
}

double ScalarDistribution::sample(Rng& rng) const {
  Eigen::MatrixXd one(1, 1);
  fill(one, rng);
  return one(0, 0);
}

}  // namespace roundstat
