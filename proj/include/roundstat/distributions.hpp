#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>

#include "roundstat/rational.hpp"
#include "roundstat/rng.hpp"

namespace roundstat {

enum class Family { uniform, gaussian, chi_square, student_t };

// i.i.d. scalar input law. Parameters are exact rationals so the analytic
// evaluators can consume the moments without rounding.
class ScalarDistribution {
 public:
  static ScalarDistribution uniform(const Rational& a, const Rational& b);
  static ScalarDistribution gaussian(const Rational& mean, const Rational& variance);
  static ScalarDistribution chi_square(long dof);
  static ScalarDistribution student_t(const Rational& scale, long dof);
  // "uniform:a,b", "gaussian:mean,variance", "chi_square:m", "student_t:scale,dof"
  static ScalarDistribution parse(std::string_view spec);

  Family family() const noexcept { return family_; }
  const std::string& spec() const noexcept { return spec_; }

  // Throw UnavailableError when the moment does not exist.
  Rational mean_exact() const;
  Rational variance_exact() const;
  Rational second_moment_exact() const { return variance_exact() + mean_exact() * mean_exact(); }

  double mean() const { return mean_exact().to_double(); }
  double variance() const { return variance_exact().to_double(); }
  double second_moment() const { return second_moment_exact().to_double(); }

  // E|x|; closed form for uniform and chi-square, special functions otherwise.
  double abs_mean() const;
  bool abs_mean_numeric() const noexcept;
  // max |x| over the support; empty when unbounded.
  std::optional<double> bound() const;

  double sample(Rng& rng) const;
  // i.i.d. draws in column-major order.
  void fill(Eigen::Ref<Eigen::MatrixXd> out, Rng& rng) const;

 private:
  ScalarDistribution(Family f, Rational p0, Rational p1, std::string spec);

  Family family_;
  Rational p0_;  // a | mean | dof | scale
  Rational p1_;  // b | variance | - | dof
  std::string spec_;
};

Eigen::MatrixXd sample_dist(const ScalarDistribution& dist, Eigen::Index rows, Eigen::Index cols,
                            Rng& rng);
Eigen::VectorXd sample_dist(const ScalarDistribution& dist, Eigen::Index n, Rng& rng);

}  // namespace roundstat
