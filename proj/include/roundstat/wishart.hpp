#pragma once

#include <Eigen/Dense>
#include <optional>

#include "roundstat/rational.hpp"
#include "roundstat/rng.hpp"

namespace roundstat {

// Lower-triangular T with t_ii = sqrt(chi2(m-i+1)), t_ij ~ N(0,1) below the
// diagonal (1-based i). T*T^T ~ W_n(m, I).
Eigen::MatrixXd sample_wishart_chol(int n, long m, Rng& rng);
Eigen::MatrixXd sample_wishart(int n, long m, Rng& rng);

struct FactorStats {
  double mean;
  double variance;
};

// Moments of the unpivoted LU factors of W_n(m, I); 1-based (i, j).
// i <= j addresses u_ij, i > j addresses l_ij.
FactorStats lu_factor_stats(int n, long m, int i, int j);

// Density of an off-diagonal u_ij = r_ii*r_ij with nu = m-i+1 degrees of
// freedom: |z|^a K_a(|z|) / (sqrt(2 pi) 2^(nu/2-1) Gamma(nu/2)), a = (nu-1)/2.
double u_offdiag_pdf(double z, long nu);

enum class ScaledFactorCase { q_diag, q_offdiag, p, o };

struct ScaledFactorMoments {
  Rational mean;
  Rational variance;
  // C(a_kk, q), C(a_kj, q), none for p, C(o, p) for o
  std::optional<Rational> covariance;
};

ScaledFactorMoments scaled_factor_moments(long m, int k, ScaledFactorCase which);

}  // namespace roundstat
