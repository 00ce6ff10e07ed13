#include <gtest/gtest.h>

#include <cmath>

#include "roundstat/analytic.hpp"
#include "roundstat/distributions.hpp"
#include "roundstat/errors.hpp"
#include "roundstat/kernels.hpp"
#include "roundstat/wishart.hpp"

using namespace roundstat;

namespace {

const FloatFormat kF32 = make_format("fp32");
const FloatFormat kCarrier = make_format("fp64-carrier");

// Hardware binary32 reference. Every product and sum of two floats is exact
// or correctly rounded in double first, and double rounding through binary64
// is harmless for + - * /, so plain float code is an independent oracle.
float float_dot(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  float s = static_cast<float>(x[0]) * static_cast<float>(y[0]);
  for (Eigen::Index k = 1; k < x.size(); ++k) s = s + static_cast<float>(x[k]) * static_cast<float>(y[k]);
  return s;
}

Eigen::VectorXd float_forward(const Eigen::MatrixXd& T, const Eigen::VectorXd& b) {
  const Eigen::Index n = b.size();
  Eigen::VectorXf x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    float r = static_cast<float>(b[i]);
    for (Eigen::Index j = 0; j < i; ++j) r = r - static_cast<float>(T(i, j)) * x[j];
    x[i] = r / static_cast<float>(T(i, i));
  }
  return x.cast<double>();
}

double hbar(const char* dist, long n, const FloatFormat& f) {
  const auto m = moments_of(ScalarDistribution::parse(dist));
  return hbar_exact(product_moments(m, m), n, sigma2_exact(f)).to_double();
}

double variance(const Eigen::VectorXd& v) { return (v.array() - v.mean()).square().sum() / (v.size() - 1); }

Eigen::MatrixXd draw(const char* dist, Eigen::Index r, Eigen::Index c, Rng& rng, const FloatFormat& f) {
  return round_to_format(sample_dist(ScalarDistribution::parse(dist), r, c, rng), f);
}

}  // namespace

TEST(ExactReference, HandExamples) {
  EXPECT_EQ(exact::dot(Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)), 11.0);
  const Eigen::Vector3d b(1.5, -2, 7);
  EXPECT_EQ(exact::forward_subst(Eigen::Matrix3d::Identity(), b), b);
  Eigen::Matrix2d A;
  A << 4, 2, 2, 3;
  const auto [L, U] = exact::lu_doolittle(A);
  Eigen::Matrix2d Lw, Uw;
  Lw << 1, 0, 0.5, 1;
  Uw << 4, 2, 0, 2;
  EXPECT_EQ(L, Lw);
  EXPECT_EQ(U, Uw);
}

TEST(RoundedDot, ExactSingleProductHasZeroDelta) {
  const auto r = rounded_dot(Eigen::VectorXd::Constant(1, 1.5), Eigen::VectorXd::Constant(1, 0.25), kF32);
  EXPECT_EQ(r.value, 0.375);
  EXPECT_EQ(r.delta, 0.0);
}

TEST(RoundedDot, SequentialOrderMatchesHardwareFloat) {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::VectorXd x = draw("gaussian:0,1", 37, 1, rng, kF32), y = draw("uniform:-1,1", 37, 1, rng, kF32);
    const auto r = rounded_dot(x, y, kF32);
    ASSERT_EQ(r.value, static_cast<double>(float_dot(x, y)));
    ASSERT_EQ(r.delta, r.value - r.exact);
  }
}

TEST(RoundedDot, ShapeErrorsAndOverflow) {
  EXPECT_THROW(rounded_dot(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(2), kF32), PreconditionError);
  EXPECT_THROW(rounded_dot(Eigen::VectorXd(0), Eigen::VectorXd(0), kF32), PreconditionError);
  const auto f16 = make_format("fp16");
  EXPECT_THROW(rounded_dot(Eigen::VectorXd::Constant(2, 200.0), Eigen::VectorXd::Constant(2, 200.0), f16),
               OverflowError);
}

TEST(RoundedDot, SingleMultiplyVarianceIsTauSigma2) {
  Rng rng(2);
  const long N = 1'000'000;
  Eigen::VectorXd d(N);
  for (long t = 0; t < N; ++t) {
    const Eigen::VectorXd x = draw("uniform:0,1", 1, 1, rng, kF32), y = draw("uniform:0,1", 1, 1, rng, kF32);
    d[t] = rounded_dot(x, y, kF32).delta;
  }
  const double want = (Rational(1, 9) * sigma2_exact(kF32)).to_double();
  EXPECT_NEAR(variance(d) / want, 1.0, 0.03);
}

TEST(RoundedMatvec, SingleRowEqualsDot) {
  Rng rng(3);
  const Eigen::MatrixXd A = draw("uniform:0,1", 1, 50, rng, kF32);
  const Eigen::VectorXd b = draw("uniform:0,1", 50, 1, rng, kF32);
  const auto mv = rounded_matvec(A, b, kF32);
  const auto d = rounded_dot(A.row(0).transpose(), b, kF32);
  EXPECT_EQ(mv.value[0], d.value);
  EXPECT_EQ(mv.delta[0], d.delta);
}

TEST(RoundedMatvec, ElementVarianceMatchesHbar) {
  Rng rng(4);
  const int T = 10000, m = 10, n = 100;
  Eigen::MatrixXd d(T, m);
  for (int t = 0; t < T; ++t) {
    const Eigen::MatrixXd A = draw("uniform:0,1", m, n, rng, kF32);
    const Eigen::VectorXd b = draw("uniform:0,1", n, 1, rng, kF32);
    d.row(t) = rounded_matvec(A, b, kF32).delta.transpose();
  }
  const double h = hbar("uniform:0,1", n, kF32);
  for (int i = 0; i < m; ++i) EXPECT_NEAR(d.col(i).squaredNorm() / T / h, 1.0, 0.15) << "row " << i;
}

TEST(RoundedMatmul, SingleColumnEqualsMatvec) {
  Rng rng(5);
  const Eigen::MatrixXd A = draw("gaussian:1,1", 6, 20, rng, kF32), B = draw("gaussian:1,1", 20, 1, rng, kF32);
  const auto mm = rounded_matmul(A, B, kF32);
  const auto mv = rounded_matvec(A, B.col(0), kF32);
  EXPECT_EQ(Eigen::VectorXd(mm.value.col(0)), mv.value);
}

// R(i,j) = E(sum_k dC_ik dC_jk): p hbar on the diagonal, zero off it.
TEST(RoundedMatmul, RowAutocorrelation) {
  Rng rng(6);
  const int T = 10000, m = 10, n = 10, p = 10;
  Eigen::VectorXd r22(T), r12(T);
  for (int t = 0; t < T; ++t) {
    const Eigen::MatrixXd A = draw("uniform:0,1", m, n, rng, kF32), B = draw("uniform:0,1", n, p, rng, kF32);
    const Eigen::MatrixXd D = rounded_matmul(A, B, kF32).delta;
    r22[t] = D.row(1).squaredNorm();
    r12[t] = D.row(0).dot(D.row(1));
  }
  const double h = hbar("uniform:0,1", n, kF32);
  EXPECT_NEAR(r22.mean() / (p * h), 1.0, 0.15);
  EXPECT_LT(std::abs(r12.mean()), 3.0 * std::sqrt(variance(r12) / T));
}

TEST(RoundedForwardSubst, MatchesHardwareFloatAndTrivialCases) {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::MatrixXd T = round_to_format(sample_wishart_chol(6, 40, rng), kF32);
    const Eigen::VectorXd b = draw("gaussian:0,1", 6, 1, rng, kF32);
    ASSERT_EQ(rounded_forward_subst(T, b, kF32).value, float_forward(T, b));
  }
  const auto one = rounded_forward_subst(Eigen::MatrixXd::Constant(1, 1, 4.0), Eigen::VectorXd::Constant(1, 3.0), kF32);
  EXPECT_EQ(one.value[0], 0.75);
  EXPECT_EQ(one.delta[0], 0.0);
  const Eigen::VectorXd b = Eigen::Vector3d(0.5, -3, 1.25);
  const auto id = rounded_forward_subst(Eigen::MatrixXd::Identity(3, 3), b, kF32);
  EXPECT_EQ(id.value, b);
  EXPECT_TRUE((id.delta.array() == 0).all());
  EXPECT_THROW(rounded_forward_subst(Eigen::Matrix2d::Zero(), Eigen::Vector2d(1, 1), kF32), SingularError);
}

TEST(RoundedForwardSubst, WishartFactorX3MatchesRecursion) {
  Rng rng(8);
  const int T = 10000, n = 5;
  const long m = 1050;
  Eigen::VectorXd d(T);
  for (int t = 0; t < T; ++t) {
    const Eigen::MatrixXd L = round_to_format(sample_wishart_chol(n, m, rng), kF32);
    const Eigen::VectorXd b = draw("gaussian:0,1", n, 1, rng, kF32);
    d[t] = rounded_forward_subst(L, b, kF32).delta[2];
  }
  const double want = trisolve_x3_example(m, sigma2_exact(kF32)).to_double();
  EXPECT_NEAR(d.squaredNorm() / T / want, 1.0, 0.20);
}

TEST(RoundedLu, TrivialCases) {
  // kernels take representable inputs; callers round first
  const double a = round_to_format(0.1, kF32);
  const auto one = rounded_lu_doolittle(Eigen::MatrixXd::Constant(1, 1, a), kF32);
  EXPECT_EQ(one.U.value(0, 0), a);
  EXPECT_EQ(one.L.value(0, 0), 1.0);
  const auto rep = rounded_lu_doolittle(Eigen::MatrixXd::Constant(1, 1, 0.5), kF32);
  EXPECT_EQ(rep.U.delta(0, 0), 0.0);
  EXPECT_THROW(rounded_lu_doolittle(Eigen::Matrix2d::Zero(), kF32), SingularError);
}

TEST(RoundedLu, Fp32MatchesHardwareDoolittle) {
  Rng rng(9);
  const int n = 6;
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::MatrixXd A = round_to_format(sample_wishart(n, 30, rng), kF32);
    Eigen::MatrixXf L = Eigen::MatrixXf::Identity(n, n), U = Eigen::MatrixXf::Zero(n, n);
    const Eigen::MatrixXf Af = A.cast<float>();
    for (int k = 0; k < n; ++k) {
      for (int j = k; j < n; ++j) {
        float s = Af(k, j);
        for (int i = 0; i < k; ++i) s = s - L(k, i) * U(i, j);
        U(k, j) = s;
      }
      for (int i = k + 1; i < n; ++i) {
        float s = Af(i, k);
        for (int j = 0; j < k; ++j) s = s - L(i, j) * U(j, k);
        L(i, k) = s / U(k, k);
      }
    }
    const auto r = rounded_lu_doolittle(A, kF32);
    ASSERT_EQ(r.U.value, Eigen::MatrixXd(U.cast<double>()));
    ASSERT_EQ(r.L.value, Eigen::MatrixXd(L.cast<double>()));
  }
}

TEST(RoundedLu, WishartK3MatchesRecursion) {
  Rng rng(10);
  const int T = 10000, n = 5;
  const long m = 1050;
  Eigen::MatrixXd d(T, 3);
  for (int t = 0; t < T; ++t) {
    const Eigen::MatrixXd A = round_to_format(sample_wishart(n, m, rng), kF32);
    const auto r = rounded_lu_doolittle(A, kF32);
    d.row(t) << r.U.delta(2, 2), r.U.delta(2, 4), r.L.delta(3, 2);
  }
  const auto k3 = lu_k3_examples(m, sigma2_exact(kF32));
  const double want[] = {k3.u33.to_double(), k3.u3j.to_double(), k3.li3.to_double()};
  const char* name[] = {"u_3_3", "u_3_5", "l_4_3"};
  for (int c = 0; c < 3; ++c) {
    const double ratio = d.col(c).squaredNorm() / T / want[c];
    RecordProperty(name[c], std::to_string(ratio));
    EXPECT_NEAR(ratio, 1.0, 0.20) << name[c];
  }
}

TEST(KernelProperty, CarrierFormatGivesZeroDelta) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd A = sample_wishart(5, 12, rng);
    const Eigen::VectorXd b = sample_dist(ScalarDistribution::gaussian(0, 1), 5, rng);
    EXPECT_EQ(rounded_dot(b, b, kCarrier).delta, 0.0);
    EXPECT_TRUE(rounded_matvec(A, b, kCarrier).delta.isZero(0.0));
    EXPECT_TRUE(rounded_matmul(A, A, kCarrier).delta.isZero(0.0));
    EXPECT_TRUE(rounded_forward_subst(sample_wishart_chol(5, 12, rng), b, kCarrier).delta.isZero(0.0));
    const auto lu = rounded_lu_doolittle(A, kCarrier);
    EXPECT_TRUE(lu.L.delta.isZero(0.0));
    EXPECT_TRUE(lu.U.delta.isZero(0.0));
  }
}

TEST(KernelProperty, DeterministicGivenInputs) {
  Rng a(12), b(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd A1 = draw("gaussian:1,1", 8, 8, a, make_format("bfloat16"));
    const Eigen::MatrixXd A2 = draw("gaussian:1,1", 8, 8, b, make_format("bfloat16"));
    ASSERT_EQ(rounded_matmul(A1, A1, make_format("bfloat16")).value,
              rounded_matmul(A2, A2, make_format("bfloat16")).value);
  }
}

// Audit mode: every recorded per-operation error is bounded by u. bfloat16
// keeps the fp32 exponent range, so nothing here drops below x_min.
TEST(KernelProperty, AuditedDeltasBoundedByU) {
  Rng rng(13);
  const auto bf = make_format("bfloat16");
  DeltaAudit audit(100000, 3);
  const RoundedArithmetic ar(bf, &audit);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd A = round_to_format(sample_wishart(5, 20, rng), bf);
    rounded_lu_doolittle(A, ar);
    rounded_dot(A.col(0), A.col(1), ar);
  }
  ASSERT_GT(audit.seen(), 0u);
  for (const auto& e : audit.entries()) ASSERT_LE(std::abs(e.delta), bf.u);
  EXPECT_FALSE(audit.deltas(Op::div).empty());
  EXPECT_EQ(audit.to_csv().rfind("op_index,op_kind,delta\n", 0), 0u);
}

// Below x_min the spacing is fixed, so the relative error can exceed u.
TEST(KernelProperty, SubnormalProductsEscapeTheBound) {
  const auto f16 = make_format("fp16");
  DeltaAudit audit(10, 1);
  const RoundedArithmetic ar(f16, &audit);
  const double x = round_to_format(3.1e-4, f16), y = round_to_format(7.3e-4, f16);
  const double p = ar.mul(x, y);
  EXPECT_LT(p, f16.x_min);
  ASSERT_EQ(audit.entries().size(), 1u);
  EXPECT_GT(std::abs(audit.entries()[0].delta), f16.u);
}

TEST(DeltaAudit, ReservoirKeepsCapacity) {
  DeltaAudit audit(100, 1);
  for (int i = 0; i < 10000; ++i) audit.record(Op::add, 1e-9 * i);
  EXPECT_EQ(audit.entries().size(), 100u);
  EXPECT_EQ(audit.seen(), 10000u);
  bool late = false;
  for (const auto& e : audit.entries()) late |= e.op_index >= 100;
  EXPECT_TRUE(late);
  EXPECT_THROW(DeltaAudit(0), PreconditionError);
}
