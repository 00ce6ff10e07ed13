#pragma once

#include <optional>
#include <string>

#include "roundstat/distributions.hpp"
#include "roundstat/format.hpp"
#include "roundstat/rational.hpp"

namespace roundstat {

struct BoundParams {
  double lambda = 1.0;  // PB1/PB2 knob
  double zeta = 1e-16;  // PB3 failure probability
  double eta = 0.1;     // corollary failure probability
  void validate() const;
};

struct BoundReport {
  long n = 0;
  double u = 0.0;
  std::optional<double> mse_sim;
  double hbar = 0.0;
  double db1 = 0.0;
  double pb1 = 0.0;
  std::optional<double> pb2;  // empty for unbounded inputs
  double db2 = 0.0;
  double pb3 = 0.0;
  double corollary = 0.0;
};

double gamma_n(long n, double u);

// E((|x|^T |y|)^2) = n E(x^2) E(y^2) + n(n-1) (E|x| E|y|)^2
double abs_cross_moment(const ScalarDistribution& x, const ScalarDistribution& y, long n);

double db1_bound(long n, double u, const ScalarDistribution& x, const ScalarDistribution& y);
double pb1_bound(long n, double u, double lambda, const ScalarDistribution& x,
                 const ScalarDistribution& y);
// Throws UnavailableError for unbounded support.
double pb2_bound(long n, double u, double lambda, const ScalarDistribution& x,
                 const ScalarDistribution& y);

struct Db2Pb3 {
  double db2;
  double pb3;
};
Db2Pb3 db2_pb3_bounds(long n, double u, double zeta, const ScalarDistribution& x,
                      const ScalarDistribution& y);
// E(sum c_k^2) with beta_k = (1+u)^k - 1, exact in rationals.
Rational sum_c2_exact(long n, const Rational& u, const ScalarDistribution& x, const ScalarDistribution& y);

// Absolute-error bound holding with probability at least 1 - eta.
double corollary_bound(long n, double u, double eta, const ScalarDistribution& x,
                       const ScalarDistribution& y);

// All comparators for one (n, format, distribution) point; hbar exact.
BoundReport bound_report(long n, const FloatFormat& fmt, const ScalarDistribution& x,
                         const ScalarDistribution& y, const BoundParams& params);

}  // namespace roundstat
