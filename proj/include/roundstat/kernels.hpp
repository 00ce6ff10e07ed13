#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "roundstat/delta_model.hpp"
#include "roundstat/format.hpp"
#include "roundstat/rng.hpp"

namespace roundstat {

// Records the relative error of every rounded operation. Keeps the first
// `capacity` entries, then reservoir-samples so memory stays bounded.
class DeltaAudit {
 public:
  struct Entry {
    std::uint64_t op_index;
    Op op;
    double delta;
  };

  explicit DeltaAudit(std::size_t capacity = 10'000'000, std::uint64_t seed = kDefaultSeed);

  void record(Op op, double delta);
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::uint64_t seen() const noexcept { return seen_; }
  std::vector<double> deltas(Op op) const;
  // op_index,op_kind,delta
  std::string to_csv() const;

 private:
  std::size_t capacity_;
  std::uint64_t seen_ = 0;
  std::vector<Entry> entries_;
  Rng rng_;
};

// Scalar operations done in the carrier, then rounded once to the format.
class RoundedArithmetic {
 public:
  explicit RoundedArithmetic(FloatFormat fmt, DeltaAudit* audit = nullptr);

  const FloatFormat& format() const noexcept { return fmt_; }
  double round(double x) const { return round_to_format(x, fmt_); }

  double add(double a, double b) const { return finish(a + b, Op::add); }
  double sub(double a, double b) const { return finish(a - b, Op::sub); }
  double mul(double a, double b) const { return finish(a * b, Op::mul); }
  double div(double a, double b) const { return finish(a / b, Op::div); }

 private:
  double finish(double r, Op op) const;

  FloatFormat fmt_;
  DeltaAudit* audit_;
};

template <class T>
struct RoundedResult {
  T value;  // computed in the format, held in the carrier
  T exact;  // same ordering without rounding
  T delta;  // value - exact
};

using ScalarResult = RoundedResult<double>;
using VectorResult = RoundedResult<Eigen::VectorXd>;
using MatrixResult = RoundedResult<Eigen::MatrixXd>;

struct LuResult {
  MatrixResult L;
  MatrixResult U;
};

// Elementwise rounding of inputs; kernels assume representable inputs.
Eigen::MatrixXd round_to_format(const Eigen::Ref<const Eigen::MatrixXd>& a, const FloatFormat& fmt);

// Left-to-right: fl(...fl(fl(x1 y1) + fl(x2 y2)) ... + fl(xn yn)).
ScalarResult rounded_dot(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& y, const RoundedArithmetic& ar);
VectorResult rounded_matvec(const Eigen::Ref<const Eigen::MatrixXd>& A,
                            const Eigen::Ref<const Eigen::VectorXd>& b, const RoundedArithmetic& ar);
MatrixResult rounded_matmul(const Eigen::Ref<const Eigen::MatrixXd>& A,
                            const Eigen::Ref<const Eigen::MatrixXd>& B, const RoundedArithmetic& ar);
// x_i = fl(fl(...fl(b_i - fl(t_i1 x_1)) ... - fl(t_i,i-1 x_i-1)) / t_ii)
VectorResult rounded_forward_subst(const Eigen::Ref<const Eigen::MatrixXd>& T,
                                   const Eigen::Ref<const Eigen::VectorXd>& b,
                                   const RoundedArithmetic& ar);
// Upper-triangular counterpart, j = i+1..n left to right.
VectorResult rounded_back_subst(const Eigen::Ref<const Eigen::MatrixXd>& U,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const RoundedArithmetic& ar);
// Unpivoted Doolittle: row k of U, then column k of L.
LuResult rounded_lu_doolittle(const Eigen::Ref<const Eigen::MatrixXd>& A, const RoundedArithmetic& ar);

inline ScalarResult rounded_dot(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& y, const FloatFormat& fmt) {
  return rounded_dot(x, y, RoundedArithmetic(fmt));
}
inline VectorResult rounded_matvec(const Eigen::Ref<const Eigen::MatrixXd>& A,
                                   const Eigen::Ref<const Eigen::VectorXd>& b, const FloatFormat& fmt) {
  return rounded_matvec(A, b, RoundedArithmetic(fmt));
}
inline MatrixResult rounded_matmul(const Eigen::Ref<const Eigen::MatrixXd>& A,
                                   const Eigen::Ref<const Eigen::MatrixXd>& B, const FloatFormat& fmt) {
  return rounded_matmul(A, B, RoundedArithmetic(fmt));
}
inline VectorResult rounded_forward_subst(const Eigen::Ref<const Eigen::MatrixXd>& T,
                                          const Eigen::Ref<const Eigen::VectorXd>& b,
                                          const FloatFormat& fmt) {
  return rounded_forward_subst(T, b, RoundedArithmetic(fmt));
}
inline LuResult rounded_lu_doolittle(const Eigen::Ref<const Eigen::MatrixXd>& A, const FloatFormat& fmt) {
  return rounded_lu_doolittle(A, RoundedArithmetic(fmt));
}

// Carrier-precision references with the kernels' operation ordering.
namespace exact {
double dot(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);
Eigen::VectorXd matvec(const Eigen::Ref<const Eigen::MatrixXd>& A, const Eigen::Ref<const Eigen::VectorXd>& b);
Eigen::MatrixXd matmul(const Eigen::Ref<const Eigen::MatrixXd>& A, const Eigen::Ref<const Eigen::MatrixXd>& B);
Eigen::VectorXd forward_subst(const Eigen::Ref<const Eigen::MatrixXd>& T,
                              const Eigen::Ref<const Eigen::VectorXd>& b);
Eigen::VectorXd back_subst(const Eigen::Ref<const Eigen::MatrixXd>& U,
                           const Eigen::Ref<const Eigen::VectorXd>& y);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> lu_doolittle(const Eigen::Ref<const Eigen::MatrixXd>& A);
}  // namespace exact

}  // namespace roundstat
