#include "roundstat/kernels.hpp"

#include <charconv>
#include <random>

#include "roundstat/errors.hpp"

namespace roundstat {

namespace {

struct CarrierOps {
  double add(double a, double b) const { return a + b; }
  double sub(double a, double b) const { return a - b; }
  double mul(double a, double b) const { return a * b; }
  double div(double a, double b) const { return a / b; }
};

template <class Arith>
double dot_impl(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                const Arith& ar) {
  double s = ar.mul(x[0], y[0]);
  for (Eigen::Index k = 1; k < x.size(); ++k) s = ar.add(s, ar.mul(x[k], y[k]));
  return s;
}

template <class Arith>
Eigen::VectorXd matvec_impl(const Eigen::Ref<const Eigen::MatrixXd>& A,
                            const Eigen::Ref<const Eigen::VectorXd>& b, const Arith& ar) {
  Eigen::VectorXd y(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const Eigen::VectorXd row = A.row(i).transpose();
    y[i] = dot_impl(row, b, ar);
  }
  return y;
}

template <class Arith>
Eigen::MatrixXd matmul_impl(const Eigen::Ref<const Eigen::MatrixXd>& A,
                            const Eigen::Ref<const Eigen::MatrixXd>& B, const Arith& ar) {
  Eigen::MatrixXd C(A.rows(), B.cols());
  for (Eigen::Index j = 0; j < B.cols(); ++j) C.col(j) = matvec_impl(A, B.col(j), ar);
  return C;
}

template <class Arith>
Eigen::VectorXd forward_impl(const Eigen::Ref<const Eigen::MatrixXd>& T,
                             const Eigen::Ref<const Eigen::VectorXd>& b, const Arith& ar) {
  const Eigen::Index n = T.rows();
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = b[i];
    for (Eigen::Index j = 0; j < i; ++j) s = ar.sub(s, ar.mul(T(i, j), x[j]));
    x[i] = ar.div(s, T(i, i));
  }
  return x;
}

template <class Arith>
Eigen::VectorXd back_impl(const Eigen::Ref<const Eigen::MatrixXd>& U,
                          const Eigen::Ref<const Eigen::VectorXd>& y, const Arith& ar) {
  const Eigen::Index n = U.rows();
  Eigen::VectorXd x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (Eigen::Index j = i + 1; j < n; ++j) s = ar.sub(s, ar.mul(U(i, j), x[j]));
    x[i] = ar.div(s, U(i, i));
  }
  return x;
}

template <class Arith>
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> lu_impl(const Eigen::Ref<const Eigen::MatrixXd>& A,
                                                    const Arith& ar) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = k; j < n; ++j) {
      double s = A(k, j);
      for (Eigen::Index i = 0; i < k; ++i) s = ar.sub(s, ar.mul(L(k, i), U(i, j)));
      U(k, j) = s;
    }
    if (U(k, k) == 0.0)
      throw SingularError("lu_doolittle: zero pivot at row " + std::to_string(k + 1));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      double s = A(i, k);
      for (Eigen::Index j = 0; j < k; ++j) s = ar.sub(s, ar.mul(L(i, j), U(j, k)));
      L(i, k) = ar.div(s, U(k, k));
    }
  }
  return {L, U};
}

void check_square(const Eigen::Ref<const Eigen::MatrixXd>& A, const char* who) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw PreconditionError(std::string(who) + ": matrix must be square and nonempty");
}

void check_diagonal(const Eigen::Ref<const Eigen::MatrixXd>& T, const char* who) {
  for (Eigen::Index i = 0; i < T.rows(); ++i)
    if (T(i, i) == 0.0)
      throw SingularError(std::string(who) + ": zero diagonal at row " + std::to_string(i + 1));
}

void check_dot(Eigen::Index nx, Eigen::Index ny) {
  if (nx != ny) throw PreconditionError("rounded_dot: length mismatch");
  if (nx == 0) throw PreconditionError("rounded_dot: empty vectors");
}

template <class T>
RoundedResult<T> make_result(T value, T exact) {
  T delta = value - exact;
  return {std::move(value), std::move(exact), std::move(delta)};
}

}  // namespace

DeltaAudit::DeltaAudit(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(splitmix64(seed)) {
  if (capacity_ == 0) throw PreconditionError("DeltaAudit: capacity must be positive");
}

void DeltaAudit::record(Op op, double delta) {
  const std::uint64_t index = seen_++;
  if (entries_.size() < capacity_) {
    entries_.push_back({index, op, delta});
    return;
  }
  std::uniform_int_distribution<std::uint64_t> pick(0, index);
  const std::uint64_t slot = pick(rng_);
  if (slot < capacity_) entries_[slot] = {index, op, delta};
}

std::vector<double> DeltaAudit::deltas(Op op) const {
  std::vector<double> out;
  for (const auto& e : entries_)
    if (e.op == op) out.push_back(e.delta);
  return out;
}

std::string DeltaAudit::to_csv() const {
  std::string out = "op_index,op_kind,delta\n";
  char buf[64];
  for (const auto& e : entries_) {
    out += std::to_string(e.op_index);
    out += ',';
    out += op_name(e.op);
    out += ',';
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, e.delta);
    (void)ec;
    out.append(buf, end);
    out += '\n';
  }
  return out;
}

RoundedArithmetic::RoundedArithmetic(FloatFormat fmt, DeltaAudit* audit)
    : fmt_(std::move(fmt)), audit_(audit) {}

double RoundedArithmetic::finish(double r, Op op) const {
  const double v = round_to_format(r, fmt_);
  if (audit_ && r != 0.0) audit_->record(op, v / r - 1.0);
  return v;
}

Eigen::MatrixXd round_to_format(const Eigen::Ref<const Eigen::MatrixXd>& a, const FloatFormat& fmt) {
  return a.unaryExpr([&](double x) { return round_to_format(x, fmt); });
}

ScalarResult rounded_dot(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& y, const RoundedArithmetic& ar) {
  check_dot(x.size(), y.size());
  return make_result(dot_impl(x, y, ar), dot_impl(x, y, CarrierOps{}));
}

VectorResult rounded_matvec(const Eigen::Ref<const Eigen::MatrixXd>& A,
                            const Eigen::Ref<const Eigen::VectorXd>& b, const RoundedArithmetic& ar) {
  check_dot(A.cols(), b.size());
  return make_result(matvec_impl(A, b, ar), matvec_impl(A, b, CarrierOps{}));
}

MatrixResult rounded_matmul(const Eigen::Ref<const Eigen::MatrixXd>& A,
                            const Eigen::Ref<const Eigen::MatrixXd>& B, const RoundedArithmetic& ar) {
  check_dot(A.cols(), B.rows());
  return make_result(matmul_impl(A, B, ar), matmul_impl(A, B, CarrierOps{}));
}

VectorResult rounded_forward_subst(const Eigen::Ref<const Eigen::MatrixXd>& T,
                                   const Eigen::Ref<const Eigen::VectorXd>& b,
                                   const RoundedArithmetic& ar) {
  check_square(T, "rounded_forward_subst");
  if (b.size() != T.rows()) throw PreconditionError("rounded_forward_subst: shape mismatch");
  check_diagonal(T, "rounded_forward_subst");
  return make_result(forward_impl(T, b, ar), forward_impl(T, b, CarrierOps{}));
}

VectorResult rounded_back_subst(const Eigen::Ref<const Eigen::MatrixXd>& U,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const RoundedArithmetic& ar) {
  check_square(U, "rounded_back_subst");
  if (y.size() != U.rows()) throw PreconditionError("rounded_back_subst: shape mismatch");
  check_diagonal(U, "rounded_back_subst");
  return make_result(back_impl(U, y, ar), back_impl(U, y, CarrierOps{}));
}

LuResult rounded_lu_doolittle(const Eigen::Ref<const Eigen::MatrixXd>& A, const RoundedArithmetic& ar) {
  check_square(A, "rounded_lu_doolittle");
  auto [L, U] = lu_impl(A, ar);
  auto [Le, Ue] = lu_impl(A, CarrierOps{});
  return {make_result(std::move(L), std::move(Le)), make_result(std::move(U), std::move(Ue))};
}

namespace exact {

double dot(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  check_dot(x.size(), y.size());
  return dot_impl(x, y, CarrierOps{});
}

Eigen::VectorXd matvec(const Eigen::Ref<const Eigen::MatrixXd>& A, const Eigen::Ref<const Eigen::VectorXd>& b) {
  check_dot(A.cols(), b.size());
  return matvec_impl(A, b, CarrierOps{});
}

Eigen::MatrixXd matmul(const Eigen::Ref<const Eigen::MatrixXd>& A, const Eigen::Ref<const Eigen::MatrixXd>& B) {
  check_dot(A.cols(), B.rows());
  return matmul_impl(A, B, CarrierOps{});
}

Eigen::VectorXd forward_subst(const Eigen::Ref<const Eigen::MatrixXd>& T,
                              const Eigen::Ref<const Eigen::VectorXd>& b) {
  check_square(T, "forward_subst");
  check_diagonal(T, "forward_subst");
  return forward_impl(T, b, CarrierOps{});
}

Eigen::VectorXd back_subst(const Eigen::Ref<const Eigen::MatrixXd>& U,
                           const Eigen::Ref<const Eigen::VectorXd>& y) {
  check_square(U, "back_subst");
  check_diagonal(U, "back_subst");
  return back_impl(U, y, CarrierOps{});
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> lu_doolittle(const Eigen::Ref<const Eigen::MatrixXd>& A) {
  check_square(A, "lu_doolittle");
  return lu_impl(A, CarrierOps{});
}

}  // namespace exact

}  // namespace roundstat
