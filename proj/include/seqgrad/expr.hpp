#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqgrad {

/// Raised when an expression cannot be evaluated at a point (division by
/// zero outside sinc, non-positive root argument, non-finite intermediate).
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Op {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,   // integer exponent, may be negative
  Root,  // integer k-th root, argument must be positive
  Sin,
  Cos,
  Exp,
  Sinc,  // sin(u)/u extended by sinc(0)=1
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// Immutable expression node. Children are shared, so subtrees form a DAG
/// and composition never copies what it can share.
struct ExprNode {
  Op op;
  ExprPtr a;
  ExprPtr b;
  double value = 0.0;  // Const payload
  int k = 0;           // Var index (0-based), Pow exponent, Root degree
};

/// Value-semantic handle to an immutable expression tree.
class Expr {
 public:
  Expr() = default;
  explicit Expr(ExprPtr n) : node_(std::move(n)) {}

  const ExprPtr& node() const { return node_; }
  bool empty() const { return node_ == nullptr; }

 private:
  ExprPtr node_;
};

inline Expr make_node(Op op, Expr a = {}, Expr b = {}, double value = 0.0, int k = 0) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = a.node();
  n->b = b.node();
  n->value = value;
  n->k = k;
  return Expr(std::move(n));
}

inline Expr constant(double c) { return make_node(Op::Const, {}, {}, c); }

/// Variable y_{index+1}; indices are 0-based in code, 1-based in text formats.
inline Expr var(int index) {
  if (index < 0) throw std::invalid_argument("variable index must be nonnegative");
  return make_node(Op::Var, {}, {}, 0.0, index);
}

inline Expr operator+(const Expr& a, const Expr& b) { return make_node(Op::Add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return make_node(Op::Sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return make_node(Op::Mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return make_node(Op::Div, a, b); }
inline Expr operator-(const Expr& a) { return make_node(Op::Neg, a); }
inline Expr operator+(const Expr& a, double c) { return a + constant(c); }
inline Expr operator+(double c, const Expr& a) { return constant(c) + a; }
inline Expr operator-(const Expr& a, double c) { return a - constant(c); }
inline Expr operator-(double c, const Expr& a) { return constant(c) - a; }
inline Expr operator*(const Expr& a, double c) { return a * constant(c); }
inline Expr operator*(double c, const Expr& a) { return constant(c) * a; }
inline Expr operator/(const Expr& a, double c) { return a / constant(c); }
inline Expr operator/(double c, const Expr& a) { return constant(c) / a; }

inline Expr pow_i(const Expr& a, int exponent) {
  return make_node(Op::Pow, a, {}, 0.0, exponent);
}
inline Expr root(const Expr& a, int degree) {
  if (degree < 2) throw std::invalid_argument("root degree must be >= 2");
  return make_node(Op::Root, a, {}, 0.0, degree);
}
inline Expr sin(const Expr& a) { return make_node(Op::Sin, a); }
inline Expr cos(const Expr& a) { return make_node(Op::Cos, a); }
inline Expr exp(const Expr& a) { return make_node(Op::Exp, a); }
inline Expr sinc(const Expr& a) { return make_node(Op::Sinc, a); }

// sinc(u) = sin(u)/u with a series branch below this threshold; the two
// branches agree to ~1e-12 at the switch point.
inline constexpr double kSincSeriesThreshold = 1e-4;

inline double sinc_value(double u) {
  if (std::abs(u) < kSincSeriesThreshold) {
    const double u2 = u * u;
    return 1.0 + u2 * (-1.0 / 6.0 + u2 * (1.0 / 120.0 + u2 * (-1.0 / 5040.0 + u2 / 362880.0)));
  }
  return std::sin(u) / u;
}

inline double sinc_d1(double u) {
  if (std::abs(u) < kSincSeriesThreshold) {
    const double u2 = u * u;
    return u * (-1.0 / 3.0 + u2 * (1.0 / 30.0 + u2 * (-1.0 / 840.0 + u2 / 45360.0)));
  }
  return (u * std::cos(u) - std::sin(u)) / (u * u);
}

inline double sinc_d2(double u) {
  if (std::abs(u) < kSincSeriesThreshold) {
    const double u2 = u * u;
    return -1.0 / 3.0 + u2 * (1.0 / 10.0 + u2 * (-1.0 / 168.0 + u2 / 6480.0));
  }
  return ((2.0 - u * u) * std::sin(u) - 2.0 * u * std::cos(u)) / (u * u * u);
}

/// Flattened postorder instruction; operands refer to earlier slots.
struct TapeNode {
  Op op;
  int a = -1;
  int b = -1;
  double value = 0.0;
  int k = 0;
};

/// Compiles an expression DAG into a linear tape; shared subexpressions are
/// emitted once. Throws if a variable index is outside [0, arity).
std::vector<TapeNode> compile_tape(const Expr& root, int arity);

}  // namespace seqgrad
