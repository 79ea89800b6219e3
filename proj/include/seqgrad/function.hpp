#pragma once

#include <vector>

#include "seqgrad/expr.hpp"

namespace seqgrad {

using Point = std::vector<double>;

/// Reusable evaluation buffers; keeps the hot integration loops free of
/// per-call allocation. A default-constructed scratch works for any call.
struct EvalScratch {
  std::vector<double> values;
  std::vector<double> dual;
};

/**
 * Real analytic function of M variables represented as an immutable
 * expression tree. Evaluation, gradients and Hessians are computed by
 * forward-mode dual numbers over a flattened tape, so derivatives are exact
 * for the tree (no truncation) and evaluation is bit-deterministic.
 */
class AnalyticFunction {
 public:
  AnalyticFunction() = default;
  AnalyticFunction(int arity, Expr tree);

  int arity() const { return arity_; }
  const Expr& tree() const { return tree_; }

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  /// Dense symmetric M x M matrix in row-major order.
  std::vector<double> hessian(const Point& x) const;

  double value(const Point& x, EvalScratch& scratch) const;
  void gradient(const Point& x, Point& out, EvalScratch& scratch) const;
  void hessian(const Point& x, std::vector<double>& out, EvalScratch& scratch) const;

 private:
  void check_point(const Point& x) const;

  int arity_ = 0;
  Expr tree_;
  std::vector<TapeNode> tape_;
};

/// Analytic map R^M -> R^M given componentwise; houses diffeomorphisms like
/// the radial perturbation.
struct AnalyticMap {
  int arity = 0;
  std::vector<AnalyticFunction> components;

  Point value(const Point& x) const;
};

/// Expression-level composition f(h(y)): every variable node of f is
/// replaced by the matching component tree of h. Shared subtrees of f are
/// rewritten once.
AnalyticFunction compose(const AnalyticFunction& f, const AnalyticMap& h);

/// Identity map on M variables.
AnalyticMap identity_map(int arity);

double norm(const Point& x);
double distance(const Point& a, const Point& b);

}  // namespace seqgrad
