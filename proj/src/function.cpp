#include "seqgrad/function.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace seqgrad {

namespace {

double ipow(double u, int p) {
  if (p < 0) {
    if (u == 0.0) throw EvalError("zero base with negative exponent");
    return 1.0 / ipow(u, -p);
  }
  double acc = 1.0;
  double base = u;
  int e = p;
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

// Value and first two derivatives of u^p at u.
void pow_derivs(double u, int p, double& v, double& d1, double& d2) {
  if (p == 0) {
    v = 1.0;
    d1 = 0.0;
    d2 = 0.0;
    return;
  }
  if (u == 0.0) {
    if (p < 0) throw EvalError("zero base with negative exponent");
    v = 0.0;
    d1 = (p == 1) ? 1.0 : 0.0;
    d2 = (p == 2) ? 2.0 : 0.0;
    return;
  }
  const double um2 = ipow(u, p - 2);
  v = um2 * u * u;
  d1 = p * um2 * u;
  d2 = static_cast<double>(p) * (p - 1) * um2;
}

void root_derivs(double u, int k, double& v, double& d1, double& d2) {
  if (u <= 0.0) throw EvalError("root argument must be positive");
  v = std::pow(u, 1.0 / k);
  d1 = v / (k * u);
  d2 = d1 * (1.0 / k - 1.0) / u;
}

void unary_derivs(Op op, double u, int k, double& v, double& d1, double& d2) {
  switch (op) {
    case Op::Neg:
      v = -u;
      d1 = -1.0;
      d2 = 0.0;
      break;
    case Op::Sin:
      v = std::sin(u);
      d1 = std::cos(u);
      d2 = -v;
      break;
    case Op::Cos:
      v = std::cos(u);
      d1 = -std::sin(u);
      d2 = -v;
      break;
    case Op::Exp:
      v = std::exp(u);
      d1 = v;
      d2 = v;
      break;
    case Op::Sinc:
      v = sinc_value(u);
      d1 = sinc_d1(u);
      d2 = sinc_d2(u);
      break;
    case Op::Pow:
      pow_derivs(u, k, v, d1, d2);
      break;
    case Op::Root:
      root_derivs(u, k, v, d1, d2);
      break;
    default:
      throw std::logic_error("not a unary op");
  }
}

}  // namespace

AnalyticFunction::AnalyticFunction(int arity, Expr tree) : arity_(arity), tree_(std::move(tree)) {
  if (arity_ <= 0) throw std::invalid_argument("arity must be positive");
  tape_ = compile_tape(tree_, arity_);
}

void AnalyticFunction::check_point(const Point& x) const {
  if (static_cast<int>(x.size()) != arity_)
    throw std::invalid_argument("point dimension " + std::to_string(x.size()) +
                                " does not match function arity " + std::to_string(arity_));
  for (double c : x)
    if (!std::isfinite(c)) throw std::invalid_argument("point has non-finite coordinate");
}

double AnalyticFunction::value(const Point& x) const {
  EvalScratch scratch;
  return value(x, scratch);
}

double AnalyticFunction::value(const Point& x, EvalScratch& scratch) const {
  check_point(x);
  auto& v = scratch.values;
  v.resize(tape_.size());
  for (size_t i = 0; i < tape_.size(); ++i) {
    const TapeNode& n = tape_[i];
    switch (n.op) {
      case Op::Const: v[i] = n.value; break;
      case Op::Var: v[i] = x[n.k]; break;
      case Op::Add: v[i] = v[n.a] + v[n.b]; break;
      case Op::Sub: v[i] = v[n.a] - v[n.b]; break;
      case Op::Mul: v[i] = v[n.a] * v[n.b]; break;
      case Op::Div:
        if (v[n.b] == 0.0) throw EvalError("division by zero");
        v[i] = v[n.a] / v[n.b];
        break;
      default: {
        double d1, d2;
        unary_derivs(n.op, v[n.a], n.k, v[i], d1, d2);
        break;
      }
    }
  }
  const double out = v.back();
  if (!std::isfinite(out)) throw EvalError("non-finite value in evaluation");
  return out;
}

Point AnalyticFunction::gradient(const Point& x) const {
  EvalScratch scratch;
  Point g;
  gradient(x, g, scratch);
  return g;
}

void AnalyticFunction::gradient(const Point& x, Point& out, EvalScratch& scratch) const {
  check_point(x);
  const int m = arity_;
  const int stride = 1 + m;
  auto& w = scratch.dual;
  w.assign(tape_.size() * stride, 0.0);

  for (size_t i = 0; i < tape_.size(); ++i) {
    const TapeNode& n = tape_[i];
    double* s = &w[i * stride];
    const double* a = n.a >= 0 ? &w[n.a * stride] : nullptr;
    const double* b = n.b >= 0 ? &w[n.b * stride] : nullptr;
    switch (n.op) {
      case Op::Const:
        s[0] = n.value;
        break;
      case Op::Var:
        s[0] = x[n.k];
        s[1 + n.k] = 1.0;
        break;
      case Op::Add:
        for (int j = 0; j < stride; ++j) s[j] = a[j] + b[j];
        break;
      case Op::Sub:
        for (int j = 0; j < stride; ++j) s[j] = a[j] - b[j];
        break;
      case Op::Mul:
        s[0] = a[0] * b[0];
        for (int j = 1; j < stride; ++j) s[j] = a[j] * b[0] + b[j] * a[0];
        break;
      case Op::Div: {
        if (b[0] == 0.0) throw EvalError("division by zero");
        s[0] = a[0] / b[0];
        for (int j = 1; j < stride; ++j) s[j] = (a[j] - s[0] * b[j]) / b[0];
        break;
      }
      default: {
        double v, d1, d2;
        unary_derivs(n.op, a[0], n.k, v, d1, d2);
        s[0] = v;
        for (int j = 1; j < stride; ++j) s[j] = d1 * a[j];
        break;
      }
    }
  }
  const double* last = &w[(tape_.size() - 1) * stride];
  if (!std::isfinite(last[0])) throw EvalError("non-finite value in evaluation");
  out.assign(last + 1, last + stride);
  for (double g : out)
    if (!std::isfinite(g)) throw EvalError("non-finite derivative in evaluation");
}

std::vector<double> AnalyticFunction::hessian(const Point& x) const {
  EvalScratch scratch;
  std::vector<double> h;
  hessian(x, h, scratch);
  return h;
}

void AnalyticFunction::hessian(const Point& x, std::vector<double>& out, EvalScratch& scratch) const {
  check_point(x);
  const int m = arity_;
  const int nh = m * (m + 1) / 2;  // packed lower triangle, (i,j) -> i(i+1)/2+j
  const int stride = 1 + m + nh;
  auto& w = scratch.dual;
  w.assign(tape_.size() * stride, 0.0);

  auto tri = [](int i, int j) { return i * (i + 1) / 2 + j; };  // i >= j

  for (size_t t = 0; t < tape_.size(); ++t) {
    const TapeNode& n = tape_[t];
    double* s = &w[t * stride];
    const double* a = n.a >= 0 ? &w[n.a * stride] : nullptr;
    const double* b = n.b >= 0 ? &w[n.b * stride] : nullptr;
    const double* ga = a ? a + 1 : nullptr;
    const double* gb = b ? b + 1 : nullptr;
    const double* ha = a ? a + 1 + m : nullptr;
    const double* hb = b ? b + 1 + m : nullptr;
    double* gs = s + 1;
    double* hs = s + 1 + m;

    switch (n.op) {
      case Op::Const:
        s[0] = n.value;
        break;
      case Op::Var:
        s[0] = x[n.k];
        gs[n.k] = 1.0;
        break;
      case Op::Add:
        for (int j = 0; j < stride; ++j) s[j] = a[j] + b[j];
        break;
      case Op::Sub:
        for (int j = 0; j < stride; ++j) s[j] = a[j] - b[j];
        break;
      case Op::Mul: {
        s[0] = a[0] * b[0];
        for (int j = 0; j < m; ++j) gs[j] = ga[j] * b[0] + gb[j] * a[0];
        for (int i = 0; i < m; ++i)
          for (int j = 0; j <= i; ++j)
            hs[tri(i, j)] = ha[tri(i, j)] * b[0] + hb[tri(i, j)] * a[0] +
                            ga[i] * gb[j] + ga[j] * gb[i];
        break;
      }
      case Op::Div: {
        if (b[0] == 0.0) throw EvalError("division by zero");
        const double q = a[0] / b[0];
        s[0] = q;
        for (int j = 0; j < m; ++j) gs[j] = (ga[j] - q * gb[j]) / b[0];
        for (int i = 0; i < m; ++i)
          for (int j = 0; j <= i; ++j)
            hs[tri(i, j)] =
                (ha[tri(i, j)] - gs[i] * gb[j] - gs[j] * gb[i] - q * hb[tri(i, j)]) / b[0];
        break;
      }
      default: {
        double v, d1, d2;
        unary_derivs(n.op, a[0], n.k, v, d1, d2);
        s[0] = v;
        for (int j = 0; j < m; ++j) gs[j] = d1 * ga[j];
        for (int i = 0; i < m; ++i)
          for (int j = 0; j <= i; ++j)
            hs[tri(i, j)] = d1 * ha[tri(i, j)] + d2 * ga[i] * ga[j];
        break;
      }
    }
  }

  const double* last = &w[(tape_.size() - 1) * stride];
  if (!std::isfinite(last[0])) throw EvalError("non-finite value in evaluation");
  out.assign(m * m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = last[1 + m + tri(i, j)];
      if (!std::isfinite(v)) throw EvalError("non-finite second derivative in evaluation");
      out[i * m + j] = v;
      out[j * m + i] = v;
    }
}

Point AnalyticMap::value(const Point& x) const {
  Point out(components.size());
  for (size_t i = 0; i < components.size(); ++i) out[i] = components[i].value(x);
  return out;
}

namespace {

Expr substitute(const ExprPtr& n, const std::vector<Expr>& comps,
                std::unordered_map<const ExprNode*, Expr>& memo) {
  auto it = memo.find(n.get());
  if (it != memo.end()) return it->second;
  Expr out;
  switch (n->op) {
    case Op::Const:
      out = Expr(n);
      break;
    case Op::Var:
      out = comps[n->k];
      break;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      Expr a = substitute(n->a, comps, memo);
      Expr b = substitute(n->b, comps, memo);
      out = make_node(n->op, a, b, n->value, n->k);
      break;
    }
    default: {
      Expr a = substitute(n->a, comps, memo);
      out = make_node(n->op, a, {}, n->value, n->k);
      break;
    }
  }
  memo.emplace(n.get(), out);
  return out;
}

}  // namespace

AnalyticFunction compose(const AnalyticFunction& f, const AnalyticMap& h) {
  if (h.arity != f.arity())
    throw std::invalid_argument("composition dimension mismatch");
  if (static_cast<int>(h.components.size()) != h.arity)
    throw std::invalid_argument("map component count does not match arity");
  std::vector<Expr> comps;
  comps.reserve(h.components.size());
  for (const auto& c : h.components) {
    if (c.arity() != h.arity) throw std::invalid_argument("map component arity mismatch");
    comps.push_back(c.tree());
  }
  std::unordered_map<const ExprNode*, Expr> memo;
  Expr composed = substitute(f.tree().node(), comps, memo);
  return AnalyticFunction(f.arity(), composed);
}

AnalyticMap identity_map(int arity) {
  AnalyticMap h;
  h.arity = arity;
  for (int i = 0; i < arity; ++i) h.components.emplace_back(arity, var(i));
  return h;
}

double norm(const Point& x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace seqgrad
