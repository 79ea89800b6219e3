#include "seqgrad/slice_flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace seqgrad {

namespace {

// Dormand-Prince 5(4) tableau; the field is autonomous so stage times are
// not needed.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kDescentSlack = 1e-10;
constexpr double kDomainTol = 1e-8;

struct FieldEval {
  double grad_norm = 0.0;        // |grad f|
  double slice_grad_norm = 0.0;  // |G^n|
};

// G^n(x) into out; returns both gradient norms. The restricted sum is
// accumulated first so |G^n| <= |grad f| holds exactly in floating point.
FieldEval eval_field(const AnalyticFunction& f, const Point& x, const std::vector<bool>& mask,
                     Point& out, Point& grad_buf, EvalScratch& scratch) {
  f.gradient(x, grad_buf, scratch);
  out.resize(x.size());
  double restricted = 0.0;
  double frozen = 0.0;
  for (size_t j = 0; j < x.size(); ++j) {
    if (mask[j]) {
      out[j] = -grad_buf[j];
      restricted += grad_buf[j] * grad_buf[j];
    } else {
      out[j] = 0.0;
      frozen += grad_buf[j] * grad_buf[j];
    }
  }
  FieldEval fe;
  fe.slice_grad_norm = std::sqrt(restricted);
  fe.grad_norm = std::sqrt(restricted + frozen);
  return fe;
}

void validate_free(const std::vector<int>& free, int arity) {
  if (free.empty()) throw std::invalid_argument("free index set must be nonempty");
  std::vector<bool> seen(arity, false);
  for (int j : free) {
    if (j < 0 || j >= arity) throw std::invalid_argument("free index out of range");
    if (seen[j]) throw std::invalid_argument("duplicate free index");
    seen[j] = true;
  }
}

void validate_settings(const FlowSettings& s) {
  if (!(0.0 < s.h_min && s.h_min <= s.h_init && s.h_init <= s.h_max))
    throw std::invalid_argument("flow settings need 0 < h_min <= h_init <= h_max");
  if (!(s.eps_stat > 0.0) || !(s.rtol > 0.0) || !(s.atol > 0.0) || !(s.t_max > 0.0) ||
      !(s.newton_tol > 0.0))
    throw std::invalid_argument("flow settings tolerances must be positive");
}

// Damped Newton on d f/d y_j = 0 (j in free) using the restricted Hessian
// block. Returns the refined point, or the input when no acceptable step
// exists. Sets `singular` if the restricted Hessian could not be solved.
Point newton_polish(const AnalyticFunction& f, const Domain& domain, const Point& terminal,
                    const std::vector<int>& free, const FlowSettings& s, bool& singular) {
  const int nf = static_cast<int>(free.size());
  EvalScratch scratch;
  Point x = terminal;
  Point grad;
  std::vector<double> hess;

  auto restricted_norm = [&](const Point& p) {
    f.gradient(p, grad, scratch);
    double sum = 0.0;
    for (int j : free) sum += grad[j] * grad[j];
    return std::sqrt(sum);
  };

  double gn = restricted_norm(x);
  for (int iter = 0; iter < s.max_polish_iters && gn > s.newton_tol; ++iter) {
    f.gradient(x, grad, scratch);
    f.hessian(x, hess, scratch);
    const int m = f.arity();
    Eigen::MatrixXd H(nf, nf);
    Eigen::VectorXd g(nf);
    for (int r = 0; r < nf; ++r) {
      g(r) = grad[free[r]];
      for (int c = 0; c < nf; ++c) H(r, c) = hess[free[r] * m + free[c]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
    if (!lu.isInvertible()) {
      singular = true;
      return x;
    }
    Eigen::VectorXd d = lu.solve(-g);
    if (!d.allFinite()) {
      singular = true;
      return x;
    }

    const double fx = f.value(x, scratch);
    bool accepted = false;
    double lambda = 1.0;
    for (int damp = 0; damp < 8; ++damp, lambda *= 0.5) {
      Point cand = x;
      for (int r = 0; r < nf; ++r) cand[free[r]] += lambda * d(r);
      if (distance(cand, terminal) > s.polish_trust_radius) continue;
      if (!domain.contains(cand, kDomainTol)) continue;
      double fc;
      try {
        fc = f.value(cand, scratch);
      } catch (const EvalError&) {
        continue;
      }
      if (fc > fx + 1e-12) continue;
      const double gc = restricted_norm(cand);
      if (gc >= gn) continue;
      x = std::move(cand);
      gn = gc;
      accepted = true;
      break;
    }
    if (!accepted) break;
  }
  return x;
}

}  // namespace

const char* to_cstring(TerminationReason r) {
  switch (r) {
    case TerminationReason::Stationary: return "stationary";
    case TerminationReason::TimeBudget: return "time_budget";
    case TerminationReason::LeftDomain: return "left_domain";
  }
  return "unknown";
}

Point project_gradient(const AnalyticFunction& f, const Point& x, const std::vector<int>& free) {
  validate_free(free, f.arity());
  std::vector<bool> mask(f.arity(), false);
  for (int j : free) mask[j] = true;
  Point out, grad;
  EvalScratch scratch;
  eval_field(f, x, mask, out, grad, scratch);
  return out;
}

Trajectory integrate_slice(const AnalyticFunction& f, const Domain& domain, const Point& start,
                           const std::vector<int>& free, const FlowSettings& s) {
  const int m = f.arity();
  validate_free(free, m);
  validate_settings(s);
  if (static_cast<int>(start.size()) != m)
    throw std::invalid_argument("start dimension does not match function arity");
  if (!domain.contains(start, kDomainTol))
    throw std::invalid_argument("slice flow must start inside the domain");

  std::vector<bool> mask(m, false);
  for (int j : free) mask[j] = true;

  EvalScratch scratch;
  Point grad_buf;
  Point k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m);
  Point y = start, ystage(m), ynew(m);

  Trajectory traj;
  auto record = [&](double t, const Point& x, double phi, const FieldEval& fe) {
    traj.samples.push_back({t, x, phi, fe.grad_norm, fe.slice_grad_norm});
  };

  double phi = f.value(y, scratch);
  FieldEval fe = eval_field(f, y, mask, k1, grad_buf, scratch);
  record(0.0, y, phi, fe);

  if (fe.slice_grad_norm <= s.eps_stat) {
    traj.terminal = y;
    traj.reason = TerminationReason::Stationary;
    return traj;  // already stationary on this slice
  }

  double t = 0.0;
  double h = std::clamp(s.h_init, s.h_min, s.h_max);
  traj.reason = TerminationReason::TimeBudget;

  auto stage = [&](Point& dst, std::initializer_list<std::pair<double, const Point*>> terms) {
    dst = y;
    for (auto [w, kv] : terms)
      for (int j : free) dst[j] += h * w * (*kv)[j];
    for (int j = 0; j < m; ++j)
      if (!mask[j]) dst[j] = start[j];
  };

  while (t < s.t_max) {
    if (t + h > s.t_max) {
      h = s.t_max - t;
      if (h < s.h_min) break;  // budget exhausted
    }

    stage(ystage, {{a21, &k1}});
    eval_field(f, ystage, mask, k2, grad_buf, scratch);
    stage(ystage, {{a31, &k1}, {a32, &k2}});
    eval_field(f, ystage, mask, k3, grad_buf, scratch);
    stage(ystage, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    eval_field(f, ystage, mask, k4, grad_buf, scratch);
    stage(ystage, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    eval_field(f, ystage, mask, k5, grad_buf, scratch);
    stage(ystage, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    eval_field(f, ystage, mask, k6, grad_buf, scratch);
    stage(ynew, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const FieldEval fe_new = eval_field(f, ynew, mask, k7, grad_buf, scratch);

    double err = 0.0;
    for (int j : free) {
      const double e = h * (e1 * k1[j] + e3 * k3[j] + e4 * k4[j] + e5 * k5[j] + e6 * k6[j] +
                            e7 * k7[j]);
      const double sc = s.atol + s.rtol * std::max(std::abs(y[j]), std::abs(ynew[j]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / static_cast<double>(free.size()));

    const double phi_new = f.value(ynew, scratch);
    const bool descent_ok = phi_new <= phi + kDescentSlack;

    if (err <= 1.0 && descent_ok) {
      if (!domain.contains(ynew, kDomainTol)) {
        // Not committed: the trajectory ends at the last interior sample.
        traj.reason = TerminationReason::LeftDomain;
        break;
      }
      t += h;
      traj.arc_length += distance(y, ynew);
      y = ynew;
      phi = phi_new;
      k1 = k7;  // FSAL
      record(t, y, phi, fe_new);

      if (fe_new.slice_grad_norm <= s.eps_stat) {
        traj.reason = TerminationReason::Stationary;
        break;
      }
      if (traj.samples.size() > 5'000'000)
        throw std::runtime_error("slice flow produced too many samples");

      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h = std::clamp(h * fac, s.h_min, s.h_max);
    } else {
      const double fac =
          descent_ok ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.5;
      h *= fac;
      if (h < s.h_min) throw std::runtime_error("slice flow step size underflow");
    }
  }

  traj.terminal = y;

  if (traj.reason == TerminationReason::Stationary && s.newton_polish) {
    bool singular = false;
    Point refined = newton_polish(f, domain, y, free, s, singular);
    traj.polish_singular = singular;
    if (refined != y) {
      const double phi_r = f.value(refined, scratch);
      const FieldEval fe_r = eval_field(f, refined, mask, k1, grad_buf, scratch);
      traj.arc_length += distance(y, refined);
      record(t, refined, phi_r, fe_r);
      traj.terminal = refined;
      traj.polished = true;
    }
  }
  return traj;
}

double arc_length(const Trajectory& traj) {
  if (traj.samples.empty()) throw std::invalid_argument("trajectory has no samples");
  double sum = 0.0;
  for (size_t i = 1; i < traj.samples.size(); ++i)
    sum += distance(traj.samples[i - 1].x, traj.samples[i].x);
  return sum;
}

}  // namespace seqgrad
