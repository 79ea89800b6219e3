#pragma once

#include <vector>

#include "seqgrad/domain.hpp"
#include "seqgrad/function.hpp"

namespace seqgrad {

/// Affine slice through an anchor point: coordinates outside `free` stay
/// frozen at the anchor's values.
struct SliceSpec {
  Point anchor;
  std::vector<int> free;  // 0-based coordinate indices, nonempty
};

struct FlowSettings {
  double eps_stat = 1e-9;     // stationarity threshold on the restricted field
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 10.0;
  // The controller's noise floor on |G^n| is about lambda * (atol + rtol |y|);
  // the defaults keep it two orders below eps_stat at desk scale.
  double rtol = 1e-11;
  double atol = 1e-13;
  double t_max = 1e4;         // flow-time budget per slice step
  bool newton_polish = true;
  double newton_tol = 1e-12;
  int max_polish_iters = 25;
  double polish_trust_radius = 1e-2;
};

enum class TerminationReason { Stationary, TimeBudget, LeftDomain };

const char* to_cstring(TerminationReason r);

struct TrajectorySample {
  double t;
  Point x;
  double phi;
  double grad_norm;        // |grad f| (full)
  double slice_grad_norm;  // |G^n| (restricted)
};

/// Sampled integral curve of one slice-flow step.
struct Trajectory {
  std::vector<TrajectorySample> samples;
  double arc_length = 0.0;  // sum of chord lengths between samples
  Point terminal;
  TerminationReason reason = TerminationReason::Stationary;
  bool polished = false;
  bool polish_singular = false;  // restricted Hessian singular at the limit
};

/// Restricted descent field G^n: -grad f with components outside `free`
/// zeroed. Equals minus the gradient of f restricted to the slice.
Point project_gradient(const AnalyticFunction& f, const Point& x, const std::vector<int>& free);

/**
 * Integrates y' = G^n(y) from `start` with an adaptive Dormand-Prince 5(4)
 * pair until |G^n| <= eps_stat or a budget is exhausted. Accepted steps must
 * not increase f beyond 1e-10; offending steps are retried with smaller h.
 * On stationary termination the terminal point is refined by damped Newton
 * on the restricted first-order conditions, accepted only while it stays in
 * the trust region and the domain and does not increase f beyond 1e-12.
 *
 * Frozen coordinates are bit-identical across all samples.
 */
Trajectory integrate_slice(const AnalyticFunction& f, const Domain& domain, const Point& start,
                           const std::vector<int>& free, const FlowSettings& settings);

/// Sum of Euclidean chord lengths between consecutive samples.
double arc_length(const Trajectory& traj);

}  // namespace seqgrad
