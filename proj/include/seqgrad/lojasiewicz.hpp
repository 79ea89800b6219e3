#pragma once

#include <cstdint>

#include "seqgrad/process.hpp"

namespace seqgrad {

/// Fitted data for the gradient inequality |grad f(x)| > c |f(x)-f(q)|^mu
/// on the ball B_r(q).
struct LojaEstimate {
  Point center;
  double radius = 0.0;
  double c = 0.0;
  double mu = 0.0;      // in [0, 1)
  double phi_at_center = 0.0;
  int samples_used = 0;
};

/**
 * Samples the ball B_r(q) and fits the lower envelope of log|grad f| against
 * log(f - f(q)) (5th-percentile envelope in log-radius bins, least squares
 * for the slope mu). The constant c is the envelope intercept shrunk by 0.9
 * so the inequality holds on every retained sample. Samples with
 * |f - f(q)| < 1e-14 are discarded; negative f - f(q) values (possible near
 * saddles) are excluded from the fit but participate in the c calibration.
 *
 * Throws when q is not approximately critical, when too few samples remain,
 * or when the fitted exponent reaches 1 (degenerate critical point).
 */
LojaEstimate estimate_exponent(const AnalyticFunction& f, const Point& q, double r,
                               int nsamples, std::uint64_t seed);

/// Draws fresh samples in B_r(q); true iff the inequality holds on all of
/// them (ignoring |f - f(q)| < 1e-14).
bool verify_inequality(const AnalyticFunction& f, const LojaEstimate& est, int nsamples,
                       std::uint64_t seed);

/// Per-sample sharp angle constants delta(t) = |G^n| / |grad f| along a
/// slice trajectory; for slice flows <grad f, dx/dt> = -delta |grad f| |dx/dt|
/// holds exactly, so delta is the angle-condition constant at each sample.
struct AngleReport {
  double delta_min = 0.0;
  std::vector<double> delta;
};

AngleReport angle_condition(const AnalyticFunction& f, const Trajectory& traj,
                            const std::vector<int>& free);

/// Trajectory-length bound near a critical point: once some q_l lies in
/// B_r(q) with c' (f(q_l)-f(q))^{1-mu} < r for c' = safety/(c(1-mu)), the
/// arcs of the following steps that stay in the ball must sum to at most r.
struct LengthBoundReport {
  long l = -1;               // first qualifying step index (0 = initial point)
  long n = -1;               // last consecutive in-ball step
  double r = 0.0;
  double c_prime = 0.0;
  double hypothesis_value = 0.0;  // c' (f(q_l)-f(q))^{1-mu}
  bool hypothesis_holds = false;
  double total_length = 0.0;      // sum of arcs of steps l < i <= n
  bool bound_holds = false;       // total_length <= r
};

/// Throws when no step satisfies the hypothesis at this radius.
LengthBoundReport length_bound_check(const ProcessRun& run, const LojaEstimate& est,
                                     double safety = 1.05);

}  // namespace seqgrad
