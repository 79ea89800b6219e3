#pragma once

#include <cstdint>

#include "seqgrad/process.hpp"

namespace seqgrad {

/**
 * Radial analytic perturbation h(x) = x + b (x - o) a sinc(a r^2) with
 * r = |x - o|. It fixes o, and fixes the designated minimum p exactly
 * because a is derived from an integer k via a = 2 pi k / |op|^2, which
 * makes sin(a |op|^2) vanish. Small b keeps h a diffeomorphism; the factory
 * rejects amplitudes beyond the injectivity bound.
 */
struct RadialPerturbation {
  Point o;       // perturbation center
  Point p;       // fixed minimum
  int k = 1;     // oscillation count out to |op|
  double b = 0;  // amplitude
  double a = 0;  // derived: 2 pi k / |op|^2
  double r_max = 0;  // radius out to which injectivity was certified

  static RadialPerturbation make(Point o, Point p, int k, double b, double r_max);
};

/// Largest amplitude keeping h injective out to r_max: 1 / (a sup|g|) where
/// g ranges over the radial and tangential stretch factors of Dh.
double injectivity_bound(double a, double r_max);

/// The perturbation as an analytic map (component expression trees share the
/// radius subexpression).
AnalyticMap make_h(const RadialPerturbation& pert);

/// psi = f o h; same minimum as f when a matches the fixed-point constraint.
AnalyticFunction perturb_function(const AnalyticFunction& f, const RadialPerturbation& pert);

struct EscapeOutcome {
  enum Kind : std::uint8_t { ToMinimum, ToSaddle, ToOther, Unresolved };
};

struct EscapeReport {
  int trials = 0;
  int to_minimum = 0;
  int to_saddle = 0;
  int to_other = 0;     // maximum or degenerate limits
  int unresolved = 0;   // non-converged or errored runs
  std::vector<std::uint8_t> outcomes;  // per trial, EscapeOutcome::Kind
};

/**
 * Runs the process under psi = f o h from `trials` random starts near the
 * saddle, sampled inside the saddle's attracting coordinate slice (the
 * coordinates with positive diagonal curvature) at distance <= offset,
 * excluding the saddle itself. Trials run in parallel with per-trial seeds;
 * the aggregate is deterministic.
 */
EscapeReport saddle_escape_test(const AnalyticFunction& f, const RadialPerturbation& pert,
                                const Domain& domain, const Point& saddle, int trials,
                                double offset, const Schedule& schedule,
                                const FlowSettings& flow, const StoppingCriteria& stop,
                                std::uint64_t seed);

}  // namespace seqgrad
