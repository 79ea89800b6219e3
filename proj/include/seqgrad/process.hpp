#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqgrad/slice_flow.hpp"

namespace seqgrad {

/**
 * Block schedule for the sequential process.
 *
 * CyclicBlocks uses m_k = ((k + offset) mod N) + 1 over contiguous d-blocks;
 * with offset 0 this is the textbook formula, so step 1 uses block 2 when
 * N >= 2. `first_block` (1..N) rotates the cycle to start elsewhere.
 *
 * ExplicitSets cycles through the listed index sets starting from the first.
 *
 * RandomFair draws a fresh random permutation of the block list every round,
 * which bounds the gap between appearances of any block by 2L-1 <= window.
 */
class Schedule {
 public:
  enum class Kind { CyclicBlocks, ExplicitSets, RandomFair };

  static Schedule cyclic_blocks(int d, int blocks, int first_block = 0);
  static Schedule explicit_sets(std::vector<std::vector<int>> sets);
  static Schedule random_fair(std::vector<std::vector<int>> blocks, std::uint64_t seed,
                              int window);

  Kind kind() const { return kind_; }
  int d() const { return d_; }
  int block_count() const { return blocks_count_; }
  int first_block() const { return first_block_; }
  const std::vector<std::vector<int>>& sets() const { return sets_; }
  std::uint64_t seed() const { return seed_; }
  int window() const { return window_; }

  /// Steps after which the schedule is guaranteed to have offered every
  /// block at least once.
  int period() const;

  /// Index set (0-based) used by step k (k >= 1).
  std::vector<int> block_for_step(long k) const;

 private:
  Kind kind_ = Kind::CyclicBlocks;
  int d_ = 1;
  int blocks_count_ = 0;
  int first_block_ = 0;
  std::vector<std::vector<int>> sets_;
  std::uint64_t seed_ = 0;
  int window_ = 0;
};

std::vector<int> next_block(const Schedule& schedule, long k);

struct FairnessReport {
  bool passed = false;
  int horizon = 0;
  std::vector<int> appearances;    // per coordinate index
  std::vector<int> max_gap;        // per coordinate index (0 when < 2 visits)
  std::vector<int> missing;        // 0-based indices that never appear
};

/// Checks that every coordinate index 0..dim-1 appears within the horizon
/// and reports per-index appearance gaps.
FairnessReport fairness_check(const Schedule& schedule, int dim, int horizon);

struct StoppingCriteria {
  double eps_crit = 1e-7;   // threshold on |grad f(q_k)|
  double eps_move = 1e-10;  // threshold on per-step arc length
  int window = 0;           // 0 = one full schedule period
  long max_steps = 10000;
};

struct CriticalPointInfo {
  enum class Kind { Minimum, Saddle, Maximum, Degenerate };

  Point point;
  double grad_norm = 0.0;
  bool is_critical = false;
  int morse_index = 0;
  bool nondegenerate = false;
  Kind classification = Kind::Degenerate;
  std::vector<double> eigenvalues;  // ascending
};

const char* to_cstring(CriticalPointInfo::Kind k);

/// Computes |grad f(q)| and, when critical, classifies q by the signs of the
/// Hessian eigenvalues. eps_eig is relative to the largest |eigenvalue|.
CriticalPointInfo classify_point(const AnalyticFunction& f, const Point& q,
                                 double eps_crit = 1e-7, double eps_eig = 1e-6);

/// Damped full-space Newton refinement toward grad f = 0; returns the
/// refined point (the input when no progress is possible).
Point refine_critical_point(const AnalyticFunction& f, const Point& guess,
                            double tol = 1e-12, int max_iters = 50);

struct ProcessStep {
  long k = 0;
  std::vector<int> block;  // 0-based
  Point terminal;
  double phi = 0.0;
  double grad_norm = 0.0;
  double slice_grad_norm = 0.0;
  double arc_length = 0.0;
  TerminationReason reason = TerminationReason::Stationary;
  Trajectory trajectory;  // present when keep_trajectories was requested
};

struct ProcessRun {
  enum class Status { Converged, MaxStepsReached, Error };

  Point initial;
  double phi_initial = 0.0;
  std::vector<ProcessStep> steps;
  Status status = Status::MaxStepsReached;
  CriticalPointInfo classification;  // filled when converged
  std::string error;
  long error_step = -1;
  double total_arc_length = 0.0;

  const Point& final_point() const { return steps.empty() ? initial : steps.back().terminal; }
};

const char* to_cstring(ProcessRun::Status s);

/**
 * Runs the sequential gradient dynamical process: step k integrates the
 * restricted flow on the slice selected by the schedule through q_{k-1}.
 * Declares convergence when |grad f(q_k)| <= eps_crit and no step in the
 * last window moved more than eps_move. Slice-flow failures (left_domain,
 * time_budget) end the run with an error verdict at the offending step.
 */
ProcessRun run_process(const AnalyticFunction& f, const Domain& domain, const Point& q0,
                       const Schedule& schedule, const FlowSettings& flow,
                       const StoppingCriteria& stop, bool keep_trajectories = false);

/// Grid-and-bisection sampling of the zero locus of df/dy_j inside a box;
/// a diagnostic aid, possibly empty.
std::vector<Point> component_zero_locus_sample(const AnalyticFunction& f, int j,
                                               const Point& box_lo, const Point& box_hi,
                                               int grid);

}  // namespace seqgrad
