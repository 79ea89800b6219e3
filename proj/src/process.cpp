#include "seqgrad/process.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqgrad/rng.hpp"

namespace seqgrad {

namespace {

void validate_set(const std::vector<int>& set) {
  if (set.empty()) throw std::invalid_argument("schedule sets must be nonempty");
  for (int j : set)
    if (j < 0) throw std::invalid_argument("schedule index must be nonnegative");
}

std::vector<int> round_permutation(std::uint64_t seed, long round, int count) {
  std::vector<int> perm(count);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(round)));
  for (int i = count - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.integer(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace

Schedule Schedule::cyclic_blocks(int d, int blocks, int first_block) {
  if (d < 1 || blocks < 1) throw std::invalid_argument("cyclic blocks need d >= 1, N >= 1");
  if (first_block < 0 || first_block > blocks)
    throw std::invalid_argument("first_block must be in 1..N (or 0 for the default)");
  Schedule s;
  s.kind_ = Kind::CyclicBlocks;
  s.d_ = d;
  s.blocks_count_ = blocks;
  s.first_block_ = first_block;
  return s;
}

Schedule Schedule::explicit_sets(std::vector<std::vector<int>> sets) {
  if (sets.empty()) throw std::invalid_argument("explicit schedule needs at least one set");
  for (auto& set : sets) validate_set(set);
  Schedule s;
  s.kind_ = Kind::ExplicitSets;
  s.sets_ = std::move(sets);
  s.blocks_count_ = static_cast<int>(s.sets_.size());
  return s;
}

Schedule Schedule::random_fair(std::vector<std::vector<int>> blocks, std::uint64_t seed,
                               int window) {
  if (blocks.empty()) throw std::invalid_argument("random schedule needs at least one block");
  for (auto& b : blocks) validate_set(b);
  const int need = 2 * static_cast<int>(blocks.size()) - 1;
  if (window < need)
    throw std::invalid_argument("window must be >= 2L-1 = " + std::to_string(need) +
                                " for L = " + std::to_string(blocks.size()) + " blocks");
  Schedule s;
  s.kind_ = Kind::RandomFair;
  s.sets_ = std::move(blocks);
  s.blocks_count_ = static_cast<int>(s.sets_.size());
  s.seed_ = seed;
  s.window_ = window;
  return s;
}

int Schedule::period() const {
  switch (kind_) {
    case Kind::CyclicBlocks:
    case Kind::ExplicitSets:
      return blocks_count_;
    case Kind::RandomFair:
      return window_;
  }
  return blocks_count_;
}

std::vector<int> Schedule::block_for_step(long k) const {
  if (k < 1) throw std::invalid_argument("step index starts at 1");
  switch (kind_) {
    case Kind::CyclicBlocks: {
      long m;
      if (first_block_ == 0) {
        m = (k % blocks_count_) + 1;  // m_k = (k mod N) + 1
      } else {
        m = ((k - 1 + first_block_ - 1) % blocks_count_) + 1;
      }
      std::vector<int> out(d_);
      for (int i = 0; i < d_; ++i) out[i] = static_cast<int>(d_ * (m - 1)) + i;
      return out;
    }
    case Kind::ExplicitSets:
      return sets_[static_cast<size_t>((k - 1) % blocks_count_)];
    case Kind::RandomFair: {
      const long round = (k - 1) / blocks_count_;
      const int idx = static_cast<int>((k - 1) % blocks_count_);
      const auto perm = round_permutation(seed_, round, blocks_count_);
      return sets_[perm[idx]];
    }
  }
  throw std::logic_error("unreachable");
}

std::vector<int> next_block(const Schedule& schedule, long k) { return schedule.block_for_step(k); }

FairnessReport fairness_check(const Schedule& schedule, int dim, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  FairnessReport report;
  report.horizon = horizon;
  report.appearances.assign(dim, 0);
  report.max_gap.assign(dim, 0);
  std::vector<long> last_seen(dim, 0);

  for (long k = 1; k <= horizon; ++k) {
    for (int j : schedule.block_for_step(k)) {
      if (j >= dim)
        throw std::invalid_argument("schedule references index " + std::to_string(j + 1) +
                                    " beyond dimension " + std::to_string(dim));
      report.appearances[j] += 1;
      if (last_seen[j] > 0)
        report.max_gap[j] = std::max(report.max_gap[j], static_cast<int>(k - last_seen[j]));
      last_seen[j] = k;
    }
  }
  for (int j = 0; j < dim; ++j)
    if (report.appearances[j] == 0) report.missing.push_back(j);
  report.passed = report.missing.empty();
  return report;
}

const char* to_cstring(CriticalPointInfo::Kind k) {
  switch (k) {
    case CriticalPointInfo::Kind::Minimum: return "minimum";
    case CriticalPointInfo::Kind::Saddle: return "saddle";
    case CriticalPointInfo::Kind::Maximum: return "maximum";
    case CriticalPointInfo::Kind::Degenerate: return "degenerate";
  }
  return "unknown";
}

const char* to_cstring(ProcessRun::Status s) {
  switch (s) {
    case ProcessRun::Status::Converged: return "converged";
    case ProcessRun::Status::MaxStepsReached: return "max_steps_reached";
    case ProcessRun::Status::Error: return "error";
  }
  return "unknown";
}

CriticalPointInfo classify_point(const AnalyticFunction& f, const Point& q, double eps_crit,
                                 double eps_eig) {
  const int m = f.arity();
  CriticalPointInfo info;
  info.point = q;
  info.grad_norm = norm(f.gradient(q));
  info.is_critical = info.grad_norm <= eps_crit;

  const auto h = f.hessian(q);
  Eigen::MatrixXd H(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) H(i, j) = h[i * m + j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
  info.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + m);

  const double scale = std::max(std::abs(info.eigenvalues.front()),
                                std::abs(info.eigenvalues.back()));
  const double thr = eps_eig * std::max(scale, 1e-300);
  int negatives = 0;
  double min_abs = 1e300;
  for (double ev : info.eigenvalues) {
    if (ev < -thr) ++negatives;
    min_abs = std::min(min_abs, std::abs(ev));
  }
  info.morse_index = negatives;
  info.nondegenerate = scale > 0.0 && min_abs > thr;

  if (!info.nondegenerate)
    info.classification = CriticalPointInfo::Kind::Degenerate;
  else if (negatives == 0)
    info.classification = CriticalPointInfo::Kind::Minimum;
  else if (negatives == m)
    info.classification = CriticalPointInfo::Kind::Maximum;
  else
    info.classification = CriticalPointInfo::Kind::Saddle;
  return info;
}

Point refine_critical_point(const AnalyticFunction& f, const Point& guess, double tol,
                            int max_iters) {
  const int m = f.arity();
  Point x = guess;
  EvalScratch scratch;
  Point grad;
  std::vector<double> hess;

  f.gradient(x, grad, scratch);
  double gn = norm(grad);
  for (int iter = 0; iter < max_iters && gn > tol; ++iter) {
    f.hessian(x, hess, scratch);
    Eigen::MatrixXd H(m, m);
    Eigen::VectorXd g(m);
    for (int i = 0; i < m; ++i) {
      g(i) = grad[i];
      for (int j = 0; j < m; ++j) H(i, j) = hess[i * m + j];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
    if (!lu.isInvertible()) break;
    Eigen::VectorXd d = lu.solve(-g);
    if (!d.allFinite()) break;

    bool accepted = false;
    double lambda = 1.0;
    for (int damp = 0; damp < 10; ++damp, lambda *= 0.5) {
      Point cand = x;
      for (int i = 0; i < m; ++i) cand[i] += lambda * d(i);
      Point gc;
      try {
        f.gradient(cand, gc, scratch);
      } catch (const EvalError&) {
        continue;
      }
      const double gcn = norm(gc);
      if (gcn < gn) {
        x = std::move(cand);
        grad = std::move(gc);
        gn = gcn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return x;
}

ProcessRun run_process(const AnalyticFunction& f, const Domain& domain, const Point& q0,
                       const Schedule& schedule, const FlowSettings& flow,
                       const StoppingCriteria& stop, bool keep_trajectories) {
  if (!domain.contains(q0, 0.0))
    throw std::invalid_argument("initial point must lie in the domain");
  const int m = f.arity();
  if (domain.dim() != m) throw std::invalid_argument("domain dimension does not match function");
  if (!(stop.eps_crit > 0.0) || !(stop.eps_move > 0.0) || stop.window < 0 || stop.max_steps < 1)
    throw std::invalid_argument("stopping criteria need positive thresholds and a step budget");

  const int period = schedule.period();
  const auto fairness = fairness_check(schedule, m, std::max(period, 1));
  if (!fairness.passed) {
    std::string msg = "schedule is not fair: coordinate(s)";
    for (int j : fairness.missing) msg += " y" + std::to_string(j + 1);
    msg += " never appear";
    throw std::invalid_argument(msg);
  }

  const int window = stop.window > 0 ? stop.window : period;

  ProcessRun run;
  run.initial = q0;
  run.phi_initial = f.value(q0);

  Point q = q0;
  for (long k = 1; k <= stop.max_steps; ++k) {
    const auto block = schedule.block_for_step(k);
    Trajectory traj = integrate_slice(f, domain, q, block, flow);

    ProcessStep step;
    step.k = k;
    step.block = block;
    step.terminal = traj.terminal;
    const auto& last = traj.samples.back();
    step.phi = last.phi;
    step.grad_norm = last.grad_norm;
    step.slice_grad_norm = last.slice_grad_norm;
    step.arc_length = traj.arc_length;
    step.reason = traj.reason;
    if (keep_trajectories) step.trajectory = std::move(traj);
    run.total_arc_length += step.arc_length;
    const TerminationReason reason = step.reason;
    run.steps.push_back(std::move(step));

    if (reason != TerminationReason::Stationary) {
      run.status = ProcessRun::Status::Error;
      run.error = to_cstring(reason);
      run.error_step = k;
      return run;
    }

    q = run.steps.back().terminal;

    if (k >= window && run.steps.back().grad_norm <= stop.eps_crit) {
      double max_move = 0.0;
      for (long i = k - window; i < k; ++i)
        max_move = std::max(max_move, run.steps[static_cast<size_t>(i)].arc_length);
      if (max_move <= stop.eps_move) {
        run.status = ProcessRun::Status::Converged;
        run.classification = classify_point(f, q, stop.eps_crit);
        return run;
      }
    }
  }
  run.status = ProcessRun::Status::MaxStepsReached;
  return run;
}

std::vector<Point> component_zero_locus_sample(const AnalyticFunction& f, int j,
                                               const Point& box_lo, const Point& box_hi,
                                               int grid) {
  const int m = f.arity();
  if (grid < 2) throw std::invalid_argument("grid must be >= 2");
  if (j < 0 || j >= m) throw std::invalid_argument("component index out of range");
  if (static_cast<int>(box_lo.size()) != m || static_cast<int>(box_hi.size()) != m)
    throw std::invalid_argument("box dimension mismatch");

  double cells = 1.0;
  for (int i = 0; i < m; ++i) cells *= grid;
  if (cells > 2e6) throw std::invalid_argument("grid too fine for this dimension");

  auto g = [&](const Point& x) { return f.gradient(x)[j]; };

  Point h(m);
  for (int i = 0; i < m; ++i) h[i] = (box_hi[i] - box_lo[i]) / (grid - 1);

  std::vector<Point> out;
  std::vector<int> idx(m, 0);
  Point x(m);
  const long total = static_cast<long>(cells);
  for (long lin = 0; lin < total; ++lin) {
    long rem = lin;
    for (int i = 0; i < m; ++i) {
      idx[i] = static_cast<int>(rem % grid);
      rem /= grid;
      x[i] = box_lo[i] + idx[i] * h[i];
    }
    const double v0 = g(x);
    for (int axis = 0; axis < m; ++axis) {
      if (idx[axis] + 1 >= grid) continue;
      Point x1 = x;
      x1[axis] += h[axis];
      const double v1 = g(x1);
      if (v0 == 0.0) {
        out.push_back(x);
        break;
      }
      if ((v0 < 0.0) == (v1 < 0.0)) continue;
      Point lo = x, hi = x1;
      double vlo = v0;
      for (int it = 0; it < 80; ++it) {
        Point mid = lo;
        mid[axis] = 0.5 * (lo[axis] + hi[axis]);
        const double vm = g(mid);
        if ((vm < 0.0) == (vlo < 0.0)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
      }
      Point mid = lo;
      mid[axis] = 0.5 * (lo[axis] + hi[axis]);
      out.push_back(mid);
    }
  }
  return out;
}

}  // namespace seqgrad
