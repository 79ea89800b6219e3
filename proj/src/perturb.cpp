#include "seqgrad/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "seqgrad/rng.hpp"

namespace seqgrad {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double injectivity_bound(double a, double r_max) {
  if (!(a > 0.0) || !(r_max > 0.0)) throw std::invalid_argument("need a > 0 and r_max > 0");
  const double u_max = a * r_max * r_max;
  const int n = 20000;
  double worst = 1.0;  // u = 0 gives s = 1, s + 2us' = 1
  for (int i = 0; i <= n; ++i) {
    const double u = u_max * i / n;
    const double s = sinc_value(u);
    const double radial = s + 2.0 * u * sinc_d1(u);
    worst = std::max({worst, std::abs(s), std::abs(radial)});
  }
  return 1.0 / (a * worst);
}

RadialPerturbation RadialPerturbation::make(Point o, Point p, int k, double b, double r_max) {
  if (o.size() != p.size()) throw std::invalid_argument("o and p dimension mismatch");
  if (k < 1) throw std::invalid_argument("k must be a positive integer");
  if (b < 0.0) throw std::invalid_argument("amplitude b must be nonnegative");
  const double d = distance(o, p);
  if (d < 1e-12) throw std::invalid_argument("o must differ from the fixed minimum p");
  RadialPerturbation pert;
  pert.a = 2.0 * kPi * k / (d * d);
  pert.o = std::move(o);
  pert.p = std::move(p);
  pert.k = k;
  pert.b = b;
  pert.r_max = r_max;
  const double bound = injectivity_bound(pert.a, r_max);
  if (b >= bound)
    throw std::invalid_argument("amplitude b = " + std::to_string(b) +
                                " breaks injectivity; bound is " + std::to_string(bound));
  return pert;
}

AnalyticMap make_h(const RadialPerturbation& pert) {
  const int m = static_cast<int>(pert.o.size());
  Expr r2 = constant(0.0);
  std::vector<Expr> displaced(m);
  for (int j = 0; j < m; ++j) {
    displaced[j] = var(j) - constant(pert.o[j]);
    r2 = r2 + pow_i(displaced[j], 2);
  }
  // b (x - o) a sinc(a r^2) equals b (x - o) sin(a r^2) / r^2 and stays
  // analytic at r = 0 through the sinc node.
  Expr factor = constant(pert.b * pert.a) * sinc(constant(pert.a) * r2);
  AnalyticMap h;
  h.arity = m;
  for (int j = 0; j < m; ++j)
    h.components.emplace_back(m, var(j) + displaced[j] * factor);
  return h;
}

AnalyticFunction perturb_function(const AnalyticFunction& f, const RadialPerturbation& pert) {
  if (static_cast<int>(pert.o.size()) != f.arity())
    throw std::invalid_argument("perturbation dimension does not match function");
  return compose(f, make_h(pert));
}

EscapeReport saddle_escape_test(const AnalyticFunction& f, const RadialPerturbation& pert,
                                const Domain& domain, const Point& saddle, int trials,
                                double offset, const Schedule& schedule,
                                const FlowSettings& flow, const StoppingCriteria& stop,
                                std::uint64_t seed) {
  EscapeReport report;
  report.trials = trials;
  if (trials == 0) return report;
  if (trials < 0) throw std::invalid_argument("trials must be nonnegative");
  if (!(offset > 0.0)) throw std::invalid_argument("offset must be positive");

  const AnalyticFunction psi = perturb_function(f, pert);
  const int m = f.arity();

  // Attracting coordinate directions of the slice through the saddle:
  // positive diagonal curvature of the unperturbed function.
  const auto hess = f.hessian(saddle);
  std::vector<int> slice_dirs;
  for (int j = 0; j < m; ++j)
    if (hess[j * m + j] > 0.0) slice_dirs.push_back(j);
  if (slice_dirs.empty())
    for (int j = 0; j < m; ++j) slice_dirs.push_back(j);

  report.outcomes.assign(trials, EscapeOutcome::Unresolved);

  auto run_trial = [&](int i) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(i)));
    Point start;
    for (int attempt = 0; attempt < 100; ++attempt) {
      std::vector<double> dir(slice_dirs.size());
      double len = 0.0;
      for (auto& c : dir) c = rng.gaussian();
      for (double c : dir) len += c * c;
      len = std::sqrt(len);
      if (len < 1e-12) continue;
      const double radius = offset * std::max(rng.uniform01(), 1e-6);
      Point cand = saddle;
      for (size_t d = 0; d < slice_dirs.size(); ++d)
        cand[slice_dirs[d]] += radius * dir[d] / len;
      if (distance(cand, saddle) < 1e-12) continue;
      if (!domain.contains(cand, 0.0)) continue;
      start = std::move(cand);
      break;
    }
    if (start.empty()) return;

    try {
      const ProcessRun run = run_process(psi, domain, start, schedule, flow, stop);
      if (run.status != ProcessRun::Status::Converged) return;
      switch (run.classification.classification) {
        case CriticalPointInfo::Kind::Minimum:
          report.outcomes[i] = EscapeOutcome::ToMinimum;
          break;
        case CriticalPointInfo::Kind::Saddle:
          report.outcomes[i] = EscapeOutcome::ToSaddle;
          break;
        default:
          report.outcomes[i] = EscapeOutcome::ToOther;
          break;
      }
    } catch (const std::exception&) {
      // counted as unresolved
    }
  };

  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int workers = std::clamp(std::min(hw, trials), 1, 16);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < trials; i += workers) run_trial(i);
    });
  for (auto& th : pool) th.join();

  for (auto o : report.outcomes) {
    switch (o) {
      case EscapeOutcome::ToMinimum: ++report.to_minimum; break;
      case EscapeOutcome::ToSaddle: ++report.to_saddle; break;
      case EscapeOutcome::ToOther: ++report.to_other; break;
      default: ++report.unresolved; break;
    }
  }
  return report;
}

}  // namespace seqgrad
