#include "seqgrad/lojasiewicz.hpp"

#include <algorithm>
#include <cmath>

#include "seqgrad/rng.hpp"

namespace seqgrad {

namespace {

constexpr double kLevelFloor = 1e-14;

Point sample_at_radius(const Point& center, double radius, Rng& rng) {
  const int m = static_cast<int>(center.size());
  Point dir;
  double len = 0.0;
  do {
    dir = rng.gaussian_vec(m);
    len = norm(dir);
  } while (len < 1e-12);
  Point x(m);
  for (int j = 0; j < m; ++j) x[j] = center[j] + radius * dir[j] / len;
  return x;
}

Point sample_in_ball(const Point& center, double r, Rng& rng) {
  const int m = static_cast<int>(center.size());
  return sample_at_radius(center, r * std::pow(rng.uniform01(), 1.0 / m), rng);
}

// Radii spread log-uniformly over five decades: every level bin then sees
// samples near the binding eigendirections, which uniform ball sampling
// almost never reaches at small levels near a saddle.
Point sample_log_radius(const Point& center, double r, Rng& rng) {
  return sample_at_radius(center, r * std::pow(10.0, -5.0 * rng.uniform01()), rng);
}

}  // namespace

LojaEstimate estimate_exponent(const AnalyticFunction& f, const Point& q, double r,
                               int nsamples, std::uint64_t seed) {
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  if (nsamples < 100) throw std::invalid_argument("need at least 100 samples");
  const double gq = norm(f.gradient(q));
  if (gq > 1e-6)
    throw std::invalid_argument("estimate center is not approximately critical (|grad| = " +
                                std::to_string(gq) + ")");

  const double fq = f.value(q);
  Rng rng(seed);
  EvalScratch scratch;
  Point grad;

  struct Sample {
    double log_level;  // log|f - f(q)|
    double log_grad;
    bool positive;
  };
  std::vector<Sample> samples;
  samples.reserve(nsamples);

  for (int i = 0; i < nsamples; ++i) {
    const Point x = sample_log_radius(q, r, rng);
    const double level = f.value(x, scratch) - fq;
    if (std::abs(level) < kLevelFloor) continue;
    f.gradient(x, grad, scratch);
    const double gn = norm(grad);
    if (gn <= 0.0) continue;
    samples.push_back({std::log(std::abs(level)), std::log(gn), level > 0.0});
  }

  std::vector<const Sample*> fit;
  for (const auto& s : samples)
    if (s.positive) fit.push_back(&s);
  if (fit.size() < 50) throw std::runtime_error("too few usable samples for the exponent fit");

  // 5th-percentile gradient envelope per log-level bin. Binning the level
  // axis (not the radius) keeps the envelope a function of the regression
  // abscissa; radius bins pair small gradients with near-zero levels at
  // saddles and flatten the fitted slope.
  double lo = 1e300, hi = -1e300;
  for (const auto* s : fit) {
    lo = std::min(lo, s->log_level);
    hi = std::max(hi, s->log_level);
  }
  const int nbins = 12;
  const double width = std::max(hi - lo, 1e-12) / nbins;
  std::vector<std::vector<const Sample*>> bins(nbins);
  for (const auto* s : fit) {
    int b = static_cast<int>((s->log_level - lo) / width);
    b = std::clamp(b, 0, nbins - 1);
    bins[b].push_back(s);
  }

  std::vector<std::pair<double, double>> envelope;  // (log_level, log_grad)
  for (auto& bin : bins) {
    if (bin.size() < 5) continue;
    std::sort(bin.begin(), bin.end(),
              [](const Sample* a, const Sample* b) { return a->log_grad < b->log_grad; });
    const auto* s = bin[bin.size() / 20];  // 5th percentile by |grad|
    envelope.emplace_back(s->log_level, s->log_grad);
  }
  if (envelope.size() < 2) throw std::runtime_error("too few bins for the exponent fit");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : envelope) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double np = static_cast<double>(envelope.size());
  const double denom = np * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) throw std::runtime_error("degenerate envelope fit");
  double mu = (np * sxy - sx * sy) / denom;
  if (mu >= 1.0)
    throw std::runtime_error("fitted exponent mu = " + std::to_string(mu) +
                             " >= 1 flags a degenerate critical point");
  if (mu < -0.05) throw std::runtime_error("fitted exponent is negative; fit failed");
  mu = std::max(mu, 0.0);

  // Intercept from the binding sample, both signs, shrunk by the safety 0.9.
  double min_log_c = 1e300;
  for (const auto& s : samples)
    min_log_c = std::min(min_log_c, s.log_grad - mu * s.log_level);
  const double c = 0.9 * std::exp(min_log_c);

  LojaEstimate est;
  est.center = q;
  est.radius = r;
  est.c = c;
  est.mu = mu;
  est.phi_at_center = fq;
  est.samples_used = static_cast<int>(samples.size());
  return est;
}

bool verify_inequality(const AnalyticFunction& f, const LojaEstimate& est, int nsamples,
                       std::uint64_t seed) {
  if (!(est.c > 0.0) || !(est.mu >= 0.0) || !(est.mu < 1.0))
    throw std::invalid_argument("invalid estimate");
  Rng rng(seed);
  EvalScratch scratch;
  Point grad;
  for (int i = 0; i < nsamples; ++i) {
    const Point x = sample_in_ball(est.center, est.radius, rng);
    const double level = std::abs(f.value(x, scratch) - est.phi_at_center);
    if (level < kLevelFloor) continue;
    f.gradient(x, grad, scratch);
    if (!(norm(grad) > est.c * std::pow(level, est.mu))) return false;
  }
  return true;
}

AngleReport angle_condition(const AnalyticFunction& f, const Trajectory& traj,
                            const std::vector<int>& free) {
  std::vector<bool> mask(f.arity(), false);
  for (int j : free) {
    if (j < 0 || j >= f.arity()) throw std::invalid_argument("free index out of range");
    mask[j] = true;
  }

  AngleReport report;
  report.delta.reserve(traj.samples.size());
  report.delta_min = 1.0;
  EvalScratch scratch;
  Point grad;
  for (const auto& s : traj.samples) {
    f.gradient(s.x, grad, scratch);
    double restricted = 0.0;
    double frozen = 0.0;
    for (size_t j = 0; j < grad.size(); ++j) {
      if (mask[j])
        restricted += grad[j] * grad[j];
      else
        frozen += grad[j] * grad[j];
    }
    const double total = restricted + frozen;
    const double delta = total > 0.0 ? std::sqrt(restricted) / std::sqrt(total) : 0.0;
    report.delta.push_back(delta);
    report.delta_min = std::min(report.delta_min, delta);
  }
  if (traj.samples.empty()) report.delta_min = 0.0;
  return report;
}

LengthBoundReport length_bound_check(const ProcessRun& run, const LojaEstimate& est,
                                     double safety) {
  if (!(safety > 1.0)) throw std::invalid_argument("safety factor must exceed 1");
  LengthBoundReport report;
  report.r = est.radius;
  report.c_prime = safety / (est.c * (1.0 - est.mu));

  // q_0 = initial, q_i = terminal of step i.
  auto position = [&](long i) -> const Point& {
    return i == 0 ? run.initial : run.steps[static_cast<size_t>(i - 1)].terminal;
  };
  auto phi_at = [&](long i) {
    return i == 0 ? run.phi_initial : run.steps[static_cast<size_t>(i - 1)].phi;
  };
  const long last = static_cast<long>(run.steps.size());

  long l = -1;
  double hypothesis = 0.0;
  for (long i = 0; i <= last; ++i) {
    if (distance(position(i), est.center) > est.radius) continue;
    const double level = phi_at(i) - est.phi_at_center;
    if (level < 0.0) continue;  // saddle-adjacent; skipped
    const double value = report.c_prime * std::pow(level, 1.0 - est.mu);
    if (value < est.radius) {
      l = i;
      hypothesis = value;
      break;
    }
  }
  if (l < 0)
    throw std::runtime_error("no qualifying step: the hypothesis never holds at this radius");

  long n = l;
  while (n + 1 <= last && distance(position(n + 1), est.center) <= est.radius) ++n;

  double total = 0.0;
  for (long i = l + 1; i <= n; ++i) total += run.steps[static_cast<size_t>(i - 1)].arc_length;

  report.l = l;
  report.n = n;
  report.hypothesis_value = hypothesis;
  report.hypothesis_holds = true;
  report.total_length = total;
  report.bound_holds = total <= est.radius;
  return report;
}

}  // namespace seqgrad
