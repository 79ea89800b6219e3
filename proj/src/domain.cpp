#include "seqgrad/domain.hpp"

#include <algorithm>
#include <cmath>

#include "seqgrad/rng.hpp"

namespace seqgrad {

Domain Domain::ball(Point center, double radius) {
  if (center.empty()) throw std::invalid_argument("ball center must have positive dimension");
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  Domain d;
  d.kind_ = Kind::Ball;
  d.dim_ = static_cast<int>(center.size());
  d.center_ = std::move(center);
  d.radius_ = radius;
  return d;
}

Domain Domain::level_set(std::vector<AnalyticFunction> boundary_fns, Point anchor) {
  if (boundary_fns.empty()) throw std::invalid_argument("level-set domain needs boundary functions");
  const int m = boundary_fns.front().arity();
  for (const auto& f : boundary_fns)
    if (f.arity() != m) throw std::invalid_argument("boundary function arity mismatch");
  if (static_cast<int>(anchor.size()) != m)
    throw std::invalid_argument("anchor dimension mismatch");
  Domain d;
  d.kind_ = Kind::LevelSet;
  d.dim_ = m;
  d.boundary_fns_ = std::move(boundary_fns);
  d.anchor_ = std::move(anchor);
  for (const auto& f : d.boundary_fns_)
    if (f.value(d.anchor_) >= 0.0)
      throw std::invalid_argument("anchor is not an interior point of the level-set domain");
  return d;
}

bool Domain::contains(const Point& x, double tol) const {
  if (static_cast<int>(x.size()) != dim_)
    throw std::invalid_argument("point dimension does not match domain");
  if (kind_ == Kind::Ball) return distance(x, center_) <= radius_ + tol;
  for (const auto& f : boundary_fns_)
    if (f.value(x) > tol) return false;
  return true;
}

std::vector<Point> Domain::sample_boundary(int n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  Rng rng(seed);
  std::vector<Point> out;
  out.reserve(n);

  if (kind_ == Kind::Ball) {
    for (int i = 0; i < n; ++i) {
      Point dir;
      double len = 0.0;
      do {
        dir = rng.gaussian_vec(dim_);
        len = norm(dir);
      } while (len < 1e-12);
      Point x(dim_);
      for (int j = 0; j < dim_; ++j) x[j] = center_[j] + radius_ * dir[j] / len;
      out.push_back(std::move(x));
    }
    return out;
  }

  for (int i = 0; i < n; ++i) {
    Point dir;
    double len = 0.0;
    do {
      dir = rng.gaussian_vec(dim_);
      len = norm(dir);
    } while (len < 1e-12);
    for (auto& c : dir) c /= len;

    auto ray_worst = [&](double t) {
      Point x(dim_);
      for (int j = 0; j < dim_; ++j) x[j] = anchor_[j] + t * dir[j];
      double w = -1e300;
      for (const auto& f : boundary_fns_) w = std::max(w, f.value(x));
      return w;
    };

    // Bracket the first crossing of max_a f_a along the ray, then bisect.
    double t_lo = 0.0, t_hi = 1.0;
    int guard = 0;
    while (ray_worst(t_hi) < 0.0) {
      t_lo = t_hi;
      t_hi *= 2.0;
      if (++guard > 60) throw std::runtime_error("boundary projection failed to bracket");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (t_lo + t_hi);
      if (ray_worst(mid) < 0.0)
        t_lo = mid;
      else
        t_hi = mid;
      if (t_hi - t_lo < 1e-15 * (1.0 + t_hi)) break;
    }
    double t = 0.5 * (t_lo + t_hi);

    // Newton refinement on the active constraint along the ray.
    Point x(dim_);
    for (int it = 0; it < 20; ++it) {
      for (int j = 0; j < dim_; ++j) x[j] = anchor_[j] + t * dir[j];
      int active = 0;
      double best = -1e300;
      for (size_t a = 0; a < boundary_fns_.size(); ++a) {
        const double v = boundary_fns_[a].value(x);
        if (v > best) {
          best = v;
          active = static_cast<int>(a);
        }
      }
      if (std::abs(best) < 1e-14) break;
      const Point g = boundary_fns_[active].gradient(x);
      double dd = 0.0;
      for (int j = 0; j < dim_; ++j) dd += g[j] * dir[j];
      if (std::abs(dd) < 1e-300) throw std::runtime_error("boundary projection: flat constraint");
      t -= best / dd;
    }
    for (int j = 0; j < dim_; ++j) x[j] = anchor_[j] + t * dir[j];
    out.push_back(std::move(x));
  }
  return out;
}

Point Domain::boundary_gradient(const Point& x, int* active) const {
  if (kind_ == Kind::Ball) {
    if (active) *active = 0;
    Point g(dim_);
    for (int j = 0; j < dim_; ++j) g[j] = 2.0 * (x[j] - center_[j]);
    return g;
  }
  int best_a = 0;
  double best = -1e300;
  for (size_t a = 0; a < boundary_fns_.size(); ++a) {
    const double v = boundary_fns_[a].value(x);
    if (v > best) {
      best = v;
      best_a = static_cast<int>(a);
    }
  }
  if (active) *active = best_a;
  return boundary_fns_[best_a].gradient(x);
}

Point Domain::outward_normal(const Point& x, int* active) const {
  Point g = boundary_gradient(x, active);
  const double len = norm(g);
  if (len < 1e-300) throw std::runtime_error("boundary is not regular at sampled point");
  for (auto& c : g) c /= len;
  return g;
}

BoundaryReport check_inward(const AnalyticFunction& phi, const Domain& domain,
                            const std::vector<Point>& samples) {
  BoundaryReport report;
  report.samples_checked = static_cast<int>(samples.size());
  for (const auto& x : samples) {
    const Point g = phi.gradient(x);
    const Point nrm = domain.outward_normal(x);
    double dot = 0.0;
    for (size_t j = 0; j < g.size(); ++j) dot -= g[j] * nrm[j];
    if (dot > 0.0) report.violations.push_back({x, -1, dot, 0.0});
  }
  return report;
}

BoundaryReport check_condition_ii_prime(const AnalyticFunction& phi, const Domain& domain,
                                        const std::vector<Point>& samples, double eps_sign) {
  BoundaryReport report;
  report.samples_checked = static_cast<int>(samples.size());
  for (const auto& x : samples) {
    const Point gphi = phi.gradient(x);
    const Point gfa = domain.boundary_gradient(x);
    for (size_t j = 0; j < gphi.size(); ++j) {
      const double a = gphi[j];
      const double b = gfa[j];
      if (std::abs(a) <= eps_sign || std::abs(b) <= eps_sign) continue;
      if ((a > 0.0) != (b > 0.0))
        report.violations.push_back({x, static_cast<int>(j), a, b});
    }
  }
  return report;
}

}  // namespace seqgrad
