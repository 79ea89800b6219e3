#pragma once

#include <optional>
#include <vector>

#include "seqgrad/function.hpp"

namespace seqgrad {

/**
 * Compact domain with boundary: either a closed ball or a region cut out by
 * boundary defining functions f_a <= 0 with outward gradients. Level-set
 * domains carry an interior anchor point used to project rays onto the
 * boundary.
 */
class Domain {
 public:
  enum class Kind { Ball, LevelSet };

  static Domain ball(Point center, double radius);
  static Domain level_set(std::vector<AnalyticFunction> boundary_fns, Point anchor);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Point& center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<AnalyticFunction>& boundary_fns() const { return boundary_fns_; }
  const Point& anchor() const { return anchor_; }

  /// x in Omega up to tol; negative tol demands an interior margin.
  bool contains(const Point& x, double tol) const;

  /// n points on the boundary, deterministic for a fixed seed.
  /// Ball: normalized Gaussians. LevelSet: Newton/bisection projection of
  /// random rays from the anchor; throws on projection failure.
  std::vector<Point> sample_boundary(int n, std::uint64_t seed) const;

  /// Unit outward normal at a boundary point; for level sets the active
  /// (largest-valued) defining function is used and reported via `active`.
  Point outward_normal(const Point& x, int* active = nullptr) const;

  /// Gradient of the active boundary defining function at x (not normalized).
  /// Ball domains use the implicit function |x-c|^2 - r^2.
  Point boundary_gradient(const Point& x, int* active = nullptr) const;

 private:
  Kind kind_ = Kind::Ball;
  int dim_ = 0;
  Point center_;
  double radius_ = 0.0;
  std::vector<AnalyticFunction> boundary_fns_;
  Point anchor_;
};

struct BoundaryViolation {
  Point point;
  int component = -1;  // 0-based coordinate index; -1 for the inwardness check
  double dphi = 0.0;
  double dfa = 0.0;
};

struct BoundaryReport {
  int samples_checked = 0;
  std::vector<BoundaryViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Condition: -grad(phi) has nonpositive inner product with the outward
/// normal at every sampled boundary point.
BoundaryReport check_inward(const AnalyticFunction& phi, const Domain& domain,
                            const std::vector<Point>& samples);

/// Componentwise sign condition: for each sample and coordinate j, the j-th
/// components of grad(phi) and grad(f_a) have the same sign or at least one
/// is zero within eps_sign.
BoundaryReport check_condition_ii_prime(const AnalyticFunction& phi, const Domain& domain,
                                        const std::vector<Point>& samples,
                                        double eps_sign = 1e-10);

}  // namespace seqgrad
