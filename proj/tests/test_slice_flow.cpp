#include <doctest.h>

#include <Eigen/Dense>

#include "seqgrad/process.hpp"
#include "seqgrad/scenarios.hpp"
#include "seqgrad/slice_flow.hpp"
#include "test_util.hpp"

using namespace seqgrad;
using namespace seqgrad::testing;

TEST_CASE("project_gradient zeroes the frozen components") {
  const Scenario q = builtin("quadratic_ab");
  const Point full = project_gradient(q.f, {1.0, 1.0}, {0, 1});
  CHECK(full[0] == doctest::Approx(-8.0));
  CHECK(full[1] == doctest::Approx(-8.0));

  const Point restricted = project_gradient(q.f, {1.0, 1.0}, {0});
  CHECK(restricted[0] == doctest::Approx(-8.0));
  CHECK(restricted[1] == 0.0);

  const Point at_min = project_gradient(q.f, {0.0, 0.0}, {1});
  CHECK(at_min[0] == 0.0);
  CHECK(at_min[1] == 0.0);

  CHECK_THROWS_AS(project_gradient(q.f, {1.0, 1.0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(project_gradient(q.f, {1.0, 1.0}, {5}), std::invalid_argument);
}

TEST_CASE("slice flow reaches the restricted minimizer of the quadratic") {
  const Scenario q = builtin("quadratic_ab");
  const FlowSettings settings;
  const auto traj = integrate_slice(q.f, q.domain, {1.0, 1.0}, {0}, settings);
  REQUIRE(traj.reason == TerminationReason::Stationary);
  CHECK(std::abs(traj.terminal[0] - (-1.0 / 3.0)) <= 1e-8);
  CHECK(traj.terminal[1] == 1.0);  // frozen, bit-identical
  for (const auto& s : traj.samples) CHECK(s.x[1] == 1.0);
}

TEST_CASE("already-stationary starts give a single sample") {
  const Scenario q = builtin("quadratic_ab");
  const auto traj = integrate_slice(q.f, q.domain, {0.0, 0.0}, {0}, FlowSettings{});
  CHECK(traj.samples.size() == 1);
  CHECK(traj.arc_length == 0.0);
  CHECK(traj.terminal == Point{0.0, 0.0});
  CHECK(traj.reason == TerminationReason::Stationary);
}

TEST_CASE("zigzag x-slice lands on the first-order locus") {
  const Scenario z = builtin("zigzag3d");
  const Point start = {0.0, 0.37, -0.61};
  const auto traj = integrate_slice(z.f, z.domain, start, {0}, FlowSettings{});
  REQUIRE(traj.reason == TerminationReason::Stationary);
  const auto& t = traj.terminal;
  CHECK(std::abs(6.0 * t[0] + 2.0 * t[2] - 6.0 * t[1]) <= 1e-8);
  CHECK(t[1] == start[1]);
  CHECK(t[2] == start[2]);
}

TEST_CASE("divergent affine slice exits the domain") {
  // df/dy2 is constant on y2-slices with 3 y1 + y3 != 0.
  const Scenario z = builtin("zigzag3d");
  const auto traj = integrate_slice(z.f, z.domain, {0.0, 0.5, 0.5}, {1}, FlowSettings{});
  CHECK(traj.reason == TerminationReason::LeftDomain);
  for (const auto& s : traj.samples) CHECK(z.domain.contains(s.x, 1e-6));
}

TEST_CASE("arc length") {
  const Scenario q = builtin("quadratic_ab");
  const auto single = integrate_slice(q.f, q.domain, {0.0, 0.0}, {0}, FlowSettings{});
  CHECK(arc_length(single) == 0.0);

  // |x|^2 flows along a straight segment from (1, 0) to the origin.
  const AnalyticFunction norm2(2, pow_i(var(0), 2) + pow_i(var(1), 2));
  const Domain ball = Domain::ball({0.0, 0.0}, 2.0);
  const auto traj = integrate_slice(norm2, ball, {1.0, 0.0}, {0}, FlowSettings{});
  CHECK(std::abs(arc_length(traj) - 1.0) <= 1e-6);
  CHECK(std::abs(traj.arc_length - arc_length(traj)) <= 1e-14);

  FlowSettings tighter;
  tighter.rtol /= 2.0;
  const auto traj2 = integrate_slice(norm2, ball, {1.0, 0.0}, {0}, tighter);
  CHECK(std::abs(arc_length(traj) - arc_length(traj2)) < 1e-4);
}

TEST_CASE("descent along samples and terminal stationarity") {
  const Scenario s = builtin("saddle_basin2d");
  const FlowSettings settings;
  const auto traj = integrate_slice(s.f, s.domain, {0.35, 1.2}, {0}, settings);
  REQUIRE(traj.reason == TerminationReason::Stationary);
  for (size_t i = 1; i < traj.samples.size(); ++i)
    CHECK(traj.samples[i].phi <= traj.samples[i - 1].phi + 1e-10);
  const Point g = project_gradient(s.f, traj.terminal, {0});
  CHECK(norm(g) <= settings.eps_stat);
  if (traj.polished) CHECK(norm(g) <= settings.newton_tol);
  for (const auto& sample : traj.samples) CHECK(s.domain.contains(sample.x, 1e-8));
}

TEST_CASE("quadratic oracle: terminal matches the restricted linear solve") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 3;
    Eigen::MatrixXd A(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd H = A.transpose() * A + Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) b(i) = rng.uniform(-1.0, 1.0);

    Expr e = constant(0.0);
    for (int i = 0; i < m; ++i) {
      e = e + constant(b(i)) * var(i);
      for (int j = 0; j < m; ++j) e = e + constant(0.5 * H(i, j)) * var(i) * var(j);
    }
    const AnalyticFunction f(m, e);
    const Domain dom = Domain::ball({0.0, 0.0, 0.0}, 50.0);

    const std::vector<int> free = {0, 2};
    const Point start = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto traj = integrate_slice(f, dom, start, free, FlowSettings{});
    REQUIRE(traj.reason == TerminationReason::Stationary);

    // Restricted first-order conditions: H_ff x_f = -(b_f + H_fr x_r).
    Eigen::MatrixXd Hff(2, 2);
    Eigen::VectorXd rhs(2);
    for (int r = 0; r < 2; ++r) {
      rhs(r) = -b(free[r]) - H(free[r], 1) * start[1];
      for (int c = 0; c < 2; ++c) Hff(r, c) = H(free[r], free[c]);
    }
    const Eigen::VectorXd sol = Hff.lu().solve(rhs);
    CHECK(std::abs(traj.terminal[0] - sol(0)) <= 1e-8);
    CHECK(std::abs(traj.terminal[2] - sol(1)) <= 1e-8);
    CHECK(traj.terminal[1] == start[1]);
  }
}

TEST_CASE("time budget is reported distinctly") {
  const AnalyticFunction f(1, pow_i(var(0), 2));
  const Domain dom = Domain::ball({0.0}, 10.0);
  FlowSettings s;
  s.t_max = 1e-3;  // far too small to reach stationarity
  const auto traj = integrate_slice(f, dom, {1.0}, {0}, s);
  CHECK(traj.reason == TerminationReason::TimeBudget);
  CHECK_FALSE(traj.polished);
}

TEST_CASE("settings invariants are enforced") {
  const Scenario q = builtin("quadratic_ab");
  FlowSettings bad;
  bad.h_init = bad.h_min / 2.0;
  CHECK_THROWS_AS(integrate_slice(q.f, q.domain, {1.0, 1.0}, {0}, bad), std::invalid_argument);
  FlowSettings neg;
  neg.rtol = 0.0;
  CHECK_THROWS_AS(integrate_slice(q.f, q.domain, {1.0, 1.0}, {0}, neg), std::invalid_argument);
  StoppingCriteria zero;
  zero.eps_crit = 0.0;
  CHECK_THROWS_AS(run_process(q.f, q.domain, {1.0, 1.0}, q.schedule_default, FlowSettings{}, zero),
                  std::invalid_argument);
}
