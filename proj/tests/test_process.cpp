#include <doctest.h>

#include <cmath>

#include "seqgrad/report.hpp"
#include "seqgrad/scenarios.hpp"
#include "test_util.hpp"

using namespace seqgrad;
using namespace seqgrad::testing;

TEST_CASE("next_block follows the cyclic formula") {
  const auto s = Schedule::cyclic_blocks(2, 3);
  CHECK(next_block(s, 1) == std::vector<int>{2, 3});  // m_1 = 2, block {3,4} 1-based
  CHECK(next_block(s, 2) == std::vector<int>{4, 5});
  CHECK(next_block(s, 3) == std::vector<int>{0, 1});  // m_3 = 1

  const auto rotated = Schedule::cyclic_blocks(2, 3, 1);
  CHECK(next_block(rotated, 1) == std::vector<int>{0, 1});  // first block forced to 1
  CHECK(next_block(rotated, 2) == std::vector<int>{2, 3});

  const auto e = Schedule::explicit_sets({{0}, {1, 2}});
  CHECK(next_block(e, 1) == std::vector<int>{0});
  CHECK(next_block(e, 3) == std::vector<int>{0});  // cyclic repeat
}

TEST_CASE("fairness_check") {
  const auto cyc = Schedule::cyclic_blocks(1, 3);
  const auto rep = fairness_check(cyc, 3, 12);
  CHECK(rep.passed);
  for (int j = 0; j < 3; ++j) CHECK(rep.max_gap[j] == 3);

  const auto unfair = Schedule::explicit_sets({{0}, {0, 1}});
  const auto bad = fairness_check(unfair, 3, 10);
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.missing.size() == 1);
  CHECK(bad.missing[0] == 2);

  const int window = 5;  // 2L-1 = 5 for three singleton blocks
  const auto rnd = Schedule::random_fair({{0}, {1}, {2}}, 77, window);
  const auto rrep = fairness_check(rnd, 3, 300);
  CHECK(rrep.passed);
  for (int j = 0; j < 3; ++j) CHECK(rrep.max_gap[j] <= window);

  CHECK_THROWS_AS(Schedule::random_fair({{0}, {1}, {2}}, 1, 3), std::invalid_argument);
}

TEST_CASE("quadratic process matches the closed-form recursion") {
  const Scenario q = builtin("quadratic_ab");
  const auto run =
      run_process(q.f, q.domain, {1.0, 1.0}, q.schedule_default, FlowSettings{}, StoppingCriteria{});
  REQUIRE(run.status == ProcessRun::Status::Converged);
  CHECK(norm(run.final_point()) <= 1e-7);
  CHECK(run.classification.classification == CriticalPointInfo::Kind::Minimum);

  // x <- -y/3 on odd steps, y <- -x/3 on even steps (x moved first).
  Point expect = {1.0, 1.0};
  REQUIRE(run.steps.size() >= 20);
  for (int k = 0; k < 20; ++k) {
    if (k % 2 == 0)
      expect[0] = -expect[1] / 3.0;
    else
      expect[1] = -expect[0] / 3.0;
    const auto& got = run.steps[k].terminal;
    CHECK(std::abs(got[0] - expect[0]) <= 1e-8);
    CHECK(std::abs(got[1] - expect[1]) <= 1e-8);
  }
}

TEST_CASE("critical initial point yields an ultimately constant sequence") {
  const Scenario q = builtin("quadratic_ab");
  const auto run = run_process(q.f, q.domain, {0.0, 0.0}, q.schedule_default, FlowSettings{},
                               StoppingCriteria{});
  REQUIRE(run.status == ProcessRun::Status::Converged);
  CHECK(run.final_point() == Point{0.0, 0.0});
  for (const auto& step : run.steps) CHECK(step.arc_length == 0.0);
}

TEST_CASE("zigzag process converges inside the invariant plane") {
  const Scenario z = builtin("zigzag3d");
  const auto run = run_process(z.f, z.domain, {0.5, 0.0, 0.5}, z.schedule_default,
                               FlowSettings{}, StoppingCriteria{});
  REQUIRE(run.status == ProcessRun::Status::Converged);
  CHECK(norm(run.final_point()) <= 1e-6);
  CHECK(run.classification.classification == CriticalPointInfo::Kind::Saddle);
  CHECK(run.classification.morse_index == 1);
  // x and z steps stay nontrivial until convergence; y steps are trivial.
  int moving = 0;
  for (const auto& step : run.steps)
    if (step.arc_length > 1e-9) ++moving;
  CHECK(moving >= 10);
}

TEST_CASE("off-plane zigzag start propagates a left_domain error verdict") {
  const Scenario z = builtin("zigzag3d");
  const auto run = run_process(z.f, z.domain, {0.0, 0.5, 0.5}, z.schedule_default,
                               FlowSettings{}, StoppingCriteria{});
  CHECK(run.status == ProcessRun::Status::Error);
  CHECK(run.error == "left_domain");
  CHECK(run.error_step == 2);  // the y2 step right after the first y1 step
}

TEST_CASE("monotone descent and slice consistency across a run") {
  const Scenario s = builtin("saddle_basin2d");
  const auto starts = sample_starts(s, 5, 1234);
  for (const auto& q0 : starts) {
    const auto run =
        run_process(s.f, s.domain, q0, s.schedule_default, FlowSettings{}, StoppingCriteria{});
    REQUIRE(run.status == ProcessRun::Status::Converged);
    double prev = run.phi_initial;
    Point prev_q = run.initial;
    for (const auto& step : run.steps) {
      CHECK(step.phi <= prev + 1e-10);
      if (step.arc_length > 1e-10) CHECK(step.phi < prev);
      for (int j = 0; j < 2; ++j) {
        bool in_block = false;
        for (int b : step.block) in_block |= (b == j);
        if (!in_block) CHECK(step.terminal[j] == prev_q[j]);
      }
      prev = step.phi;
      prev_q = step.terminal;
    }
  }
}

TEST_CASE("unfair schedules are rejected by run_process") {
  const Scenario q = builtin("quadratic_ab");
  const auto unfair = Schedule::explicit_sets({{0}});
  CHECK_THROWS_AS(run_process(q.f, q.domain, {1.0, 1.0}, unfair, FlowSettings{},
                              StoppingCriteria{}),
                  std::invalid_argument);
}

TEST_CASE("classification oracle values") {
  const Scenario q = builtin("quadratic_ab");
  const auto info = classify_point(q.f, {0.0, 0.0});
  CHECK(info.is_critical);
  CHECK(info.classification == CriticalPointInfo::Kind::Minimum);
  CHECK(info.morse_index == 0);
  CHECK(info.eigenvalues[0] == doctest::Approx(4.0));
  CHECK(info.eigenvalues[1] == doctest::Approx(8.0));

  const Scenario z = builtin("zigzag3d");
  const auto zi = classify_point(z.f, {0.0, 0.0, 0.0});
  CHECK(zi.classification == CriticalPointInfo::Kind::Saddle);
  CHECK(zi.morse_index == 1);
  CHECK(zi.nondegenerate);

  const AnalyticFunction cap(2, -(pow_i(var(0), 2) + pow_i(var(1), 2)));
  const auto ci = classify_point(cap, {0.0, 0.0});
  CHECK(ci.classification == CriticalPointInfo::Kind::Maximum);
  CHECK(ci.morse_index == 2);
}

TEST_CASE("runs are deterministic") {
  const Scenario s = builtin("navfn_demo");
  const auto sched = Schedule::random_fair(s.schedule_default.sets(), 555, 12);
  const Point q0 = s.suggested_starts[0];
  const auto a = run_process(s.f, s.domain, q0, sched, FlowSettings{}, StoppingCriteria{}, true);
  const auto b = run_process(s.f, s.domain, q0, sched, FlowSettings{}, StoppingCriteria{}, true);
  RunMetadata meta;
  meta.scenario = s.name;
  const auto ja = run_to_json(a, s.f, s.domain, sched, FlowSettings{}, StoppingCriteria{}, meta);
  const auto jb = run_to_json(b, s.f, s.domain, sched, FlowSettings{}, StoppingCriteria{}, meta);
  CHECK(ja.dump() == jb.dump());
}

TEST_CASE("component zero locus sampling") {
  const Scenario z = builtin("zigzag3d");
  const Point lo = {-1.0, -1.0, -1.0}, hi = {1.0, 1.0, 1.0};
  const auto pts = component_zero_locus_sample(z.f, 1, lo, hi, 8);
  CHECK(pts.size() > 0);
  for (const auto& p : pts) CHECK(std::abs(6.0 * p[0] + 2.0 * p[2]) <= 1e-6);

  const Scenario q = builtin("quadratic_ab");
  const auto qpts = component_zero_locus_sample(q.f, 0, {-1.0, -1.0}, {1.0, 1.0}, 16);
  CHECK(qpts.size() > 0);
  for (const auto& p : qpts) CHECK(std::abs(3.0 * p[0] + p[1]) <= 1e-6);

  const AnalyticFunction affine(2, var(0) + 2.0 * var(1));
  CHECK(component_zero_locus_sample(affine, 0, {-1.0, -1.0}, {1.0, 1.0}, 8).empty());
}
