#include <doctest.h>

#include <cmath>

#include "seqgrad/perturb.hpp"
#include "seqgrad/scenarios.hpp"
#include "test_util.hpp"

using namespace seqgrad;
using namespace seqgrad::testing;

namespace {

RadialPerturbation basin_pert(double b) {
  // o off both axes so the perturbation breaks the trapping slice of
  // saddle_basin2d; p = (1, 0) is the designated minimum.
  return RadialPerturbation::make({0.3, -0.2}, {1.0, 0.0}, 1, b, 4.0);
}

}  // namespace

TEST_CASE("h fixes the center and the designated minimum") {
  const auto pert = basin_pert(1e-3);
  const auto h = make_h(pert);

  const Point at_o = h.value(pert.o);
  CHECK(distance(at_o, pert.o) <= 1e-12);

  const Point at_p = h.value(pert.p);
  CHECK(distance(at_p, pert.p) <= 1e-12);

  CHECK(pert.a * std::pow(distance(pert.o, pert.p), 2) ==
        doctest::Approx(2.0 * 3.14159265358979323846).epsilon(1e-15));
}

TEST_CASE("b = 0 gives the identity and an unchanged function") {
  const auto pert = basin_pert(0.0);
  const auto h = make_h(pert);
  const Scenario s = builtin("saddle_basin2d");
  const auto psi = perturb_function(s.f, pert);

  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    const Point x = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const Point hx = h.value(x);
    CHECK(hx[0] == x[0]);
    CHECK(hx[1] == x[1]);
    CHECK(psi.value(x) == s.f.value(x));
  }
}

TEST_CASE("perturbed function keeps a genuine minimum near p") {
  const Scenario s = builtin("saddle_basin2d");
  const auto pert = basin_pert(1e-3);
  const auto psi = perturb_function(s.f, pert);

  const Point refined = refine_critical_point(psi, pert.p);
  CHECK(distance(refined, pert.p) <= 10.0 * pert.b);
  const auto info = classify_point(psi, refined);
  CHECK(info.is_critical);
  CHECK(info.classification == CriticalPointInfo::Kind::Minimum);

  // The quadratic scenario: p itself stays critical because h(p) = p and
  // Dh(p) is invertible.
  const Scenario q = builtin("quadratic_ab");
  const auto qpert = RadialPerturbation::make({0.5, 0.25}, {0.0, 0.0}, 1, 1e-3, 5.0);
  const auto qpsi = perturb_function(q.f, qpert);
  CHECK(norm(qpsi.gradient({0.0, 0.0})) <= 1e-6);
  const auto qinfo = classify_point(qpsi, refine_critical_point(qpsi, {0.0, 0.0}));
  CHECK(qinfo.classification == CriticalPointInfo::Kind::Minimum);
}

TEST_CASE("the fixed minimum persists across every scenario with one") {
  for (const char* name : {"quadratic_ab", "saddle_basin2d", "finite_hit2d", "navfn_demo"}) {
    const Scenario s = builtin(name);
    CAPTURE(name);
    const auto p = s.designated_minimum();
    REQUIRE(p.has_value());
    Point o = s.start_region.center;
    o[0] += 0.27;  // generic center away from p
    const double b = 1e-3;
    const auto pert = RadialPerturbation::make(o, *p, 1, b, 8.0);
    const auto psi = perturb_function(s.f, pert);
    const Point refined = refine_critical_point(psi, *p);
    CHECK(distance(refined, *p) <= 10.0 * b);
    const auto info = classify_point(psi, refined);
    CHECK(info.is_critical);
    CHECK(info.classification == CriticalPointInfo::Kind::Minimum);
  }
}

TEST_CASE("closeness to the identity scales linearly in b") {
  const Scenario s = builtin("saddle_basin2d");
  Rng rng(5150);
  std::vector<Point> probes;
  for (int i = 0; i < 1000; ++i)
    probes.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});

  double prev = -1.0;
  for (double b : {1e-2, 1e-3, 1e-4}) {
    const auto h = make_h(basin_pert(b));
    double worst = 0.0;
    for (const auto& x : probes) worst = std::max(worst, distance(h.value(x), x));
    CHECK(worst > 0.0);
    if (prev > 0.0) {
      const double ratio = prev / worst;
      CHECK(ratio > 5.0);  // one decade of b shrinks the defect by about one decade
      CHECK(ratio < 20.0);
    }
    prev = worst;
  }
}

TEST_CASE("gradient of the composed function matches finite differences") {
  const Scenario s = builtin("saddle_basin2d");
  const auto psi = perturb_function(s.f, basin_pert(1e-3));
  Rng rng(61);
  for (int i = 0; i < 100; ++i) {
    const Point x = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
    const Point ad = psi.gradient(x);
    const Point fd = central_diff_gradient(psi, x);
    for (int j = 0; j < 2; ++j) CHECK(rel_err(ad[j], fd[j]) <= 1e-6);
  }
}

TEST_CASE("injectivity bound rejects oversized amplitudes") {
  const double a = 2.0 * 3.14159265358979323846 / 0.53;
  const double bound = injectivity_bound(a, 4.0);
  CHECK(bound > 0.0);
  CHECK(bound < 1.0);
  CHECK_THROWS_WITH_AS(basin_pert(bound * 2.0),
                       doctest::Contains("breaks injectivity"), std::invalid_argument);
  CHECK_THROWS_AS(RadialPerturbation::make({0.0, 0.0}, {0.0, 0.0}, 1, 0.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("saddle escape statistics") {
  const Scenario s = builtin("saddle_basin2d");
  const Point saddle = {0.0, 0.0};
  const FlowSettings flow;
  StoppingCriteria stop;
  stop.max_steps = 400;

  SUBCASE("zero trials") {
    const auto rep = saddle_escape_test(s.f, basin_pert(0.0), s.domain, saddle, 0, 0.5,
                                        s.schedule_default, flow, stop, 1);
    CHECK(rep.trials == 0);
    CHECK(rep.outcomes.empty());
  }

  SUBCASE("unperturbed starts on the trapping slice reach the saddle") {
    const auto rep = saddle_escape_test(s.f, basin_pert(0.0), s.domain, saddle, 24, 0.5,
                                        s.schedule_default, flow, stop, 99);
    CHECK(rep.to_saddle == 24);
  }

  SUBCASE("the radial perturbation frees the trapped starts") {
    const auto rep = saddle_escape_test(s.f, basin_pert(1e-3), s.domain, saddle, 24, 0.5,
                                        s.schedule_default, flow, stop, 99);
    CHECK(rep.to_minimum >= 23);
    CHECK(rep.to_saddle <= 1);
  }

  SUBCASE("b = 0 reproduces the unperturbed statistics for the same seed") {
    const auto plain = saddle_escape_test(s.f, basin_pert(0.0), s.domain, saddle, 16, 0.5,
                                          s.schedule_default, flow, stop, 7);
    const auto again = saddle_escape_test(s.f, basin_pert(0.0), s.domain, saddle, 16, 0.5,
                                          s.schedule_default, flow, stop, 7);
    CHECK(plain.outcomes == again.outcomes);
  }
}
