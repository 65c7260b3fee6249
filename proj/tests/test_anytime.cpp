#include <climits>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gpplan/anytime.hpp"
#include "gpplan/errors.hpp"
#include "gpplan/lipschitz.hpp"
#include "gpplan/planner.hpp"
#include "support.hpp"

using namespace gpplan;
using testsupport::TestInstance;
using testsupport::TestRng;

namespace {

struct Setup {
  TestInstance inst;
  PlannerConfig cfg;
  LipschitzTable table;

  PlanInputs inputs() const {
    return PlanInputs{inst.domain, inst.actions, inst.hyper, inst.reward, table};
  }
};

Setup make_setup(std::uint64_t seed, RewardKind kind, int locations, double lambda) {
  TestRng rng(seed);
  Setup s{testsupport::make_instance(rng, kind, locations, 2), {}, {}};
  s.cfg.horizon = 2;
  s.cfg.lambda = lambda;
  s.cfg.budget_mode = BudgetMode::Analytic;
  s.table = precompute_lipschitz(s.inst.prior, s.inst.start, s.inst.actions, s.cfg.horizon,
                                 s.inst.hyper, s.inst.reward, s.inst.domain);
  return s;
}

AnytimeStop unlimited() {
  AnytimeStop stop;
  stop.max_nodes = LLONG_MAX;
  return stop;
}

}  // namespace

TEST_SUITE("anytime") {

TEST_CASE("root bounds sandwich the exhaustive value at every iteration") {
  for (std::uint64_t seed : {3u, 9u, 27u}) {
    Setup s = make_setup(seed, RewardKind::Step, 3, 0.1);
    const PlanInputs in = s.inputs();
    const double exact = value_epsilon(s.inst.prior, s.inst.start, 0, s.cfg, in);

    std::vector<AnytimeTracePoint> trace;
    const AnytimeResult result =
        anytime_plan(s.inst.prior, s.inst.start, s.cfg, unlimited(), in, &trace);

    REQUIRE(!trace.empty());
    double prev_upper = 1e300, prev_lower = -1e300;
    long long prev_nodes = 0;
    for (const AnytimeTracePoint& point : trace) {
      CHECK(point.lower <= exact + 1e-9);
      CHECK(point.upper >= exact - 1e-9);
      CHECK(point.upper <= prev_upper + 1e-12);
      CHECK(point.lower >= prev_lower - 1e-12);
      CHECK(point.nodes >= prev_nodes);
      prev_upper = point.upper;
      prev_lower = point.lower;
      prev_nodes = point.nodes;
    }
    CHECK(result.lower <= exact + 1e-9);
    CHECK(result.upper >= exact - 1e-9);
  }
}

TEST_CASE("saturation recovers the exhaustive planner's action and a tight gap") {
  for (std::uint64_t seed : {5u, 14u, 42u}) {
    Setup s = make_setup(seed, RewardKind::Gaussian, 4, 0.08);
    const PlanInputs in = s.inputs();
    const AnytimeResult result = anytime_plan(s.inst.prior, s.inst.start, s.cfg, unlimited(), in);
    CHECK(result.fully_expanded);
    CHECK(result.gap() <= 2.0 * s.cfg.lambda * s.cfg.horizon + 1e-9);

    const PlanResult exhaustive = plan(s.inst.prior, s.inst.start, s.cfg, in);
    CHECK(result.action == exhaustive.action);
    // the exhaustive value sits inside the final interval
    CHECK(result.lower <= exhaustive.value + 1e-9);
    CHECK(result.upper >= exhaustive.value - 1e-9);
  }
}

TEST_CASE("per-action bounds cover the chosen action") {
  Setup s = make_setup(77, RewardKind::Ucb, 4, 0.1);
  const AnytimeResult result =
      anytime_plan(s.inst.prior, s.inst.start, s.cfg, unlimited(), s.inputs());
  REQUIRE(result.per_action.size() == s.inst.actions.at(s.inst.start).size());
  double best_lower = -1e300;
  int best_action = -1;
  for (std::size_t i = 0; i < result.per_action.size(); ++i) {
    const AnytimeActionBounds& b = result.per_action[i];
    if (i > 0) CHECK(b.action > result.per_action[i - 1].action);
    CHECK(b.lower <= b.upper + 1e-12);
    if (b.lower > best_lower) {
      best_lower = b.lower;
      best_action = b.action;
    }
  }
  CHECK(result.action == best_action);
}

TEST_CASE("node cap stops the search early") {
  Setup s = make_setup(101, RewardKind::Mes, 4, 0.02);
  AnytimeStop stop;
  stop.max_nodes = 40;
  const AnytimeResult capped = anytime_plan(s.inst.prior, s.inst.start, s.cfg, stop, s.inputs());
  CHECK(!capped.fully_expanded);
  const AnytimeResult full =
      anytime_plan(s.inst.prior, s.inst.start, s.cfg, unlimited(), s.inputs());
  CHECK(capped.nodes < full.nodes);
  CHECK(capped.gap() >= full.gap() - 1e-12);
}

TEST_CASE("gap target stops once the interval is tight enough") {
  Setup s = make_setup(55, RewardKind::Step, 4, 0.05);
  const AnytimeResult full =
      anytime_plan(s.inst.prior, s.inst.start, s.cfg, unlimited(), s.inputs());
  const double target = full.gap() + 0.5;

  AnytimeStop stop = unlimited();
  stop.gap_target = target;
  const AnytimeResult early = anytime_plan(s.inst.prior, s.inst.start, s.cfg, stop, s.inputs());
  CHECK(early.gap() <= target);
  CHECK(early.nodes <= full.nodes);
}

TEST_CASE("iteration cap is exact") {
  Setup s = make_setup(88, RewardKind::Gaussian, 4, 0.05);
  AnytimeStop stop = unlimited();
  stop.max_iterations = 1;
  const AnytimeResult result = anytime_plan(s.inst.prior, s.inst.start, s.cfg, stop, s.inputs());
  CHECK(result.iterations == 1);

  stop.max_iterations = 3;
  const AnytimeResult three = anytime_plan(s.inst.prior, s.inst.start, s.cfg, stop, s.inputs());
  CHECK(three.iterations <= 3);
  CHECK(three.gap() <= result.gap() + 1e-12);
}

TEST_CASE("works under every budget mode") {
  Setup s = make_setup(7, RewardKind::Ucb, 3, 0.1);
  const PlanInputs in = s.inputs();

  const AnytimeResult analytic = anytime_plan(s.inst.prior, s.inst.start, s.cfg, unlimited(), in);
  CHECK(analytic.fully_expanded);

  PlannerConfig capped = s.cfg;
  capped.budget_mode = BudgetMode::Capped;
  capped.n_cap = 40;
  const AnytimeResult capped_result =
      anytime_plan(s.inst.prior, s.inst.start, capped, unlimited(), in);
  CHECK(capped_result.fully_expanded);
  CHECK(capped_result.stats.n_max < 40);

  PlannerConfig fixed = s.cfg;
  fixed.budget_mode = BudgetMode::Fixed;
  fixed.fixed_tau = 1.5;
  fixed.fixed_n = 5;
  const AnytimeResult fixed_result =
      anytime_plan(s.inst.prior, s.inst.start, fixed, unlimited(), in);
  CHECK(fixed_result.fully_expanded);
  CHECK(fixed_result.stats.n_min == 5);
  CHECK(fixed_result.stats.n_max == 5);
}

TEST_CASE("node accounting matches the tree") {
  Setup s = make_setup(31, RewardKind::Ucb, 3, 0.2);
  std::vector<AnytimeTracePoint> trace;
  const AnytimeResult result =
      anytime_plan(s.inst.prior, s.inst.start, s.cfg, unlimited(), s.inputs(), &trace);
  CHECK(result.nodes == result.stats.nodes);
  CHECK(result.nodes == trace.back().nodes);
  CHECK(result.iterations == trace.back().iteration);
  // the tree holds at least the root and one sample child per root action
  CHECK(result.nodes > static_cast<long long>(s.inst.actions.at(s.inst.start).size()));
}

}  // TEST_SUITE
