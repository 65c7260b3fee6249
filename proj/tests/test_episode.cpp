#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gpplan/episode.hpp"
#include "gpplan/errors.hpp"
#include "gpplan/field.hpp"
#include "gpplan/lipschitz.hpp"
#include "gpplan/math.hpp"
#include "support.hpp"

using namespace gpplan;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

struct Bench {
  GpHyperparams hyper{0.0, 1.0, 0.01, 0.2236, 0.2236};
  FieldGrid field = sample_field(6, 6, 0.05, hyper, 11);
  ActionModel actions = grid_neighbors(field.domain());
  RewardSpec reward = make_reward(RewardKind::Ucb, {{"beta", 0.3}});
  int start = 2 * 6 + 3;  // interior cell
};

EpisodeConfig greedy_config(PolicyKind kind, int steps) {
  EpisodeConfig cfg;
  cfg.policy = kind;
  cfg.steps = steps;
  cfg.beta = 0.5;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("episode") {

TEST_CASE("noise stream is identical across policies") {
  Bench b;
  const std::uint64_t noise_seed = 4242;
  const EpisodeResult ucb =
      run_episode(b.field, b.actions, b.hyper, b.reward, greedy_config(PolicyKind::GreedyUcb, 8),
                  b.start, noise_seed, 0);
  const EpisodeResult pi =
      run_episode(b.field, b.actions, b.hyper, b.reward, greedy_config(PolicyKind::GreedyPi, 8),
                  b.start, noise_seed, 0);

  // the policies walk different paths...
  bool diverged = false;
  for (int k = 0; k < 8; ++k) diverged |= ucb.steps[k].location != pi.steps[k].location;
  CHECK(diverged);

  // ...yet each step sees the same pre-drawn noise: z - field(loc) matches the
  // stream value regardless of which cell the policy chose
  GaussianStream stream(noise_seed);
  std::vector<double> noise(9);
  for (double& v : noise) v = stream.next();
  const double sd = std::sqrt(b.hyper.noise_variance);
  for (int k = 0; k < 8; ++k) {
    const double ru = ucb.steps[k].z - b.field.at(ucb.steps[k].location);
    const double rp = pi.steps[k].z - b.field.at(pi.steps[k].location);
    CHECK(ru == doctest::Approx(sd * noise[k + 1]).epsilon(1e-12));
    CHECK(rp == doctest::Approx(sd * noise[k + 1]).epsilon(1e-12));
  }
}

TEST_CASE("episodes are seed-deterministic") {
  Bench b;
  EpisodeConfig cfg = greedy_config(PolicyKind::GreedyEi, 10);
  const EpisodeResult a = run_episode(b.field, b.actions, b.hyper, b.reward, cfg, b.start, 7, 3);
  const EpisodeResult c = run_episode(b.field, b.actions, b.hyper, b.reward, cfg, b.start, 7, 3);
  REQUIRE(a.steps.size() == c.steps.size());
  CHECK(a.seed == 3);
  CHECK(a.start == b.start);
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    CHECK(a.steps[k].location == c.steps[k].location);
    CHECK(std::memcmp(&a.steps[k].z, &c.steps[k].z, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.steps[k].reward, &c.steps[k].reward, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.steps[k].cum_reward, &c.steps[k].cum_reward, sizeof(double)) == 0);
  }
  CHECK(std::memcmp(&a.total_reward, &c.total_reward, sizeof(double)) == 0);
}

TEST_CASE("single-sample planner walks exactly like mean substitution") {
  Bench b;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    EpisodeConfig sparse;
    sparse.policy = PolicyKind::EpsilonGpp;
    sparse.steps = 8;
    sparse.horizon = 2;
    sparse.lambda = 0.5;  // validates; Fixed ignores it
    sparse.budget_mode = BudgetMode::Fixed;
    sparse.fixed_tau = 0.0;
    sparse.fixed_n = 1;

    EpisodeConfig ml = sparse;
    ml.policy = PolicyKind::MlObs;

    const EpisodeResult a =
        run_episode(b.field, b.actions, b.hyper, b.reward, sparse, b.start, seed, seed);
    const EpisodeResult c =
        run_episode(b.field, b.actions, b.hyper, b.reward, ml, b.start, seed, seed);
    REQUIRE(a.steps.size() == c.steps.size());
    for (std::size_t k = 0; k < a.steps.size(); ++k)
      CHECK(a.steps[k].location == c.steps[k].location);
  }
}

TEST_CASE("greedy scores follow their acquisition formulas") {
  Bench b;
  const Domain domain = b.field.domain();
  History hist = History::from_observations(
      {domain.location(14), domain.location(21)}, {0.9, -0.4}, b.hyper);
  const int current = 15;
  const double z_best = 0.9;

  for (PolicyKind kind : {PolicyKind::GreedyUcb, PolicyKind::GreedyPi, PolicyKind::GreedyEi}) {
    const double beta = 0.7, xi = 0.05;
    int expect = -1;
    double best = -1e300;
    for (int succ : b.actions.at(current)) {
      const Posterior post = hist.posterior(domain.location(succ), b.hyper);
      const double sigma = std::sqrt(post.variance);
      const double diff = post.mean - z_best - xi;
      double score = 0.0;
      if (kind == PolicyKind::GreedyUcb) score = post.mean + beta * sigma;
      if (kind == PolicyKind::GreedyPi) score = normal_cdf(diff / sigma);
      if (kind == PolicyKind::GreedyEi)
        score = diff * normal_cdf(diff / sigma) + sigma * normal_pdf(diff / sigma);
      if (score > best) {
        best = score;
        expect = succ;
      }
    }
    CHECK(greedy_action(hist, current, domain, b.actions, b.hyper, kind, beta, xi) == expect);
  }

  // before any measurement the improvement target falls back to the prior mean
  const History empty;
  CHECK_NOTHROW(
      greedy_action(empty, current, domain, b.actions, b.hyper, PolicyKind::GreedyPi, 0.0, 0.0));
  CHECK_THROWS_AS(
      greedy_action(empty, current, domain, b.actions, b.hyper, PolicyKind::EpsilonGpp, 0.0, 0.0),
      ArgumentError);
}

TEST_CASE("realized rewards and running statistics are consistent") {
  Bench b;
  RewardSpec reward = make_reward(RewardKind::Step, {{"threshold", 0.2}});
  EpisodeConfig cfg = greedy_config(PolicyKind::GreedyUcb, 6);
  const EpisodeResult r =
      run_episode(b.field, b.actions, b.hyper, reward, cfg, b.start, 99, 0);

  double cum = 0.0, mx = -1e300;
  for (const StepRecord& rec : r.steps) {
    // step reward for this catalog entry is the indicator of exceeding the
    // threshold: recompute from the recorded measurement
    const double expect = rec.z > 0.2 ? 1.0 : 0.0;
    CHECK(rec.reward == expect);
    CHECK(rec.reward_normalized == doctest::Approx(rec.reward - b.hyper.prior_mean).epsilon(1e-15));
    cum += rec.reward;
    mx = std::max(mx, rec.reward);
    CHECK(rec.cum_reward == doctest::Approx(cum).epsilon(1e-12));
    CHECK(rec.max_reward == doctest::Approx(mx).epsilon(1e-12));
  }
  CHECK(r.total_reward == doctest::Approx(cum).epsilon(1e-12));
  CHECK(r.max_reward == doctest::Approx(mx).epsilon(1e-12));
}

TEST_CASE("first-step tree size reproduces a direct plan call") {
  Bench b;
  EpisodeConfig cfg;
  cfg.policy = PolicyKind::EpsilonGpp;
  cfg.steps = 2;
  cfg.horizon = 2;
  cfg.lambda = 0.2;
  cfg.budget_mode = BudgetMode::Analytic;
  const std::uint64_t noise_seed = 5;
  const EpisodeResult r =
      run_episode(b.field, b.actions, b.hyper, b.reward, cfg, b.start, noise_seed, 0);

  // rebuild the planner's view of step 0: prior observation at the start cell
  GaussianStream stream(noise_seed);
  const double first_draw = stream.next();
  const Domain domain = b.field.domain();
  History hist = History{}.extended(
      domain.location(b.start),
      b.field.at(b.start) + std::sqrt(b.hyper.noise_variance) * first_draw, b.hyper);

  PlannerConfig pc;
  pc.horizon = 2;
  pc.lambda = 0.2;
  pc.budget_mode = BudgetMode::Analytic;
  const LipschitzTable table =
      precompute_lipschitz(hist, b.start, b.actions, 2, b.hyper, b.reward, domain);
  const PlanInputs in{domain, b.actions, b.hyper, b.reward, table};
  const PlanResult pr = plan(hist, b.start, pc, in);
  CHECK(r.steps[0].tree_nodes == pr.stats.nodes);
  CHECK(r.steps[0].location == pr.action);
  CHECK(r.steps[0].n_max == pr.stats.n_max);
}

TEST_CASE("horizon clips to the steps remaining") {
  Bench b;
  EpisodeConfig cfg;
  cfg.policy = PolicyKind::EpsilonGpp;
  cfg.steps = 3;
  cfg.horizon = 5;
  cfg.lambda = 0.3;
  cfg.budget_mode = BudgetMode::Fixed;
  cfg.fixed_tau = 0.0;
  cfg.fixed_n = 1;
  const EpisodeResult r =
      run_episode(b.field, b.actions, b.hyper, b.reward, cfg, b.start, 17, 0);
  // last replan has a single stage: its tree is exactly the action fan-out
  CHECK(r.steps[2].tree_nodes ==
        static_cast<long long>(b.actions.at(r.steps[1].location).size()));
}

TEST_CASE("planner failures carry the step index") {
  Bench b;
  EpisodeConfig cfg;
  cfg.policy = PolicyKind::EpsilonGpp;
  cfg.steps = 2;
  cfg.horizon = 2;
  cfg.lambda = 1e-12;  // unattainable per-stage tolerance
  cfg.budget_mode = BudgetMode::Analytic;
  try {
    run_episode(b.field, b.actions, b.hyper, b.reward, cfg, b.start, 1, 0);
    FAIL("expected BudgetError");
  } catch (const BudgetError& e) {
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }
}

TEST_CASE("aggregate means and standard errors") {
  EpisodeResult a, b;
  a.steps.resize(2);
  b.steps.resize(2);
  a.steps[0].cum_reward = 1.0;
  b.steps[0].cum_reward = 3.0;
  a.steps[1].cum_reward = 2.0;
  b.steps[1].cum_reward = 6.0;
  a.steps[0].max_reward = 1.0;
  b.steps[0].max_reward = 3.0;
  a.steps[1].max_reward = 1.0;
  b.steps[1].max_reward = 3.0;
  a.steps[0].tree_nodes = 10;
  b.steps[0].tree_nodes = 30;
  a.steps[1].tree_nodes = 10;
  b.steps[1].tree_nodes = 30;
  a.steps[0].step = b.steps[0].step = 0;
  a.steps[1].step = b.steps[1].step = 1;

  const std::vector<StepAggregate> agg = aggregate({a, b});
  REQUIRE(agg.size() == 2);
  CHECK(agg[0].cum_reward_mean == 2.0);
  // sample std of {1, 3} is sqrt(2); SE = sqrt(2)/sqrt(2) = 1
  CHECK(agg[0].cum_reward_se == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(agg[1].cum_reward_mean == 4.0);
  CHECK(agg[1].cum_reward_se == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(agg[0].max_reward_mean == 2.0);
  // cumulative node counts: step 1 holds 20 and 60
  CHECK(agg[1].cum_nodes_mean == doctest::Approx(40.0).epsilon(1e-12));

  // single episode: standard errors are zero
  const std::vector<StepAggregate> solo = aggregate({a});
  CHECK(solo[0].cum_reward_se == 0.0);
  CHECK(solo[1].cum_nodes_se == 0.0);

  EpisodeResult c;
  c.steps.resize(3);
  CHECK_THROWS_AS(aggregate({a, c}), ArgumentError);
  CHECK_THROWS_AS(aggregate({}), ArgumentError);
}

TEST_CASE("csv writers emit the documented layouts") {
  Bench b;
  EpisodeConfig cfg = greedy_config(PolicyKind::GreedyUcb, 3);
  const EpisodeResult r =
      run_episode(b.field, b.actions, b.hyper, b.reward, cfg, b.start, 21, 4);

  TempFile results("gpplan_results.csv");
  write_results_csv(results.path, {r});
  const std::string res = slurp(results.path);
  CHECK(res.rfind("seed,step,x,y,z,reward,reward_normalized,cum_reward,max_reward,tree_nodes,"
                  "wall_ms\n", 0) == 0);
  CHECK(std::count(res.begin(), res.end(), '\n') == 4);  // header + 3 steps
  CHECK(res.find("\n4,0,") != std::string::npos);        // seed label leads each row

  TempFile summary("gpplan_summary.csv");
  write_summary_csv(summary.path, aggregate({r}));
  const std::string sum = slurp(summary.path);
  CHECK(sum.rfind("step,cum_reward_mean,cum_reward_se,max_reward_mean,max_reward_se,"
                  "cum_nodes_mean,cum_nodes_se\n", 0) == 0);
  CHECK(std::count(sum.begin(), sum.end(), '\n') == 4);

  // trace rows appear only for anytime runs with tracing on
  EpisodeConfig at;
  at.policy = PolicyKind::Anytime;
  at.steps = 2;
  at.horizon = 2;
  at.lambda = 0.25;
  at.trace = true;
  at.stop.max_nodes = 500;
  const EpisodeResult tr =
      run_episode(b.field, b.actions, b.hyper, b.reward, at, b.start, 22, 9);
  TempFile trace("gpplan_trace.csv");
  write_trace_csv(trace.path, {tr});
  const std::string trc = slurp(trace.path);
  CHECK(trc.rfind("seed,step,iteration,nodes,upper,lower,gap\n", 0) == 0);
  CHECK(std::count(trc.begin(), trc.end(), '\n') >= 3);
}

}  // TEST_SUITE
