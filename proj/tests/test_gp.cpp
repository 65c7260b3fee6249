#include <cmath>
#include <vector>

#include "doctest.h"
#include "gpplan/errors.hpp"
#include "gpplan/gp.hpp"
#include "gpplan/reward.hpp"
#include "support.hpp"

using namespace gpplan;
using testsupport::TestRng;
using testsupport::dense_alpha;
using testsupport::dense_posterior;

namespace {

GpHyperparams wind_hyper() {
  GpHyperparams h;
  h.prior_mean = 0.0;
  h.signal_variance = 1.0;
  h.noise_variance = 0.01;
  h.length_scale_x = 0.2236;
  h.length_scale_y = 0.2236;
  return h;
}

Location loc(int index, double x, double y) { return Location{index, x, y}; }

// random history over a small grid of coordinates
struct RandomHistory {
  std::vector<Location> locs;
  std::vector<double> z;
};

RandomHistory random_history(TestRng& rng, const GpHyperparams& hyper, int len) {
  RandomHistory h;
  for (int i = 0; i < len; ++i) {
    h.locs.push_back(loc(i, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)));
    h.z.push_back(hyper.prior_mean + rng.normal());
  }
  return h;
}

}  // namespace

TEST_SUITE("gp") {

TEST_CASE("kernel reference value for adjacent grid cells") {
  const GpHyperparams hyper = wind_hyper();
  CHECK(kernel_eval(hyper, loc(0, 0.0, 0.0), loc(1, 0.05, 0.0)) ==
        doctest::Approx(0.9753084294682535).epsilon(1e-15));
  CHECK(kernel_eval(hyper, loc(0, 0.3, 0.7), loc(0, 0.3, 0.7)) == 1.0);
}

TEST_CASE("single-observation posterior reference values") {
  GpHyperparams hyper = wind_hyper();
  const Location s = loc(0, 0.0, 0.0);
  const History hist = History::from_observations({s}, {1.0}, hyper);
  const Posterior post = hist.posterior(s, hyper);
  // mean = 1 / (1 + noise); variance = 1 + noise - 1/(1 + noise)
  CHECK(post.mean == doctest::Approx(0.9900990099009901).epsilon(1e-15));
  CHECK(post.variance == doctest::Approx(0.01990099009900992).epsilon(1e-13));
}

TEST_CASE("empty history reproduces the prior") {
  const GpHyperparams hyper = wind_hyper();
  const History hist;
  const Posterior post = hist.posterior(loc(3, 0.4, 0.2), hyper);
  CHECK(post.mean == hyper.prior_mean);
  CHECK(post.variance == hyper.signal_variance + hyper.noise_variance);
  CHECK(hist.alpha_norm(loc(3, 0.4, 0.2), hyper) == 0.0);
  CHECK(hist.size() == 0);
}

TEST_CASE("posterior matches dense solve on random histories") {
  GpHyperparams hyper = wind_hyper();
  hyper.prior_mean = 0.3;
  TestRng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int len = rng.uniform_int(0, 30);
    const RandomHistory rh = random_history(rng, hyper, len);
    const History hist = History::from_observations(rh.locs, rh.z, hyper);
    REQUIRE(hist.size() == len);
    for (int probe = 0; probe < 3; ++probe) {
      const Location s = loc(99, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
      const Posterior got = hist.posterior(s, hyper);
      const Posterior want = dense_posterior(rh.locs, rh.z, hyper, s);
      worst = std::max({worst, std::abs(got.mean - want.mean),
                        std::abs(got.variance - want.variance)});
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("incremental factor matches full refactorization") {
  const GpHyperparams hyper = wind_hyper();
  TestRng rng(12);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int len = rng.uniform_int(1, 30);
    const RandomHistory rh = random_history(rng, hyper, len);
    History incremental;                 // rank-1 appends
    History refactored(true);            // full factorization per append
    for (int i = 0; i < len; ++i) {
      incremental = incremental.extended(rh.locs[i], rh.z[i], hyper);
      refactored = refactored.extended(rh.locs[i], rh.z[i], hyper);
    }
    const Location s = loc(99, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
    const Posterior a = incremental.posterior(s, hyper);
    const Posterior b = refactored.posterior(s, hyper);
    worst = std::max({worst, std::abs(a.mean - b.mean), std::abs(a.variance - b.variance)});
    CHECK(incremental.factor_reconstruction_error(hyper) < 1e-10);
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("alpha norm matches dense solve") {
  const GpHyperparams hyper = wind_hyper();
  TestRng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomHistory rh = random_history(rng, hyper, rng.uniform_int(1, 20));
    const History hist = History::from_observations(rh.locs, rh.z, hyper);
    const Location s = loc(99, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
    CHECK(hist.alpha_norm(s, hyper) ==
          doctest::Approx(dense_alpha(rh.locs, hyper, s)).epsilon(1e-9));
  }
}

TEST_CASE("posterior variance ignores the measurement values") {
  const GpHyperparams hyper = wind_hyper();
  TestRng rng(14);
  const RandomHistory rh = random_history(rng, hyper, 12);
  std::vector<double> other(rh.z.size());
  for (double& v : other) v = rng.uniform(-5.0, 5.0);
  const History a = History::from_observations(rh.locs, rh.z, hyper);
  const History b = History::from_observations(rh.locs, other, hyper);
  for (int probe = 0; probe < 10; ++probe) {
    const Location s = loc(99, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
    CHECK(std::abs(a.posterior(s, hyper).variance - b.posterior(s, hyper).variance) < 1e-12);
  }
}

TEST_CASE("posterior variance shrinks as history grows") {
  const GpHyperparams hyper = wind_hyper();
  TestRng rng(15);
  const RandomHistory rh = random_history(rng, hyper, 15);
  History shorter = History::from_observations(
      {rh.locs.begin(), rh.locs.begin() + 8}, {rh.z.begin(), rh.z.begin() + 8}, hyper);
  History longer = shorter;
  for (int i = 8; i < 15; ++i) longer = longer.extended(rh.locs[i], rh.z[i], hyper);
  for (int probe = 0; probe < 20; ++probe) {
    const Location s = loc(99, rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
    CHECK(longer.posterior(s, hyper).variance <= shorter.posterior(s, hyper).variance + 1e-9);
  }
}

TEST_CASE("expected immediate reward is lipschitz in the measurements") {
  // |E[R](z) - E[R](z')| <= alpha(s) (l1 + l2(sigma)) ||z - z'|| for fixed locations
  const GpHyperparams hyper = wind_hyper();
  TestRng rng(16);
  const RewardSpec reward = make_reward(RewardKind::Ucb, {{"beta", 0.7}});
  const RandomHistory rh = random_history(rng, hyper, 8);
  const Location s = loc(99, 0.6, 0.6);
  const History base = History::from_observations(rh.locs, rh.z, hyper);
  const Posterior base_post = base.posterior(s, hyper);
  const double sigma = std::sqrt(base_post.variance);
  const double alpha = base.alpha_norm(s, hyper);
  const double slope = alpha * (reward.l1 + reward.l2_of_sigma(sigma));
  const std::vector<Location> visited{s};
  const double base_reward = expected_immediate_reward(reward, base_post, visited);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> z = rh.z;
    double norm2 = 0.0;
    for (double& v : z) {
      const double d = 0.5 * rng.normal();
      v += d;
      norm2 += d * d;
    }
    const History other = History::from_observations(rh.locs, z, hyper);
    const double r = expected_immediate_reward(reward, other.posterior(s, hyper), visited);
    CHECK(std::abs(r - base_reward) <= slope * std::sqrt(norm2) + 1e-9);
  }
}

TEST_CASE("ill-conditioned appends are rejected") {
  GpHyperparams hyper = wind_hyper();
  hyper.noise_variance = 1e-13;
  const Location s = loc(0, 0.0, 0.0);
  History hist = History::from_observations({s}, {0.5}, hyper);
  auto pile_on = [&] {
    for (int i = 0; i < 4; ++i) hist = hist.extended(s, 0.5, hyper);
  };
  CHECK_THROWS_AS(pile_on(), ConditioningError);
}

TEST_CASE("hyperparameter validation") {
  GpHyperparams bad = wind_hyper();
  bad.noise_variance = 0.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = wind_hyper();
  bad.length_scale_x = -1.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = wind_hyper();
  bad.signal_variance = 0.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  CHECK_NOTHROW(wind_hyper().validate());
}

}  // TEST_SUITE
