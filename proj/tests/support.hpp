#pragma once

// Shared test helpers: a reproducible RNG independent of the library's
// generators, dense-solve GP oracles, a trapezoid expectation oracle, and a
// small random-instance builder.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "gpplan/geometry.hpp"
#include "gpplan/gp.hpp"
#include "gpplan/math.hpp"
#include "gpplan/reward.hpp"

namespace testsupport {

struct TestRng {
  std::uint64_t state;

  explicit TestRng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
};

// Posterior by explicit dense solve of Gamma = K + noise I; completely
// independent of History's incremental factorization.
inline gpplan::Posterior dense_posterior(const std::vector<gpplan::Location>& locs,
                                         const std::vector<double>& z,
                                         const gpplan::GpHyperparams& hyper,
                                         const gpplan::Location& s) {
  const int m = static_cast<int>(locs.size());
  if (m == 0)
    return {hyper.prior_mean, hyper.signal_variance + hyper.noise_variance};
  Eigen::MatrixXd gamma(m, m);
  Eigen::VectorXd k(m), resid(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) gamma(i, j) = gpplan::kernel_eval(hyper, locs[i], locs[j]);
    gamma(i, i) += hyper.noise_variance;
    k(i) = gpplan::kernel_eval(hyper, locs[i], s);
    resid(i) = z[i] - hyper.prior_mean;
  }
  const Eigen::VectorXd w = gamma.fullPivLu().solve(k);
  return {hyper.prior_mean + w.dot(resid),
          gpplan::kernel_eval(hyper, s, s) + hyper.noise_variance - w.dot(k)};
}

// || Gamma^{-1} k ||_2 by dense solve.
inline double dense_alpha(const std::vector<gpplan::Location>& locs,
                          const gpplan::GpHyperparams& hyper, const gpplan::Location& s) {
  const int m = static_cast<int>(locs.size());
  if (m == 0) return 0.0;
  Eigen::MatrixXd gamma(m, m);
  Eigen::VectorXd k(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) gamma(i, j) = gpplan::kernel_eval(hyper, locs[i], locs[j]);
    gamma(i, i) += hyper.noise_variance;
    k(i) = gpplan::kernel_eval(hyper, locs[i], s);
  }
  return gamma.fullPivLu().solve(k).norm();
}

// E[f(Z)], Z ~ N(mean, sigma^2), by trapezoid rule over mean +/- halfwidth*sigma.
inline double trapezoid_expect(const std::function<double(double)>& f, double mean, double sigma,
                               int n = 100000, double halfwidth = 10.0) {
  const double a = mean - halfwidth * sigma;
  const double h = 2.0 * halfwidth * sigma / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = a + h * i;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * f(z) * gpplan::normal_pdf((z - mean) / sigma) / sigma;
  }
  return acc * h;
}

// Small random planning instance over an explicit point set with complete
// movement, mirroring the shapes the self-check suite uses.
struct TestInstance {
  gpplan::Domain domain;
  gpplan::ActionModel actions;
  gpplan::GpHyperparams hyper;
  gpplan::RewardSpec reward;
  std::vector<gpplan::Location> prior_locs;
  std::vector<double> prior_z;
  gpplan::History prior;
  int start = 0;
  int horizon = 2;
};

inline TestInstance make_instance(TestRng& rng, gpplan::RewardKind kind, int locations,
                                  int prior_obs) {
  TestInstance inst;
  std::vector<std::pair<double, double>> points;
  for (int i = 0; i < locations; ++i)
    points.emplace_back(rng.uniform(0.0, 1.2), rng.uniform(0.0, 1.2));
  inst.domain = gpplan::Domain::from_points(points);
  inst.actions = gpplan::complete_moves(inst.domain);

  inst.hyper.prior_mean = rng.uniform(-0.4, 0.6);
  inst.hyper.signal_variance = rng.uniform(0.5, 1.5);
  inst.hyper.noise_variance = rng.uniform(0.005, 0.05);
  inst.hyper.length_scale_x = rng.uniform(0.3, 0.9);
  inst.hyper.length_scale_y = rng.uniform(0.3, 0.9);

  std::map<std::string, double> params;
  switch (kind) {
    case gpplan::RewardKind::Ucb: params["beta"] = rng.uniform(0.0, 1.0); break;
    case gpplan::RewardKind::Step:
      params["threshold"] = inst.hyper.prior_mean + rng.uniform(-0.5, 0.5);
      break;
    case gpplan::RewardKind::LogEnergy: params["cutin"] = rng.uniform(0.1, 0.6); break;
    default: break;
  }
  inst.reward = gpplan::make_reward(kind, params);

  for (int i = 0; i < prior_obs; ++i) {
    inst.prior_locs.push_back(inst.domain.location(rng.uniform_int(0, locations - 1)));
    inst.prior_z.push_back(inst.hyper.prior_mean + 0.8 * rng.normal());
  }
  inst.prior = gpplan::History::from_observations(inst.prior_locs, inst.prior_z, inst.hyper);
  inst.start = rng.uniform_int(0, locations - 1);
  return inst;
}

}  // namespace testsupport
