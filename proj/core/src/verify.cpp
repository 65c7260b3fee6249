#include "gpplan/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "gpplan/anytime.hpp"
#include "gpplan/errors.hpp"
#include "gpplan/lipschitz.hpp"
#include "gpplan/math.hpp"
#include "gpplan/reward.hpp"

namespace gpplan {

bool VerifyReport::all_passed() const {
  for (const VerifyCheck& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

namespace {

// ------------------------------------------------------------ utilities ----

struct Rng {
  std::uint64_t state;

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
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
};

struct TinyInstance {
  Domain domain;
  ActionModel actions;
  GpHyperparams hyper;
  RewardKind kind = RewardKind::Ucb;
  std::map<std::string, double> params;
  RewardSpec reward;
  std::vector<int> prior_locs;
  std::vector<double> prior_z;
  History prior;
  int start = 0;
  int horizon = 2;
};

const RewardKind kAllKinds[] = {RewardKind::Ucb, RewardKind::Mes, RewardKind::Gaussian,
                                RewardKind::Step, RewardKind::LogEnergy};

TinyInstance make_instance(Rng& rng, RewardKind kind, int min_prior) {
  TinyInstance inst;
  const int n = rng.uniform_int(2, 4);
  std::vector<std::pair<double, double>> points;
  points.reserve(n);
  for (int i = 0; i < n; ++i) points.emplace_back(rng.uniform(0.0, 1.2), rng.uniform(0.0, 1.2));
  inst.domain = Domain::from_points(points);
  inst.actions = complete_moves(inst.domain);

  inst.hyper.prior_mean = rng.uniform(-0.4, 0.6);
  inst.hyper.signal_variance = rng.uniform(0.5, 1.5);
  inst.hyper.noise_variance = rng.uniform(0.005, 0.05);
  inst.hyper.length_scale_x = rng.uniform(0.3, 0.9);
  inst.hyper.length_scale_y = rng.uniform(0.3, 0.9);

  inst.kind = kind;
  switch (kind) {
    case RewardKind::Ucb:
      inst.params["beta"] = rng.uniform(0.0, 1.0);
      break;
    case RewardKind::Step:
      inst.params["threshold"] = inst.hyper.prior_mean + rng.uniform(-0.5, 0.5);
      break;
    case RewardKind::LogEnergy:
      inst.params["cutin"] = rng.uniform(0.1, 0.6);
      break;
    default:
      break;
  }
  inst.reward = make_reward(kind, inst.params);

  const int m = rng.uniform_int(min_prior, min_prior + 1);
  std::vector<Location> locs;
  for (int i = 0; i < m; ++i) {
    const int idx = rng.uniform_int(0, n - 1);
    inst.prior_locs.push_back(idx);
    inst.prior_z.push_back(inst.hyper.prior_mean + 0.8 * rng.normal());
    locs.push_back(inst.domain.location(idx));
  }
  inst.prior = History::from_observations(locs, inst.prior_z, inst.hyper);
  inst.start = rng.uniform_int(0, n - 1);
  inst.horizon = 2;
  return inst;
}

nlohmann::json instance_json(const TinyInstance& inst) {
  nlohmann::json j;
  nlohmann::json pts = nlohmann::json::array();
  for (int i = 0; i < inst.domain.size(); ++i) {
    const Location loc = inst.domain.location(i);
    pts.push_back({loc.x, loc.y});
  }
  j["points"] = pts;
  j["hyper"] = {{"prior_mean", inst.hyper.prior_mean},
                {"signal_variance", inst.hyper.signal_variance},
                {"noise_variance", inst.hyper.noise_variance},
                {"length_scale_x", inst.hyper.length_scale_x},
                {"length_scale_y", inst.hyper.length_scale_y}};
  j["reward"] = to_string(inst.kind);
  j["reward_params"] = inst.params;
  j["prior_locations"] = inst.prior_locs;
  j["prior_measurements"] = inst.prior_z;
  j["start"] = inst.start;
  j["horizon"] = inst.horizon;
  return j;
}

PlannerConfig base_config(const VerifyOptions& opts, int horizon, double lambda) {
  PlannerConfig pc;
  pc.horizon = horizon;
  pc.lambda = lambda;
  pc.budget_mode = opts.budget_mode;
  pc.n_cap = opts.n_cap;
  pc.lambda_coefficient_fn = opts.lambda_coefficient;
  return pc;
}

// Expected value of following `policy` from the prior state, with every
// measurement expectation evaluated by dense quadrature — independent of the
// planner's partitions.
double rollout_value(const TinyInstance& inst,
                     const std::function<int(const History&, int, int)>& policy,
                     const History& state, int cur, int t, int quad_nodes) {
  if (t == inst.horizon) return 0.0;
  const int action = policy(state, cur, t);
  const Location loc = inst.domain.location(action);
  const Posterior post = state.posterior(loc, inst.hyper);
  const double sigma = std::sqrt(post.variance);

  std::vector<Location> visited = state.locations();
  visited.push_back(loc);
  double q = inst.reward.r3(visited, post.variance);

  std::vector<double> cuts{post.mean - 8.0 * sigma, post.mean + 8.0 * sigma};
  for (double b : inst.reward.breakpoints) {
    if (b > cuts.front() && b < cuts.back()) cuts.insert(cuts.end() - 1, b);
  }
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const QuadratureRule rule = gauss_legendre(quad_nodes, cuts[seg], cuts[seg + 1]);
    for (int i = 0; i < quad_nodes; ++i) {
      const double z = rule.nodes[i];
      const double density = normal_pdf((z - post.mean) / sigma) / sigma;
      double inner = inst.reward.r1(z) + inst.reward.r2(z);
      if (t + 1 < inst.horizon) {
        inner += rollout_value(inst, policy, state.extended(loc, z, inst.hyper), action, t + 1,
                               quad_nodes);
      }
      q += rule.weights[i] * density * inner;
    }
  }
  return q;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// --------------------------------------------------------------- checks ----

VerifyCheck check_partition() {
  VerifyCheck check;
  check.name = "partition-exactness";
  const Partition part = build_partition(0.0, 1.0, 5, 3.0);
  const double expected[] = {-3.0, -2.0, 0.0, 2.0, 3.0};
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(part.samples[i] - expected[i]));
  double wsum = 0.0;
  for (double w : part.weights) wsum += w;
  worst = std::max(worst, std::abs(wsum - 1.0));
  const double lam0 = lambda_coefficient(5, 0.0);
  worst = std::max(worst, std::abs(lam0 - std::sqrt(2.0 / std::numbers::pi)));
  check.passed = worst <= 1e-12;
  check.detail = "reference partition and coefficient reproduced, worst error " + fmt(worst);
  if (!check.passed) {
    nlohmann::json j{{"samples", part.samples}, {"weights", part.weights}, {"coefficient", lam0}};
    check.failure_json = j.dump(2);
  }
  return check;
}

VerifyCheck check_feasibility(const VerifyOptions& opts) {
  VerifyCheck check;
  check.name = "budget-feasibility";
  Rng rng{opts.seed + 1};
  double worst_ratio = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double lam = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
    const double sigma = rng.uniform(0.02, 3.0);
    const double l = rng.uniform() < 0.05 ? 0.0 : rng.uniform(0.0, 5.0);
    BudgetChoice choice;
    try {
      if (opts.budget_mode == BudgetMode::Capped) {
        auto capped = feasible_n_capped(lam, sigma, l, opts.n_cap, opts.lambda_coefficient);
        if (!capped) continue;  // cap too small for this triple: nothing to check
        choice = *capped;
      } else {
        choice = feasible_tau_n(lam, sigma, l, opts.lambda_coefficient);
      }
    } catch (const Error& e) {
      check.detail = std::string("budget selection threw: ") + e.what();
      nlohmann::json j{{"lambda", lam}, {"sigma", sigma}, {"l1_plus_L", l}};
      check.failure_json = j.dump(2);
      return check;
    }
    if (l == 0.0 || choice.n == 1) continue;
    const double true_bound = lambda_coefficient(choice.n, choice.tau) * sigma * l;
    worst_ratio = std::max(worst_ratio, true_bound / lam);
    bool ok = true_bound <= lam * (1.0 + 1e-9);
    if (ok && opts.budget_mode != BudgetMode::Capped) {
      // selected n must be the ceiling of the closed form
      const double x = lam / (sigma * l);
      if (x < 2.0 * std::sqrt(2.0 / std::numbers::pi)) {
        const double tau =
            std::sqrt(-2.0 * std::log(std::sqrt(std::numbers::pi / 2.0) * x / 2.0));
        const int n_expected = static_cast<int>(
            std::ceil(2.0 + tau * std::sqrt(std::numbers::pi / 2.0) * std::exp(0.5 * tau * tau)));
        ok = choice.n == n_expected;
      }
    }
    if (!ok) {
      check.detail = "triple violated the tolerance or the closed form (bound/lambda " +
                     fmt(true_bound / lam) + ")";
      nlohmann::json j{{"lambda", lam}, {"sigma", sigma},     {"l1_plus_L", l},
                       {"tau", choice.tau}, {"n", choice.n}, {"true_bound", true_bound}};
      check.failure_json = j.dump(2);
      return check;
    }
  }
  check.passed = true;
  check.detail = "1000 random budget selections met the tolerance, worst bound/lambda " +
                 fmt(worst_ratio);
  return check;
}

VerifyCheck check_value_bound(const VerifyOptions& opts) {
  VerifyCheck check;
  check.name = "value-error-bound";
  Rng rng{opts.seed + 2};
  const double lambda = 0.06;
  double worst = 0.0;
  for (int i = 0; i < opts.bound_instances; ++i) {
    const TinyInstance inst = make_instance(rng, kAllKinds[i % 5], 1);
    const PlannerConfig pc = base_config(opts, inst.horizon, lambda);
    double v_eps = 0.0, v_star = 0.0;
    try {
      const LipschitzTable table = precompute_lipschitz(inst.prior, inst.start, inst.actions,
                                                        inst.horizon, inst.hyper, inst.reward,
                                                        inst.domain);
      const PlanInputs in{inst.domain, inst.actions, inst.hyper, inst.reward, table};
      v_eps = value_epsilon(inst.prior, inst.start, 0, pc, in);
      v_star = brute_force_value(inst.prior, inst.start, inst.horizon, inst.domain, inst.actions,
                                 inst.hyper, inst.reward, opts.oracle_nodes);
    } catch (const Error& e) {
      check.detail = std::string("instance threw: ") + e.what();
      check.failure_json = instance_json(inst).dump(2);
      return check;
    }
    const double err = std::abs(v_eps - v_star);
    const double bound = lambda * inst.horizon;
    worst = std::max(worst, err / bound);
    if (err > bound + 1e-9) {
      check.detail = "planner value drifted " + fmt(err) + " from the dense-quadrature value, " +
                     "allowed " + fmt(bound);
      nlohmann::json j = instance_json(inst);
      j["lambda"] = lambda;
      j["planner_value"] = v_eps;
      j["oracle_value"] = v_star;
      check.failure_json = j.dump(2);
      return check;
    }
  }
  check.passed = true;
  check.detail = std::to_string(opts.bound_instances) +
                 " instances within the per-stage tolerance, worst error/bound " + fmt(worst);
  return check;
}

VerifyCheck check_policy_loss(const VerifyOptions& opts) {
  VerifyCheck check;
  check.name = "policy-loss-bound";
  Rng rng{opts.seed + 3};
  const double epsilon = 0.36;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < opts.rollout_instances; ++i) {
    const TinyInstance inst = make_instance(rng, kAllKinds[i % 5], 1);
    const double lambda =
        epsilon / (static_cast<double>(inst.horizon) * (inst.horizon + 1.0));
    double v_pi = 0.0, v_star = 0.0;
    try {
      auto policy = [&](const History& state, int cur, int t) {
        const PlannerConfig pc = base_config(opts, inst.horizon - t, lambda);
        const LipschitzTable table = precompute_lipschitz(state, cur, inst.actions,
                                                          inst.horizon - t, inst.hyper,
                                                          inst.reward, inst.domain);
        const PlanInputs in{inst.domain, inst.actions, inst.hyper, inst.reward, table};
        return plan(state, cur, pc, in).action;
      };
      v_pi = rollout_value(inst, policy, inst.prior, inst.start, 0, opts.oracle_nodes);
      v_star = brute_force_value(inst.prior, inst.start, inst.horizon, inst.domain, inst.actions,
                                 inst.hyper, inst.reward, opts.oracle_nodes);
    } catch (const Error& e) {
      check.detail = std::string("instance threw: ") + e.what();
      check.failure_json = instance_json(inst).dump(2);
      return check;
    }
    const double loss = v_star - v_pi;
    worst = std::max(worst, loss);
    if (loss > epsilon + 1e-6 || loss < -1e-6) {
      check.detail = "policy rollout lost " + fmt(loss) + ", allowed " + fmt(epsilon);
      nlohmann::json j = instance_json(inst);
      j["epsilon"] = epsilon;
      j["policy_value"] = v_pi;
      j["oracle_value"] = v_star;
      check.failure_json = j.dump(2);
      return check;
    }
  }
  check.passed = true;
  check.detail = std::to_string(opts.rollout_instances) +
                 " rollouts within the end-to-end tolerance, worst loss " + fmt(worst);
  return check;
}

VerifyCheck check_lipschitz(const VerifyOptions& opts) {
  VerifyCheck check;
  check.name = "value-lipschitz-bound";
  Rng rng{opts.seed + 4};
  // Smooth reward kinds keep the dense oracle cheap; the bound itself is
  // reward-generic and the planner checks cover the kinked kinds.
  const RewardKind kinds[] = {RewardKind::Ucb, RewardKind::Gaussian, RewardKind::Mes};
  double worst = 0.0;
  const int quad = std::min(opts.oracle_nodes, 150);
  for (int i = 0; i < opts.lipschitz_instances; ++i) {
    const TinyInstance inst = make_instance(rng, kinds[i % 3], 2);
    try {
      const LipschitzTable table = precompute_lipschitz(inst.prior, inst.start, inst.actions,
                                                        inst.horizon, inst.hyper, inst.reward,
                                                        inst.domain);
      const double l0 = table.lipschitz(std::vector<int>{});
      const double v_base = brute_force_value(inst.prior, inst.start, inst.horizon, inst.domain,
                                              inst.actions, inst.hyper, inst.reward, quad);
      std::vector<Location> locs;
      for (int idx : inst.prior_locs) locs.push_back(inst.domain.location(idx));
      for (int p = 0; p < opts.perturbations; ++p) {
        std::vector<double> z = inst.prior_z;
        double norm2 = 0.0;
        for (double& v : z) {
          const double d = 0.6 * rng.normal();
          v += d;
          norm2 += d * d;
        }
        const History perturbed = History::from_observations(locs, z, inst.hyper);
        const double v = brute_force_value(perturbed, inst.start, inst.horizon, inst.domain,
                                           inst.actions, inst.hyper, inst.reward, quad);
        const double bound = l0 * std::sqrt(norm2) + 1e-7;
        worst = std::max(worst, std::abs(v - v_base) / (bound > 0 ? bound : 1.0));
        if (std::abs(v - v_base) > bound) {
          check.detail = "value moved " + fmt(std::abs(v - v_base)) + " under a perturbation of " +
                         "norm " + fmt(std::sqrt(norm2)) + ", allowed " + fmt(bound);
          nlohmann::json j = instance_json(inst);
          j["perturbed_measurements"] = z;
          j["lipschitz"] = l0;
          j["base_value"] = v_base;
          j["perturbed_value"] = v;
          check.failure_json = j.dump(2);
          return check;
        }
      }
    } catch (const Error& e) {
      check.detail = std::string("instance threw: ") + e.what();
      check.failure_json = instance_json(inst).dump(2);
      return check;
    }
  }
  check.passed = true;
  check.detail = std::to_string(opts.lipschitz_instances * opts.perturbations) +
                 " perturbations within the bound, worst move/bound " + fmt(worst);
  return check;
}

VerifyCheck check_anytime(const VerifyOptions& opts) {
  VerifyCheck check;
  check.name = "anytime-bounds";
  Rng rng{opts.seed + 5};
  const double lambda = 0.08;
  double worst_gap = 0.0;
  for (int i = 0; i < opts.anytime_instances; ++i) {
    const TinyInstance inst = make_instance(rng, kAllKinds[i % 5], 1);
    const PlannerConfig pc = base_config(opts, inst.horizon, lambda);
    try {
      const LipschitzTable table = precompute_lipschitz(inst.prior, inst.start, inst.actions,
                                                        inst.horizon, inst.hyper, inst.reward,
                                                        inst.domain);
      const PlanInputs in{inst.domain, inst.actions, inst.hyper, inst.reward, table};
      const double v_eps = value_epsilon(inst.prior, inst.start, 0, pc, in);
      const PlanResult exact = plan(inst.prior, inst.start, pc, in);

      AnytimeStop stop;
      stop.max_nodes = std::numeric_limits<long long>::max();
      std::vector<AnytimeTracePoint> trace;
      const AnytimeResult ar = anytime_plan(inst.prior, inst.start, pc, stop, in, &trace);

      std::string problem;
      double prev_upper = std::numeric_limits<double>::infinity();
      double prev_lower = -std::numeric_limits<double>::infinity();
      for (const AnytimeTracePoint& p : trace) {
        if (p.lower - 1e-9 > v_eps || v_eps > p.upper + 1e-9) {
          problem = "iteration " + std::to_string(p.iteration) + " bounds [" + fmt(p.lower) +
                    ", " + fmt(p.upper) + "] exclude the exhaustive value " + fmt(v_eps);
          break;
        }
        if (p.upper > prev_upper + 1e-12 || p.lower < prev_lower - 1e-12) {
          problem = "iteration " + std::to_string(p.iteration) + " loosened a bound";
          break;
        }
        prev_upper = p.upper;
        prev_lower = p.lower;
      }
      if (problem.empty() && !ar.fully_expanded) problem = "search stopped before saturating";
      if (problem.empty() && ar.action != exact.action) {
        problem = "converged action " + std::to_string(ar.action) +
                  " differs from the exhaustive planner's " + std::to_string(exact.action);
      }
      const double gap_cap = 2.0 * lambda * inst.horizon + 1e-9;
      if (problem.empty() && ar.gap() > gap_cap) {
        problem = "final gap " + fmt(ar.gap()) + " exceeds " + fmt(gap_cap);
      }
      double loss = 0.0;
      if (problem.empty()) {
        // Rollout of the anytime policy, replanning to saturation per stage;
        // its loss is covered by the final gap times the horizon.
        auto policy = [&](const History& state, int cur, int t) {
          const PlannerConfig rp = base_config(opts, inst.horizon - t, lambda);
          const LipschitzTable tbl = precompute_lipschitz(state, cur, inst.actions,
                                                          inst.horizon - t, inst.hyper,
                                                          inst.reward, inst.domain);
          const PlanInputs rin{inst.domain, inst.actions, inst.hyper, inst.reward, tbl};
          AnytimeStop s;
          s.max_nodes = std::numeric_limits<long long>::max();
          return anytime_plan(state, cur, rp, s, rin).action;
        };
        const double v_pi = rollout_value(inst, policy, inst.prior, inst.start, 0,
                                          std::min(opts.oracle_nodes, 300));
        const double v_star =
            brute_force_value(inst.prior, inst.start, inst.horizon, inst.domain, inst.actions,
                              inst.hyper, inst.reward, std::min(opts.oracle_nodes, 300));
        loss = v_star - v_pi;
        if (loss > ar.gap() * inst.horizon + 1e-6) {
          problem = "rollout loss " + fmt(loss) + " exceeds gap*horizon " +
                    fmt(ar.gap() * inst.horizon);
        }
      }
      if (!problem.empty()) {
        check.detail = problem;
        nlohmann::json j = instance_json(inst);
        j["lambda"] = lambda;
        j["exhaustive_value"] = v_eps;
        j["upper"] = ar.upper;
        j["lower"] = ar.lower;
        check.failure_json = j.dump(2);
        return check;
      }
      worst_gap = std::max(worst_gap, ar.gap());
    } catch (const Error& e) {
      check.detail = std::string("instance threw: ") + e.what();
      check.failure_json = instance_json(inst).dump(2);
      return check;
    }
  }
  check.passed = true;
  check.detail = std::to_string(opts.anytime_instances) +
                 " instances: bounds stayed valid and monotone to saturation, final gap <= " +
                 fmt(worst_gap);
  return check;
}

}  // namespace

VerifyReport run_verification(const VerifyOptions& opts) {
  VerifyReport report;
  report.checks.push_back(check_partition());
  report.checks.push_back(check_feasibility(opts));
  report.checks.push_back(check_value_bound(opts));
  report.checks.push_back(check_policy_loss(opts));
  report.checks.push_back(check_lipschitz(opts));
  report.checks.push_back(check_anytime(opts));
  return report;
}

int cmd_verify(const VerifyOptions& opts) {
  const VerifyReport report = run_verification(opts);
  for (const VerifyCheck& check : report.checks) {
    std::cout << (check.passed ? "PASS" : "FAIL") << " " << check.name << ": " << check.detail
              << "\n";
    if (!check.passed && !check.failure_json.empty()) {
      const std::filesystem::path dir = opts.failure_dir.empty() ? "." : opts.failure_dir;
      std::filesystem::create_directories(dir);
      const std::filesystem::path path = dir / ("verify_failure_" + check.name + ".json");
      std::ofstream out(path);
      out << check.failure_json << "\n";
      if (out) std::cout << "  offending instance written to " << path.string() << "\n";
    }
  }
  return report.all_passed() ? 0 : 1;
}

}  // namespace gpplan
