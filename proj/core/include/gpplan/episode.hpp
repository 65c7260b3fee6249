#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpplan/anytime.hpp"
#include "gpplan/field.hpp"
#include "gpplan/geometry.hpp"
#include "gpplan/gp.hpp"
#include "gpplan/planner.hpp"
#include "gpplan/reward.hpp"

namespace gpplan {

enum class PolicyKind {
  EpsilonGpp,  // receding-horizon sparse-sampling planner
  Anytime,     // branch-and-bound variant
  MlObs,       // mean-substitution lookahead
  GreedyPi,    // probability of improvement
  GreedyEi,    // expected improvement
  GreedyUcb,   // posterior mean + beta * deviation
};

std::string to_string(PolicyKind kind);
PolicyKind policy_from_string(const std::string& name);

struct EpisodeConfig {
  PolicyKind policy = PolicyKind::EpsilonGpp;
  int steps = 20;
  int horizon = 1;  // lookahead per replan; clipped to the steps remaining
  double epsilon = 0.0;
  double lambda = 0.0;  // when > 0 overrides the per-replan derivation from epsilon
  BudgetMode budget_mode = BudgetMode::Analytic;
  int n_cap = 0;
  double fixed_tau = 0.0;
  int fixed_n = 1;
  AnytimeStop stop;               // anytime policy only
  double beta = 1.0;              // greedy ucb exploration weight
  double xi = 0.0;                // greedy pi/ei improvement margin
  bool prior_obs_at_start = true; // take one noisy observation at the start cell
  bool full_refactor = false;     // refactor the GP from scratch on every extension
  bool trace = false;             // record per-iteration anytime traces
};

struct StepRecord {
  int step = 0;
  int location = -1;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  // noisy measurement taken at the location
  double reward = 0.0;
  double reward_normalized = 0.0;  // reward minus the prior mean
  double cum_reward = 0.0;
  double max_reward = 0.0;
  long long tree_nodes = 0;
  double wall_ms = 0.0;
  // Planner budget ranges over this step's tree (0/unset for greedy policies).
  int n_min = 0;
  int n_max = 0;
  double tau_min = 0.0;
  double tau_max = 0.0;
  std::vector<AnytimeTracePoint> trace;  // filled when cfg.trace and policy == Anytime
};

struct EpisodeResult {
  std::uint64_t seed = 0;  // label recorded in the CSV rows
  int start = -1;
  std::vector<StepRecord> steps;
  double total_reward = 0.0;
  double max_reward = 0.0;
  long long total_nodes = 0;
};

// Runs one sensing episode: replan with horizon min(cfg.horizon, steps
// remaining), move to the chosen cell, observe the field there with seeded
// Gaussian noise, extend the history, and record the realized reward
// r1(z) + r2(z) + r3(path, predictive variance before observing). The noise
// stream is pre-generated from `noise_seed` (one draw for the optional start
// observation, then one per step), so every policy sees identical noise.
EpisodeResult run_episode(const FieldGrid& field, const ActionModel& actions,
                          const GpHyperparams& hyper, const RewardSpec& reward,
                          const EpisodeConfig& cfg, int start, std::uint64_t noise_seed,
                          std::uint64_t seed_label);

// Acquisition-maximizing successor for the greedy baselines; z_best is the
// best measurement so far, falling back to the prior mean before any
// observation exists. Ties break to the lowest location index.
int greedy_action(const History& hist, int current, const Domain& domain,
                  const ActionModel& actions, const GpHyperparams& hyper, PolicyKind kind,
                  double beta, double xi);

struct StepAggregate {
  int step = 0;
  double cum_reward_mean = 0.0;
  double cum_reward_se = 0.0;
  double max_reward_mean = 0.0;
  double max_reward_se = 0.0;
  double cum_nodes_mean = 0.0;
  double cum_nodes_se = 0.0;
};

// Per-step mean and standard error (sample std / sqrt(n), zero for n = 1)
// across episodes, which must all have the same step count.
std::vector<StepAggregate> aggregate(const std::vector<EpisodeResult>& results);

// One row per (seed, step): seed, step, x, y, z, reward, reward_normalized,
// cum_reward, max_reward, tree_nodes, wall_ms. Doubles use shortest
// round-trip formatting.
void write_results_csv(const std::string& path, const std::vector<EpisodeResult>& results);
void write_summary_csv(const std::string& path, const std::vector<StepAggregate>& rows);
// One row per recorded iteration: seed, step, iteration, nodes, upper, lower, gap.
void write_trace_csv(const std::string& path, const std::vector<EpisodeResult>& results);

}  // namespace gpplan
