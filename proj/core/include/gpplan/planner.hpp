#pragma once

#include <limits>
#include <vector>

#include "gpplan/geometry.hpp"
#include "gpplan/gp.hpp"
#include "gpplan/lipschitz.hpp"
#include "gpplan/reward.hpp"
#include "gpplan/sampling.hpp"

namespace gpplan {

enum class BudgetMode {
  Analytic,  // closed-form (tau, n) per node
  Capped,    // smallest feasible n below a cap, searched numerically
  Fixed,     // caller-supplied (tau, n) everywhere
};

struct PlannerConfig {
  int horizon = 1;
  double epsilon = 0.0;  // end-to-end suboptimality target
  double lambda = 0.0;   // per-stage tolerance; when > 0 it overrides epsilon
  BudgetMode budget_mode = BudgetMode::Analytic;
  int n_cap = 0;         // Capped: exclusive upper bound on n
  double fixed_tau = 0.0;
  int fixed_n = 1;
  // Optional replacement for the quadrature error coefficient used during
  // budget selection; tests inject faulty coefficients through this.
  LambdaCoefficientFn lambda_coefficient_fn;

  // lambda when set, else epsilon / (H (H + 1)).
  double resolved_lambda() const;
  void validate() const;
};

// Shared read-only references for one planning problem.
struct PlanInputs {
  const Domain& domain;
  const ActionModel& actions;
  const GpHyperparams& hyper;
  const RewardSpec& reward;
  const LipschitzTable& table;
};

struct PlanStats {
  long long nodes = 0;  // action-value evaluations
  int n_min = std::numeric_limits<int>::max();
  int n_max = 0;
  double tau_min = std::numeric_limits<double>::infinity();
  double tau_max = 0.0;

  void record_budget(int n, double tau);
  void merge(const PlanStats& other);
};

struct PlanResult {
  int action = -1;      // successor location index with the best action value
  double value = 0.0;   // value of the best action
  std::vector<std::pair<int, double>> per_action_q;  // ascending location index
  PlanStats stats;
};

// Sampling budget for one expectation node with predictive deviation `sigma`
// whose table entry lives at `path`. The table is only consulted when the
// budget depends on it, so fixed budgets work with an empty table.
BudgetChoice resolve_node_budget(const PlannerConfig& cfg, double lambda, double sigma,
                                 const RewardSpec& reward, const LipschitzTable& table,
                                 const std::vector<int>& path);

// Value-to-go of the sparse-sampling recursion at stage `t` (0-based, t <= H):
// each stage replaces the measurement expectation with the deterministic
// partition whose per-node budget meets the per-stage tolerance. `state` is
// the full measurement history at this node (prior plus planned extensions);
// `current_location` anchors the action set. Depth-first, no memoization.
double value_epsilon(const History& state, int current_location, int t, const PlannerConfig& cfg,
                     const PlanInputs& in, PlanStats* stats = nullptr);

// Runs the recursion at the root and returns the argmax action; ties resolve
// to the lowest location index.
PlanResult plan(const History& d0, int current_location, const PlannerConfig& cfg,
                const PlanInputs& in);

// Verification oracle: the exact finite-horizon optimal value with every
// measurement expectation evaluated by dense Gauss–Legendre quadrature over
// mean +/- 8 sigma (split at reward breakpoints, quad_nodes nodes per smooth
// segment). Independent of the partition machinery. Exponential in the
// horizon; guarded by branching^H * quad_nodes^H <= 1e8.
double brute_force_value(const History& state, int current_location, int horizon,
                         const Domain& domain, const ActionModel& actions,
                         const GpHyperparams& hyper, const RewardSpec& reward,
                         int quad_nodes = 2000);

}  // namespace gpplan
