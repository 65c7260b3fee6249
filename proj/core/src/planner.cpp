#include "gpplan/planner.hpp"

#include <algorithm>
#include <cmath>

#include "gpplan/errors.hpp"
#include "gpplan/math.hpp"

namespace gpplan {

double PlannerConfig::resolved_lambda() const {
  if (lambda > 0.0) return lambda;
  const double h = static_cast<double>(horizon);
  return epsilon / (h * (h + 1.0));
}

void PlannerConfig::validate() const {
  if (horizon < 1) throw ArgumentError("PlannerConfig: horizon must be >= 1");
  if (lambda < 0.0 || epsilon < 0.0) throw ArgumentError("PlannerConfig: negative tolerance");
  switch (budget_mode) {
    case BudgetMode::Analytic:
    case BudgetMode::Capped:
      if (!(resolved_lambda() > 0.0))
        throw ArgumentError("PlannerConfig: a positive epsilon or lambda is required");
      if (budget_mode == BudgetMode::Capped && n_cap < 2)
        throw ArgumentError("PlannerConfig: n_cap must be >= 2");
      break;
    case BudgetMode::Fixed:
      if (fixed_tau == 0.0) {
        if (fixed_n < 1) throw ArgumentError("PlannerConfig: fixed_n must be >= 1");
      } else if (fixed_n <= 2) {
        throw ArgumentError("PlannerConfig: fixed_n must be > 2 when fixed_tau > 0");
      }
      break;
  }
}

void PlanStats::record_budget(int n, double tau) {
  n_min = std::min(n_min, n);
  n_max = std::max(n_max, n);
  tau_min = std::min(tau_min, tau);
  tau_max = std::max(tau_max, tau);
}

void PlanStats::merge(const PlanStats& other) {
  nodes += other.nodes;
  n_min = std::min(n_min, other.n_min);
  n_max = std::max(n_max, other.n_max);
  tau_min = std::min(tau_min, other.tau_min);
  tau_max = std::max(tau_max, other.tau_max);
}

namespace {

struct Ctx {
  const PlannerConfig& cfg;
  const PlanInputs& in;
  double lam;
  PlanStats* stats;
};

double stage_value(const Ctx& ctx, const History& state, std::vector<int>& path, int current,
                   int t);

// Action value of moving to `succ` from a node at stage t with history
// `state`. Shared by the recursion and the root report.
double action_value(const Ctx& ctx, const History& state, std::vector<int>& path, int succ,
                    int t) {
  const Location loc = ctx.in.domain.location(succ);
  const Posterior post = state.posterior(loc, ctx.in.hyper);
  const double sigma = std::sqrt(post.variance);

  if (ctx.stats) ++ctx.stats->nodes;

  path.push_back(succ);
  const BudgetChoice budget =
      resolve_node_budget(ctx.cfg, ctx.lam, sigma, ctx.in.reward, ctx.in.table, path);
  if (ctx.stats) ctx.stats->record_budget(budget.n, budget.tau);
  const Partition part = build_partition(post.mean, sigma, budget.n, budget.tau);

  std::vector<Location> visited = state.locations();
  visited.push_back(loc);
  const double immediate = ctx.in.reward.g_sigma(post.mean, sigma) +
                           ctx.in.reward.r3(visited, post.variance);

  double acc = 0.0;
  if (t + 1 == ctx.cfg.horizon) {
    for (int i = 0; i < part.size(); ++i) {
      acc += part.weights[i] * ctx.in.reward.r1(part.samples[i]);
    }
  } else {
    for (int i = 0; i < part.size(); ++i) {
      const double z = part.samples[i];
      const double below =
          stage_value(ctx, state.extended(loc, z, ctx.in.hyper), path, succ, t + 1);
      acc += part.weights[i] * (ctx.in.reward.r1(z) + below);
    }
  }
  path.pop_back();
  return immediate + acc;
}

double stage_value(const Ctx& ctx, const History& state, std::vector<int>& path, int current,
                   int t) {
  if (t == ctx.cfg.horizon) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int succ : ctx.in.actions.at(current)) {
    const double q = action_value(ctx, state, path, succ, t);
    if (q > best) best = q;
  }
  return best;
}

}  // namespace

BudgetChoice resolve_node_budget(const PlannerConfig& cfg, double lambda, double sigma,
                                 const RewardSpec& reward, const LipschitzTable& table,
                                 const std::vector<int>& path) {
  switch (cfg.budget_mode) {
    case BudgetMode::Analytic: {
      const double l1_plus_l = reward.l1 + table.lipschitz(path);
      return feasible_tau_n(lambda, sigma, l1_plus_l, cfg.lambda_coefficient_fn);
    }
    case BudgetMode::Capped: {
      const double l1_plus_l = reward.l1 + table.lipschitz(path);
      auto choice = feasible_n_capped(lambda, sigma, l1_plus_l, cfg.n_cap, cfg.lambda_coefficient_fn);
      if (!choice)
        throw BudgetError("plan: no sample count below the cap meets the per-stage tolerance");
      return *choice;
    }
    case BudgetMode::Fixed:
      return BudgetChoice{cfg.fixed_tau, cfg.fixed_n, 0.0};
  }
  throw ArgumentError("plan: unknown budget mode");
}

double value_epsilon(const History& state, int current_location, int t, const PlannerConfig& cfg,
                     const PlanInputs& in, PlanStats* stats) {
  cfg.validate();
  if (t < 0 || t > cfg.horizon) throw ArgumentError("value_epsilon: stage out of range");
  Ctx ctx{cfg, in, cfg.resolved_lambda(), stats};
  // the last t planned steps form the table path at this node
  const int planned = t;
  if (state.size() < planned)
    throw ArgumentError("value_epsilon: history shorter than the planned stage count");
  std::vector<int> path;
  path.reserve(cfg.horizon);
  for (int i = state.size() - planned; i < state.size(); ++i) {
    path.push_back(state.locations()[i].index);
  }
  return stage_value(ctx, state, path, current_location, t);
}

PlanResult plan(const History& d0, int current_location, const PlannerConfig& cfg,
                const PlanInputs& in) {
  cfg.validate();
  in.hyper.validate();
  PlanResult result;
  Ctx ctx{cfg, in, cfg.resolved_lambda(), &result.stats};
  std::vector<int> path;
  path.reserve(cfg.horizon);

  double best = -std::numeric_limits<double>::infinity();
  for (int succ : in.actions.at(current_location)) {
    const double q = action_value(ctx, d0, path, succ, 0);
    result.per_action_q.emplace_back(succ, q);
    if (q > best) {
      best = q;
      result.action = succ;
    }
  }
  if (result.action < 0) throw ArgumentError("plan: current location has no successors");
  result.value = best;
  return result;
}

namespace {

struct OracleCtx {
  const Domain& domain;
  const ActionModel& actions;
  const GpHyperparams& hyper;
  const RewardSpec& reward;
  int horizon;
  int quad_nodes;
};

double oracle_stage(const OracleCtx& ctx, const History& state, int current, int t) {
  double best = -std::numeric_limits<double>::infinity();
  for (int succ : ctx.actions.at(current)) {
    const Location loc = ctx.domain.location(succ);
    const Posterior post = state.posterior(loc, ctx.hyper);
    const double sigma = std::sqrt(post.variance);

    std::vector<Location> visited = state.locations();
    visited.push_back(loc);
    double q = ctx.reward.r3(visited, post.variance);

    // integrate pdf(z) * [r1(z) + r2(z) + value-to-go(z)] over mean +/- 8 sigma,
    // splitting at reward breakpoints so every segment is smooth
    std::vector<double> cuts{post.mean - 8.0 * sigma, post.mean + 8.0 * sigma};
    for (double b : ctx.reward.breakpoints) {
      if (b > cuts.front() && b < cuts.back()) cuts.insert(cuts.end() - 1, b);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
      const QuadratureRule rule = gauss_legendre(ctx.quad_nodes, cuts[seg], cuts[seg + 1]);
      for (int i = 0; i < ctx.quad_nodes; ++i) {
        const double z = rule.nodes[i];
        const double density = normal_pdf((z - post.mean) / sigma) / sigma;
        double inner = ctx.reward.r1(z) + ctx.reward.r2(z);
        if (t + 1 < ctx.horizon) {
          inner += oracle_stage(ctx, state.extended(loc, z, ctx.hyper), succ, t + 1);
        }
        q += rule.weights[i] * density * inner;
      }
    }
    best = std::max(best, q);
  }
  return best;
}

}  // namespace

double brute_force_value(const History& state, int current_location, int horizon,
                         const Domain& domain, const ActionModel& actions,
                         const GpHyperparams& hyper, const RewardSpec& reward, int quad_nodes) {
  if (horizon < 1) throw ArgumentError("brute_force_value: horizon must be >= 1");
  if (quad_nodes < 2) throw ArgumentError("brute_force_value: quad_nodes must be >= 2");
  const double work = std::pow(static_cast<double>(actions.max_branching()), horizon) *
                      std::pow(static_cast<double>(quad_nodes), horizon);
  if (work > 1e8) throw BudgetError("brute_force_value: instance too large for dense quadrature");
  OracleCtx ctx{domain, actions, hyper, reward, horizon, quad_nodes};
  return oracle_stage(ctx, state, current_location, 0);
}

}  // namespace gpplan
