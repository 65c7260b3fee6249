#include "gpplan/mean_plan.hpp"

#include <cmath>
#include <limits>

#include "gpplan/errors.hpp"

namespace gpplan {

namespace {

struct MlCtx {
  const Domain& domain;
  const ActionModel& actions;
  const GpHyperparams& hyper;
  const RewardSpec& reward;
  int horizon;
  PlanStats* stats;
};

double ml_stage(const MlCtx& ctx, const History& state, int current, int t);

double ml_action_value(const MlCtx& ctx, const History& state, int succ, int t) {
  const Location loc = ctx.domain.location(succ);
  const Posterior post = state.posterior(loc, ctx.hyper);
  const double sigma = std::sqrt(post.variance);

  if (ctx.stats) {
    ++ctx.stats->nodes;
    ctx.stats->record_budget(1, 0.0);
  }

  std::vector<Location> visited = state.locations();
  visited.push_back(loc);
  const double immediate = ctx.reward.g_sigma(post.mean, sigma) +
                           ctx.reward.r3(visited, post.variance);

  const double w = 1.0;
  const double z = post.mean;
  double acc = 0.0;
  if (t + 1 == ctx.horizon) {
    acc += w * ctx.reward.r1(z);
  } else {
    const double below = ml_stage(ctx, state.extended(loc, z, ctx.hyper), succ, t + 1);
    acc += w * (ctx.reward.r1(z) + below);
  }
  return immediate + acc;
}

double ml_stage(const MlCtx& ctx, const History& state, int current, int t) {
  double best = -std::numeric_limits<double>::infinity();
  for (int succ : ctx.actions.at(current)) {
    const double q = ml_action_value(ctx, state, succ, t);
    if (q > best) best = q;
  }
  return best;
}

}  // namespace

PlanResult mean_substitution_plan(const History& d0, int current_location, int horizon,
                                  const Domain& domain, const ActionModel& actions,
                                  const GpHyperparams& hyper, const RewardSpec& reward) {
  if (horizon < 1) throw ArgumentError("mean_substitution_plan: horizon must be >= 1");
  hyper.validate();
  PlanResult result;
  MlCtx ctx{domain, actions, hyper, reward, horizon, &result.stats};

  double best = -std::numeric_limits<double>::infinity();
  for (int succ : actions.at(current_location)) {
    const double q = ml_action_value(ctx, d0, succ, 0);
    result.per_action_q.emplace_back(succ, q);
    if (q > best) {
      best = q;
      result.action = succ;
    }
  }
  if (result.action < 0)
    throw ArgumentError("mean_substitution_plan: current location has no successors");
  result.value = best;
  return result;
}

}  // namespace gpplan
