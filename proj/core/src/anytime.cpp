#include "gpplan/anytime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "gpplan/errors.hpp"

namespace gpplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct TreeNode;

// One measurement outcome under an action: the z-sample, its weight, and the
// running bounds on the value-to-go after observing z. Bounds only tighten.
struct SampleChild {
  double z = 0.0;
  double w = 0.0;
  double upper = kInf;
  double lower = -kInf;
  bool saturated = false;
  std::unique_ptr<TreeNode> node;  // null until expanded; always null at the horizon
};

struct ActionChild {
  int action = -1;
  double immediate = 0.0;   // measurement-free part of the action value
  double lipschitz = 0.0;   // value sensitivity to the measurement here
  double q_upper = kInf;
  double q_lower = -kInf;
  bool saturated = false;
  std::vector<SampleChild> kids;
};

struct TreeNode {
  int location = -1;
  int depth = 0;  // 0 = root
  bool expanded = false;
  std::vector<ActionChild> actions;
};

struct Search {
  const PlannerConfig& cfg;
  const PlanInputs& in;
  double lam = 0.0;
  long long nodes = 0;
  PlanStats stats;

  void expand(TreeNode& node, const History& state, std::vector<int>& path);
  void descend(TreeNode& node, const History& state, std::vector<int>& path);
  void refresh_action(ActionChild& a);
  static void refine_siblings(ActionChild& a, int from);
  static bool child_saturated(const SampleChild& kid);
  static std::pair<double, double> value_bounds(const TreeNode& node);
  static int pick_action(const TreeNode& node);
  static int pick_kid(const ActionChild& a);
};

// Max over actions of (q_upper, q_lower); valid once the node is expanded.
std::pair<double, double> Search::value_bounds(const TreeNode& node) {
  double up = -kInf;
  double lo = -kInf;
  for (const ActionChild& a : node.actions) {
    up = std::max(up, a.q_upper);
    lo = std::max(lo, a.q_lower);
  }
  return {up, lo};
}

bool Search::child_saturated(const SampleChild& kid) {
  if (!kid.node || !kid.node->expanded) return false;
  for (const ActionChild& a : kid.node->actions) {
    if (!a.saturated) return false;
  }
  return true;
}

// Transfer the pivot's bounds to its siblings through the Lipschitz constant.
void Search::refine_siblings(ActionChild& a, int from) {
  const SampleChild& src = a.kids[from];
  for (int i = 0; i < static_cast<int>(a.kids.size()); ++i) {
    if (i == from) continue;
    SampleChild& kid = a.kids[i];
    const double slack = a.lipschitz * std::abs(kid.z - src.z);
    kid.upper = std::min(kid.upper, src.upper + slack);
    kid.lower = std::max(kid.lower, src.lower - slack);
  }
}

// Recompute the action's bounds from its children and merge them in, then
// refresh its saturation flag.
void Search::refresh_action(ActionChild& a) {
  double up = 0.0;
  double lo = 0.0;
  bool sat = true;
  for (const SampleChild& kid : a.kids) {
    const double r1 = in.reward.r1(kid.z);
    up += kid.w * (r1 + kid.upper);
    lo += kid.w * (r1 + kid.lower);
    sat = sat && kid.saturated;
  }
  a.q_upper = std::min(a.q_upper, a.immediate + up + lam);
  a.q_lower = std::max(a.q_lower, a.immediate + lo - lam);
  a.saturated = sat;
}

// Create every action child of `node` with its partition, recursively expand
// the middle sample of each partition, and seed the sibling bounds from it.
void Search::expand(TreeNode& node, const History& state, std::vector<int>& path) {
  node.expanded = true;
  const std::vector<int>& succs = in.actions.at(node.location);
  node.actions.reserve(succs.size());
  for (int succ : succs) {
    ActionChild a;
    a.action = succ;
    const Location loc = in.domain.location(succ);
    const Posterior post = state.posterior(loc, in.hyper);
    const double sigma = std::sqrt(post.variance);

    path.push_back(succ);
    a.lipschitz = in.table.lipschitz(path);
    const BudgetChoice budget = resolve_node_budget(cfg, lam, sigma, in.reward, in.table, path);
    stats.record_budget(budget.n, budget.tau);
    const Partition part = build_partition(post.mean, sigma, budget.n, budget.tau);

    std::vector<Location> visited = state.locations();
    visited.push_back(loc);
    a.immediate = in.reward.g_sigma(post.mean, sigma) + in.reward.r3(visited, post.variance);

    const bool leaf_kids = node.depth + 1 == cfg.horizon;
    a.kids.resize(part.size());
    for (int i = 0; i < part.size(); ++i) {
      SampleChild& kid = a.kids[i];
      kid.z = part.samples[i];
      kid.w = part.weights[i];
      if (leaf_kids) {
        kid.upper = 0.0;
        kid.lower = 0.0;
        kid.saturated = true;
      }
    }
    nodes += part.size();

    if (!leaf_kids) {
      const int pivot = part.size() / 2;
      SampleChild& kid = a.kids[pivot];
      kid.node = std::make_unique<TreeNode>();
      kid.node->location = succ;
      kid.node->depth = node.depth + 1;
      expand(*kid.node, state.extended(loc, kid.z, in.hyper), path);
      const auto [up, lo] = value_bounds(*kid.node);
      kid.upper = std::min(kid.upper, up);
      kid.lower = std::max(kid.lower, lo);
      kid.saturated = child_saturated(kid);
      refine_siblings(a, pivot);
    }
    refresh_action(a);
    path.pop_back();
    node.actions.push_back(std::move(a));
  }
}

// Best non-saturated action by upper bound, ties to the lowest location
// index; -1 when every action is saturated.
int Search::pick_action(const TreeNode& node) {
  int best = -1;
  double best_q = -kInf;
  for (int i = 0; i < static_cast<int>(node.actions.size()); ++i) {
    const ActionChild& a = node.actions[i];
    if (a.saturated) continue;
    if (best < 0 || a.q_upper > best_q) {
      best = i;
      best_q = a.q_upper;
    }
  }
  return best;
}

// Non-saturated sample child with the widest weighted bound interval, ties to
// the lowest sample index.
int Search::pick_kid(const ActionChild& a) {
  int best = -1;
  double best_width = -kInf;
  for (int i = 0; i < static_cast<int>(a.kids.size()); ++i) {
    const SampleChild& kid = a.kids[i];
    if (kid.saturated) continue;
    const double width = kid.w * (kid.upper - kid.lower);
    if (best < 0 || width > best_width) {
      best = i;
      best_width = width;
    }
  }
  return best;
}

// One refinement pass: walk down the most promising branch, expand the chosen
// frontier child, and tighten everything on the way back up.
void Search::descend(TreeNode& node, const History& state, std::vector<int>& path) {
  const int ai = pick_action(node);
  if (ai < 0) throw NumericError("anytime_plan: descended into a saturated subtree");
  ActionChild& a = node.actions[ai];
  const int ki = pick_kid(a);
  if (ki < 0) throw NumericError("anytime_plan: action child lost its frontier");
  SampleChild& kid = a.kids[ki];

  const Location loc = in.domain.location(a.action);
  path.push_back(a.action);
  if (!kid.node) {
    kid.node = std::make_unique<TreeNode>();
    kid.node->location = a.action;
    kid.node->depth = node.depth + 1;
    expand(*kid.node, state.extended(loc, kid.z, in.hyper), path);
  } else {
    descend(*kid.node, state.extended(loc, kid.z, in.hyper), path);
  }
  path.pop_back();

  const auto [up, lo] = value_bounds(*kid.node);
  kid.upper = std::min(kid.upper, up);
  kid.lower = std::max(kid.lower, lo);
  kid.saturated = child_saturated(kid);
  refine_siblings(a, ki);
  refresh_action(a);
}

}  // namespace

AnytimeResult anytime_plan(const History& d0, int current_location, const PlannerConfig& cfg,
                           const AnytimeStop& stop, const PlanInputs& in,
                           std::vector<AnytimeTracePoint>* trace) {
  cfg.validate();
  in.hyper.validate();
  if (stop.max_nodes < 1) throw ArgumentError("anytime_plan: max_nodes must be >= 1");

  Search search{cfg, in, cfg.resolved_lambda()};
  TreeNode root;
  root.location = current_location;
  search.nodes = 1;

  AnytimeResult result;
  result.upper = kInf;
  result.lower = -kInf;

  std::vector<int> path;
  path.reserve(cfg.horizon + 1);
  while (true) {
    ++result.iterations;
    if (!root.expanded) {
      search.expand(root, d0, path);
    } else {
      search.descend(root, d0, path);
    }
    // Raw maxima over the root actions: monotone across iterations because
    // every underlying update only ever tightens.
    const auto [up, lo] = Search::value_bounds(root);
    result.upper = up;
    result.lower = lo;
    if (trace) {
      trace->push_back({result.iterations, search.nodes, result.upper, result.lower});
    }

    bool saturated = true;
    for (const ActionChild& a : root.actions) saturated = saturated && a.saturated;
    result.fully_expanded = saturated;
    if (saturated) break;
    if (stop.gap_target > 0.0 && result.gap() <= stop.gap_target) break;
    if (search.nodes >= stop.max_nodes) break;
    if (stop.max_iterations > 0 && result.iterations >= stop.max_iterations) break;
  }

  double best = -kInf;
  for (const ActionChild& a : root.actions) {
    result.per_action.push_back({a.action, a.q_lower, a.q_upper});
    if (a.q_lower > best) {
      best = a.q_lower;
      result.action = a.action;
    }
  }
  result.nodes = search.nodes;
  result.stats = search.stats;
  result.stats.nodes = search.nodes;
  return result;
}

}  // namespace gpplan
