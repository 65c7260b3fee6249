#include "gpplan/episode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "gpplan/errors.hpp"
#include "gpplan/math.hpp"
#include "gpplan/mean_plan.hpp"

namespace gpplan {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::EpsilonGpp: return "epsilon_gpp";
    case PolicyKind::Anytime: return "anytime";
    case PolicyKind::MlObs: return "ml_obs";
    case PolicyKind::GreedyPi: return "greedy_pi";
    case PolicyKind::GreedyEi: return "greedy_ei";
    case PolicyKind::GreedyUcb: return "greedy_ucb";
  }
  throw ArgumentError("to_string: unknown policy");
}

PolicyKind policy_from_string(const std::string& name) {
  if (name == "epsilon_gpp") return PolicyKind::EpsilonGpp;
  if (name == "anytime") return PolicyKind::Anytime;
  if (name == "ml_obs") return PolicyKind::MlObs;
  if (name == "greedy_pi") return PolicyKind::GreedyPi;
  if (name == "greedy_ei") return PolicyKind::GreedyEi;
  if (name == "greedy_ucb") return PolicyKind::GreedyUcb;
  throw ArgumentError("unknown policy: " + name);
}

namespace {

// Re-throws the in-flight planner error with the step index prepended,
// preserving the concrete error type.
[[noreturn]] void rethrow_with_step(int step) {
  const std::string prefix = "step " + std::to_string(step) + ": ";
  try {
    throw;
  } catch (const ConditioningError& e) {
    throw ConditioningError(prefix + e.what());
  } catch (const BudgetError& e) {
    throw BudgetError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const ArgumentError& e) {
    throw ArgumentError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

void copy_budgets(StepRecord& rec, const PlanStats& stats) {
  if (stats.n_max > 0) {
    rec.n_min = stats.n_min;
    rec.n_max = stats.n_max;
    rec.tau_min = stats.tau_min;
    rec.tau_max = stats.tau_max;
  }
}

PlannerConfig planner_config(const EpisodeConfig& cfg, int horizon) {
  PlannerConfig pc;
  pc.horizon = horizon;
  pc.epsilon = cfg.epsilon;
  pc.lambda = cfg.lambda;
  pc.budget_mode = cfg.budget_mode;
  pc.n_cap = cfg.n_cap;
  pc.fixed_tau = cfg.fixed_tau;
  pc.fixed_n = cfg.fixed_n;
  return pc;
}

}  // namespace

int greedy_action(const History& hist, int current, const Domain& domain,
                  const ActionModel& actions, const GpHyperparams& hyper, PolicyKind kind,
                  double beta, double xi) {
  double z_best = hyper.prior_mean;
  if (!hist.measurements().empty()) {
    z_best = *std::max_element(hist.measurements().begin(), hist.measurements().end());
  }
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int succ : actions.at(current)) {
    const Posterior post = hist.posterior(domain.location(succ), hyper);
    const double sigma = std::sqrt(post.variance);
    const double diff = post.mean - z_best - xi;
    double score = 0.0;
    switch (kind) {
      case PolicyKind::GreedyUcb:
        score = post.mean + beta * sigma;
        break;
      case PolicyKind::GreedyPi:
        score = sigma > 0.0 ? normal_cdf(diff / sigma) : (diff > 0.0 ? 1.0 : 0.0);
        break;
      case PolicyKind::GreedyEi:
        score = sigma > 0.0 ? diff * normal_cdf(diff / sigma) + sigma * normal_pdf(diff / sigma)
                            : std::max(diff, 0.0);
        break;
      default:
        throw ArgumentError("greedy_action: not a greedy policy");
    }
    if (score > best_score) {
      best_score = score;
      best = succ;
    }
  }
  if (best < 0) throw ArgumentError("greedy_action: current location has no successors");
  return best;
}

EpisodeResult run_episode(const FieldGrid& field, const ActionModel& actions,
                          const GpHyperparams& hyper, const RewardSpec& reward,
                          const EpisodeConfig& cfg, int start, std::uint64_t noise_seed,
                          std::uint64_t seed_label) {
  if (cfg.steps < 1) throw ArgumentError("run_episode: steps must be >= 1");
  if (cfg.horizon < 1) throw ArgumentError("run_episode: horizon must be >= 1");
  if (start < 0 || start >= static_cast<int>(field.values.size()))
    throw ArgumentError("run_episode: start cell outside the field");
  hyper.validate();
  const Domain domain = field.domain();

  // One stream per episode, drawn up front: index 0 is the start observation,
  // index k+1 is step k. Policies therefore share identical noise.
  GaussianStream stream(noise_seed);
  std::vector<double> noise(static_cast<std::size_t>(cfg.steps) + 1);
  for (double& v : noise) v = stream.next();
  const double noise_sd = std::sqrt(hyper.noise_variance);

  History hist(cfg.full_refactor);
  if (cfg.prior_obs_at_start) {
    hist = hist.extended(domain.location(start), field.at(start) + noise_sd * noise[0], hyper);
  }

  EpisodeResult result;
  result.seed = seed_label;
  result.start = start;
  result.steps.reserve(cfg.steps);
  result.max_reward = -std::numeric_limits<double>::infinity();

  int cur = start;
  double cum = 0.0;
  for (int k = 0; k < cfg.steps; ++k) {
    const int horizon = std::min(cfg.horizon, cfg.steps - k);
    StepRecord rec;
    rec.step = k;

    const auto t0 = std::chrono::steady_clock::now();
    int action = -1;
    try {
      switch (cfg.policy) {
        case PolicyKind::EpsilonGpp: {
          const PlannerConfig pc = planner_config(cfg, horizon);
          LipschitzTable table;
          if (pc.budget_mode != BudgetMode::Fixed) {
            table = precompute_lipschitz(hist, cur, actions, horizon, hyper, reward, domain);
          }
          const PlanInputs in{domain, actions, hyper, reward, table};
          const PlanResult pr = plan(hist, cur, pc, in);
          action = pr.action;
          rec.tree_nodes = pr.stats.nodes;
          copy_budgets(rec, pr.stats);
          break;
        }
        case PolicyKind::Anytime: {
          const PlannerConfig pc = planner_config(cfg, horizon);
          const LipschitzTable table =
              precompute_lipschitz(hist, cur, actions, horizon, hyper, reward, domain);
          const PlanInputs in{domain, actions, hyper, reward, table};
          const AnytimeResult ar =
              anytime_plan(hist, cur, pc, cfg.stop, in, cfg.trace ? &rec.trace : nullptr);
          action = ar.action;
          rec.tree_nodes = ar.nodes;
          copy_budgets(rec, ar.stats);
          break;
        }
        case PolicyKind::MlObs: {
          const PlanResult pr =
              mean_substitution_plan(hist, cur, horizon, domain, actions, hyper, reward);
          action = pr.action;
          rec.tree_nodes = pr.stats.nodes;
          copy_budgets(rec, pr.stats);
          break;
        }
        default:
          action = greedy_action(hist, cur, domain, actions, hyper, cfg.policy, cfg.beta, cfg.xi);
          rec.tree_nodes = static_cast<long long>(actions.at(cur).size());
          break;
      }
    } catch (...) {
      rethrow_with_step(k);
    }
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    const Location loc = domain.location(action);
    const Posterior before = hist.posterior(loc, hyper);
    const double z = field.at(action) + noise_sd * noise[static_cast<std::size_t>(k) + 1];
    std::vector<Location> visited = hist.locations();
    visited.push_back(loc);
    const double realized = reward.r1(z) + reward.r2(z) + reward.r3(visited, before.variance);

    hist = hist.extended(loc, z, hyper);
    cur = action;
    cum += realized;
    result.max_reward = std::max(result.max_reward, realized);
    result.total_nodes += rec.tree_nodes;

    rec.location = action;
    rec.x = loc.x;
    rec.y = loc.y;
    rec.z = z;
    rec.reward = realized;
    rec.reward_normalized = realized - hyper.prior_mean;
    rec.cum_reward = cum;
    rec.max_reward = result.max_reward;
    result.steps.push_back(std::move(rec));
  }
  result.total_reward = cum;
  return result;
}

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

}  // namespace

std::vector<StepAggregate> aggregate(const std::vector<EpisodeResult>& results) {
  if (results.empty()) throw ArgumentError("aggregate: no episodes");
  const std::size_t steps = results.front().steps.size();
  for (const EpisodeResult& r : results) {
    if (r.steps.size() != steps) throw ArgumentError("aggregate: episodes have unequal lengths");
  }
  std::vector<StepAggregate> rows(steps);
  std::vector<double> cum_reward(results.size());
  std::vector<double> max_reward(results.size());
  std::vector<double> cum_nodes(results.size());
  std::vector<long long> node_totals(results.size(), 0);
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t i = 0; i < results.size(); ++i) {
      const StepRecord& rec = results[i].steps[k];
      node_totals[i] += rec.tree_nodes;
      cum_reward[i] = rec.cum_reward;
      max_reward[i] = rec.max_reward;
      cum_nodes[i] = static_cast<double>(node_totals[i]);
    }
    StepAggregate& row = rows[k];
    row.step = static_cast<int>(k);
    const MeanSe cr = mean_se(cum_reward);
    const MeanSe mr = mean_se(max_reward);
    const MeanSe cn = mean_se(cum_nodes);
    row.cum_reward_mean = cr.mean;
    row.cum_reward_se = cr.se;
    row.max_reward_mean = mr.mean;
    row.max_reward_se = mr.se;
    row.cum_nodes_mean = cn.mean;
    row.cum_nodes_se = cn.se;
  }
  return rows;
}

void write_results_csv(const std::string& path, const std::vector<EpisodeResult>& results) {
  std::ofstream out = open_out(path);
  out << "seed,step,x,y,z,reward,reward_normalized,cum_reward,max_reward,tree_nodes,wall_ms\n";
  for (const EpisodeResult& r : results) {
    for (const StepRecord& rec : r.steps) {
      out << r.seed << ',' << rec.step << ',' << format_double(rec.x) << ','
          << format_double(rec.y) << ',' << format_double(rec.z) << ','
          << format_double(rec.reward) << ',' << format_double(rec.reward_normalized) << ','
          << format_double(rec.cum_reward) << ',' << format_double(rec.max_reward) << ','
          << rec.tree_nodes << ',' << format_double(rec.wall_ms) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_summary_csv(const std::string& path, const std::vector<StepAggregate>& rows) {
  std::ofstream out = open_out(path);
  out << "step,cum_reward_mean,cum_reward_se,max_reward_mean,max_reward_se,"
         "cum_nodes_mean,cum_nodes_se\n";
  for (const StepAggregate& row : rows) {
    out << row.step << ',' << format_double(row.cum_reward_mean) << ','
        << format_double(row.cum_reward_se) << ',' << format_double(row.max_reward_mean) << ','
        << format_double(row.max_reward_se) << ',' << format_double(row.cum_nodes_mean) << ','
        << format_double(row.cum_nodes_se) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_trace_csv(const std::string& path, const std::vector<EpisodeResult>& results) {
  std::ofstream out = open_out(path);
  out << "seed,step,iteration,nodes,upper,lower,gap\n";
  for (const EpisodeResult& r : results) {
    for (const StepRecord& rec : r.steps) {
      for (const AnytimeTracePoint& p : rec.trace) {
        out << r.seed << ',' << rec.step << ',' << p.iteration << ',' << p.nodes << ','
            << format_double(p.upper) << ',' << format_double(p.lower) << ','
            << format_double(p.upper - p.lower) << '\n';
      }
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace gpplan
