#include "gpplan/lipschitz.hpp"

#include <cmath>
#include <sstream>

#include "gpplan/errors.hpp"

namespace gpplan {

std::size_t LipschitzTable::KeyHash::operator()(const std::vector<int>& key) const {
  std::size_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the index sequence
  for (int v : key) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(v));
    h *= 0x100000001b3ULL;
  }
  return h;
}

const LipschitzEntry& LipschitzTable::entry(std::span<const int> path) const {
  const std::vector<int> key(path.begin(), path.end());
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    std::ostringstream os;
    os << "LipschitzTable: unknown path [";
    for (std::size_t i = 0; i < key.size(); ++i) os << (i ? " " : "") << key[i];
    os << "]";
    throw ArgumentError(os.str());
  }
  return it->second;
}

double LipschitzTable::lipschitz(std::span<const int> path) const { return entry(path).value; }

namespace {

double table_dfs(const History& hist, std::vector<int>& path, int depth, int horizon, const ActionModel& actions, const GpHyperparams& hyper,
                 const RewardSpec& reward, const Domain& domain, int root_location,
                 std::unordered_map<std::vector<int>, LipschitzEntry, LipschitzTable::KeyHash>&
                     entries) {
  LipschitzEntry entry;
  if (depth == horizon) {
    entries.emplace(path, std::move(entry));
    return 0.0;
  }
  const int here = path.empty() ? root_location : path.back();
  double best = 0.0;
  for (int succ : actions.at(here)) {
    const Location loc = domain.location(succ);
    const double alpha = hist.alpha_norm(loc, hyper);
    const Posterior post = hist.posterior(loc, hyper);
    // predictive width never drops below the noise floor; guard anyway since
    // l2 may blow up as sigma -> 0
    const double sigma = std::sqrt(std::max(post.variance, hyper.noise_variance));
    entry.successors.emplace_back(succ, sigma);

    path.push_back(succ);
    // measurement value is irrelevant to the recursion; extend with 0
    const double below = table_dfs(hist.extended(loc, 0.0, hyper), path, depth + 1, horizon,
                                   actions, hyper, reward, domain, root_location, entries);
    path.pop_back();

    const double candidate =
        alpha * (reward.l1 + reward.l2_of_sigma(sigma)) + below * std::sqrt(1.0 + alpha * alpha);
    best = std::max(best, candidate);
  }
  entry.value = best;
  entries.emplace(path, std::move(entry));
  return best;
}

}  // namespace

LipschitzTable precompute_lipschitz(const History& prior, int current_location,
                                    const ActionModel& actions, int horizon,
                                    const GpHyperparams& hyper, const RewardSpec& reward,
                                    const Domain& domain) {
  if (horizon < 0) throw ArgumentError("precompute_lipschitz: negative horizon");
  if (current_location < 0 || current_location >= domain.size())
    throw ArgumentError("precompute_lipschitz: current location outside the domain");
  const double paths = std::pow(static_cast<double>(actions.max_branching()), horizon);
  if (paths > 1e7)
    throw BudgetError("precompute_lipschitz: enumeration too large (branching^horizon > 1e7)");

  LipschitzTable table;
  table.horizon_ = horizon;
  std::vector<int> path;
  table_dfs(prior, path, 0, horizon, actions, hyper, reward, domain, current_location,
            table.entries_);
  return table;
}

}  // namespace gpplan
