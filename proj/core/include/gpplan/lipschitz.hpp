#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "gpplan/geometry.hpp"
#include "gpplan/gp.hpp"
#include "gpplan/reward.hpp"

namespace gpplan {

// Per-path bound on how fast the optimal value-to-go can change with the
// measurement history, together with the predictive widths of each successor.
// Everything here is measurement-free: it depends on locations only, so one
// table serves every measurement realization of the same prior locations.
struct LipschitzEntry {
  double value = 0.0;  // bound for the path's remaining stages
  // (successor location index, predictive sigma given the path), in
  // ascending index order; empty at full depth
  std::vector<std::pair<int, double>> successors;
};

class LipschitzTable {
 public:
  struct KeyHash {
    std::size_t operator()(const std::vector<int>& key) const;
  };

  // Bound for the exact planned-location path (root = empty). Unknown paths
  // throw ArgumentError.
  double lipschitz(std::span<const int> path) const;
  const LipschitzEntry& entry(std::span<const int> path) const;

  int horizon() const { return horizon_; }
  std::size_t size() const { return entries_.size(); }

 private:
  friend LipschitzTable precompute_lipschitz(const History&, int, const ActionModel&, int,
                                             const GpHyperparams&, const RewardSpec&,
                                             const Domain&);
  std::unordered_map<std::vector<int>, LipschitzEntry, KeyHash> entries_;
  int horizon_ = 0;
};

// Enumerates every action path of length <= horizon starting from the agent's
// current location and evaluates the bound recursion bottom-up:
//   value(path) = max over successors s of
//     alpha * (l1 + l2(sigma_s)) + value(path + s) * sqrt(1 + alpha^2)
// with value = 0 at full depth, alpha the mean-sensitivity norm of s given
// the path, and sigma_s the predictive width of s given the path.
// Guarded: max_branching^horizon must not exceed 1e7.
LipschitzTable precompute_lipschitz(const History& prior, int current_location,
                                    const ActionModel& actions, int horizon,
                                    const GpHyperparams& hyper, const RewardSpec& reward,
                                    const Domain& domain);

}  // namespace gpplan
