#pragma once

#include "gpplan/geometry.hpp"
#include "gpplan/gp.hpp"
#include "gpplan/planner.hpp"
#include "gpplan/reward.hpp"

namespace gpplan {

// Most-likely-observation lookahead: the measurement expectation at every
// planned step is replaced by substituting the posterior mean. Implemented
// without the partition machinery so it can serve as an independent
// cross-check of the single-sample planner; the action-value arithmetic is
// kept in the same shape so the two agree bit-for-bit.
PlanResult mean_substitution_plan(const History& d0, int current_location, int horizon,
                                  const Domain& domain, const ActionModel& actions,
                                  const GpHyperparams& hyper, const RewardSpec& reward);

}  // namespace gpplan
