#pragma once

#include <vector>

#include "gpplan/planner.hpp"

namespace gpplan {

// Termination controls for the incremental planner. Any satisfied condition
// stops the search; tree saturation (no bound can improve further) always
// stops it.
struct AnytimeStop {
  long long max_nodes = 50000;   // stop once this many tree nodes exist
  long long max_iterations = 0;  // 0 = unlimited
  double gap_target = 0.0;       // stop when root upper - lower <= this, if > 0
};

struct AnytimeTracePoint {
  long long iteration = 0;
  long long nodes = 0;
  double upper = 0.0;
  double lower = 0.0;
};

struct AnytimeActionBounds {
  int action = -1;
  double lower = 0.0;
  double upper = 0.0;
};

struct AnytimeResult {
  int action = -1;     // argmax of the root lower bounds
  double upper = 0.0;  // root value bounds at termination
  double lower = 0.0;
  long long nodes = 0;       // root plus every sample child created
  long long iterations = 0;
  bool fully_expanded = false;  // tree saturated: bounds are final
  std::vector<AnytimeActionBounds> per_action;  // ascending location index
  PlanStats stats;  // budget ranges; stats.nodes mirrors `nodes`

  double gap() const { return upper - lower; }
};

// Incremental branch-and-bound variant of the sparse-sampling planner. Each
// iteration descends along the most promising action (largest upper bound),
// expands the sample child with the largest weighted bound width, and tightens
// bounds on the way back up, transferring them between sibling samples through
// the value function's Lipschitz constant. Bounds only ever tighten, the root
// interval always contains the exhaustive recursion's value, and at saturation
// the chosen action matches the exhaustive planner's. Requires a Lipschitz
// table covering the horizon regardless of budget mode. Pass `trace` to record
// the root bounds after every iteration.
AnytimeResult anytime_plan(const History& d0, int current_location, const PlannerConfig& cfg,
                           const AnytimeStop& stop, const PlanInputs& in,
                           std::vector<AnytimeTracePoint>* trace = nullptr);

}  // namespace gpplan
