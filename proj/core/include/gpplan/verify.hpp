#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpplan/planner.hpp"

namespace gpplan {

// Controls for the self-check suite. The defaults complete in well under a
// minute. `lambda_coefficient` replaces the quadrature error coefficient used
// during budget selection — tests inject a corrupted coefficient through it
// to prove the checks can fail.
struct VerifyOptions {
  LambdaCoefficientFn lambda_coefficient;
  BudgetMode budget_mode = BudgetMode::Analytic;
  int n_cap = 300;  // used when budget_mode == Capped
  int bound_instances = 12;
  int rollout_instances = 6;
  int lipschitz_instances = 3;
  int perturbations = 150;
  int anytime_instances = 5;
  int oracle_nodes = 400;
  std::uint64_t seed = 20260822;
  std::string failure_dir;  // where offending instances are written; "" = cwd
};

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;        // one-line summary with the worst observed margin
  std::string failure_json;  // offending instance, serialized for replay; empty on pass
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed() const;
};

// Runs every check on randomly generated tiny instances (2–4 locations,
// 2-stage lookahead, every reward kind) against dense-quadrature oracles.
VerifyReport run_verification(const VerifyOptions& opts = {});

// Prints one pass/fail line per check; each failure also writes the offending
// instance as JSON next to the output. Returns 0 iff every check passed.
int cmd_verify(const VerifyOptions& opts = {});

}  // namespace gpplan
