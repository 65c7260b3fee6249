#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpplan/episode.hpp"

namespace gpplan {

// Experiment configuration file: INI-style sections [field], [planner],
// [run] with `key = value` lines and full-line # comments. Unknown sections
// or keys are errors — a silent typo in a tolerance would invalidate results.

struct FieldSection {
  std::string mode = "generate";  // "generate" draws from the prior, "load" reads a CSV
  std::string path;               // load mode only
  int width = 20;
  int height = 20;
  double cell_size = 0.05;
  std::string units = "km";
  std::uint64_t seed = 1;
  bool per_seed_field = true;  // generate a fresh realization per episode seed
  GpHyperparams hyper;         // GP prior used for generation and planning
};

struct PlannerSection {
  std::vector<PolicyKind> policies{PolicyKind::EpsilonGpp};
  RewardKind reward = RewardKind::Ucb;
  double beta = 0.0;   // ucb reward bonus and greedy_ucb weight
  double threshold = 0.0;
  double cutin = 0.0;
  int quad_nodes = 64;
  double xi = 0.0;
  double epsilon = 1.0;
  double lambda = 0.0;  // > 0 pins the per-stage tolerance instead of deriving it
  int horizon = 1;
  BudgetMode budget_mode = BudgetMode::Analytic;
  int n_cap = 0;
  double fixed_tau = 0.0;
  int fixed_n = 1;
  AnytimeStop stop;
};

struct RunSection {
  int steps = 20;
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t noise_seed_base = 0;
  std::string out = "out";
  bool prior_obs_at_start = true;
  bool full_refactor = false;
  // "auto" (center for generated fields, seeded-random for loaded ones),
  // "center", "random", or an explicit cell index.
  std::string start = "auto";
};

struct ExperimentConfig {
  FieldSection field;
  PlannerSection planner;
  RunSection run;

  void validate() const;          // throws ConfigError
  std::string serialize() const;  // canonical text; parse(serialize(c)) == c
  RewardSpec make_reward_spec() const;
  EpisodeConfig episode_config(PolicyKind policy) const;
};

ExperimentConfig parse_config(const std::string& text);       // throws ConfigError
ExperimentConfig parse_config_file(const std::string& path);  // adds IoError

// Hash of a file's bytes the way git hashes a blob: sha1("blob <len>\0" +
// content), hex-encoded. Stamped into run metadata so results can be traced
// to the exact configuration text.
std::string git_blob_sha1(const std::string& content);

struct RunOptions {
  int workers = 0;  // 0: take GPPLAN_WORKERS, else hardware concurrency
  std::string out_override;
  bool trace = false;  // per-iteration trace CSV for the anytime policy
};

// Runs every (policy, seed) episode, writes results_<policy>.csv,
// summary_<policy>.csv, and metadata.json under the output directory.
// Returns 0 on success, 2 on configuration errors, 1 on runtime failures
// (partial results are kept and metadata records complete = false).
int cmd_run(const std::string& config_path, const RunOptions& opts = {});

// Generates the configured field and writes it as CSV. Same exit codes.
int cmd_gen_field(const std::string& config_path, const std::string& out_csv);

}  // namespace gpplan
