#include "gpplan/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "gpplan/errors.hpp"
#include "gpplan/field.hpp"
#include "gpplan/lipschitz.hpp"

namespace fs = std::filesystem;

namespace gpplan {

namespace {

// ---------------------------------------------------------------- sha-1 ----

std::uint32_t rotl32(std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

std::string sha1_hex(const std::string& data) {
  std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};

  std::string msg = data;
  const std::uint64_t bit_len = static_cast<std::uint64_t>(data.size()) * 8;
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((bit_len >> (8 * i)) & 0xFF));

  for (std::size_t chunk = 0; chunk < msg.size(); chunk += 64) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = 0;
      for (int b = 0; b < 4; ++b) {
        w[i] = (w[i] << 8) | static_cast<unsigned char>(msg[chunk + 4 * i + b]);
      }
    }
    for (int i = 16; i < 80; ++i) w[i] = rotl32(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);

    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const std::uint32_t tmp = rotl32(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rotl32(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  static const char* digits = "0123456789abcdef";
  std::string hex;
  hex.reserve(40);
  for (std::uint32_t v : h) {
    for (int i = 7; i >= 0; --i) hex.push_back(digits[(v >> (4 * i)) & 0xF]);
  }
  return hex;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// -------------------------------------------------------------- parsing ----

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError("invalid value for " + key + ": '" + value + "'");
}

long long parse_ll(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) bad_value(key, value);
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  const long long v = parse_ll(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    bad_value(key, value);
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) bad_value(key, value);
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) bad_value(key, value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  bad_value(key, value);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(value);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void parse_budget_mode(const std::string& value, PlannerSection& planner) {
  if (value == "analytic") {
    planner.budget_mode = BudgetMode::Analytic;
    return;
  }
  if (value.rfind("capped:", 0) == 0) {
    planner.budget_mode = BudgetMode::Capped;
    planner.n_cap = parse_int("budget_mode", value.substr(7));
    return;
  }
  if (value.rfind("fixed:", 0) == 0) {
    const std::vector<std::string> parts = split_list(value.substr(6));
    if (parts.size() != 2) bad_value("budget_mode", value);
    planner.budget_mode = BudgetMode::Fixed;
    planner.fixed_tau = parse_double("budget_mode", parts[0]);
    planner.fixed_n = parse_int("budget_mode", parts[1]);
    return;
  }
  bad_value("budget_mode", value);
}

std::string budget_mode_string(const PlannerSection& planner) {
  switch (planner.budget_mode) {
    case BudgetMode::Analytic: return "analytic";
    case BudgetMode::Capped: return "capped:" + std::to_string(planner.n_cap);
    case BudgetMode::Fixed:
      return "fixed:" + format_double(planner.fixed_tau) + "," + std::to_string(planner.fixed_n);
  }
  throw ConfigError("unknown budget mode");
}

void apply_field_key(FieldSection& field, const std::string& key, const std::string& value) {
  if (key == "mode") {
    if (value != "generate" && value != "load") bad_value(key, value);
    field.mode = value;
  } else if (key == "path") {
    field.path = value;
  } else if (key == "width") {
    field.width = parse_int(key, value);
  } else if (key == "height") {
    field.height = parse_int(key, value);
  } else if (key == "cell_size") {
    field.cell_size = parse_double(key, value);
  } else if (key == "units") {
    field.units = value;
  } else if (key == "seed") {
    field.seed = parse_u64(key, value);
  } else if (key == "per_seed_field") {
    field.per_seed_field = parse_bool(key, value);
  } else if (key == "prior_mean") {
    field.hyper.prior_mean = parse_double(key, value);
  } else if (key == "signal_variance") {
    field.hyper.signal_variance = parse_double(key, value);
  } else if (key == "noise_variance") {
    field.hyper.noise_variance = parse_double(key, value);
  } else if (key == "length_scale_x") {
    field.hyper.length_scale_x = parse_double(key, value);
  } else if (key == "length_scale_y") {
    field.hyper.length_scale_y = parse_double(key, value);
  } else {
    throw ConfigError("unknown key in [field]: " + key);
  }
}

void apply_planner_key(PlannerSection& planner, const std::string& key, const std::string& value) {
  if (key == "policy") {
    planner.policies.clear();
    for (const std::string& name : split_list(value)) {
      try {
        planner.policies.push_back(policy_from_string(name));
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    if (planner.policies.empty()) bad_value(key, value);
  } else if (key == "reward") {
    try {
      planner.reward = reward_kind_from_string(value);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "beta") {
    planner.beta = parse_double(key, value);
  } else if (key == "threshold") {
    planner.threshold = parse_double(key, value);
  } else if (key == "cutin") {
    planner.cutin = parse_double(key, value);
  } else if (key == "quad_nodes") {
    planner.quad_nodes = parse_int(key, value);
  } else if (key == "xi") {
    planner.xi = parse_double(key, value);
  } else if (key == "epsilon") {
    planner.epsilon = parse_double(key, value);
  } else if (key == "lambda") {
    planner.lambda = parse_double(key, value);
  } else if (key == "horizon") {
    planner.horizon = parse_int(key, value);
  } else if (key == "budget_mode") {
    parse_budget_mode(value, planner);
  } else if (key == "max_nodes") {
    planner.stop.max_nodes = parse_ll(key, value);
  } else if (key == "max_iterations") {
    planner.stop.max_iterations = parse_ll(key, value);
  } else if (key == "gap_target") {
    planner.stop.gap_target = parse_double(key, value);
  } else {
    throw ConfigError("unknown key in [planner]: " + key);
  }
}

void apply_run_key(RunSection& run, const std::string& key, const std::string& value) {
  if (key == "steps") {
    run.steps = parse_int(key, value);
  } else if (key == "seeds") {
    run.seeds.clear();
    for (const std::string& item : split_list(value)) {
      run.seeds.push_back(parse_u64(key, item));
    }
    if (run.seeds.empty()) bad_value(key, value);
  } else if (key == "seed_count") {
    const int count = parse_int(key, value);
    if (count < 1) bad_value(key, value);
    run.seeds.clear();
    for (int i = 0; i < count; ++i) run.seeds.push_back(static_cast<std::uint64_t>(i));
  } else if (key == "noise_seed_base") {
    run.noise_seed_base = parse_u64(key, value);
  } else if (key == "out") {
    run.out = value;
  } else if (key == "prior_obs_at_start") {
    run.prior_obs_at_start = parse_bool(key, value);
  } else if (key == "full_refactor") {
    run.full_refactor = parse_bool(key, value);
  } else if (key == "start") {
    run.start = value;
  } else {
    throw ConfigError("unknown key in [run]: " + key);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string git_blob_sha1(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  return sha1_hex(blob);
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) +
                                                ": malformed section header: " + line);
      section = line.substr(1, line.size() - 2);
      if (section != "field" && section != "planner" && section != "run")
        throw ConfigError("unknown section: [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
    if (section == "field") {
      apply_field_key(cfg.field, key, value);
    } else if (section == "planner") {
      apply_planner_key(cfg.planner, key, value);
    } else {
      apply_run_key(cfg.run, key, value);
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  return parse_config(read_file(path));
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out << "[field]\n";
  out << "mode = " << field.mode << "\n";
  if (!field.path.empty()) out << "path = " << field.path << "\n";
  out << "width = " << field.width << "\n";
  out << "height = " << field.height << "\n";
  out << "cell_size = " << format_double(field.cell_size) << "\n";
  out << "units = " << field.units << "\n";
  out << "seed = " << field.seed << "\n";
  out << "per_seed_field = " << (field.per_seed_field ? "true" : "false") << "\n";
  out << "prior_mean = " << format_double(field.hyper.prior_mean) << "\n";
  out << "signal_variance = " << format_double(field.hyper.signal_variance) << "\n";
  out << "noise_variance = " << format_double(field.hyper.noise_variance) << "\n";
  out << "length_scale_x = " << format_double(field.hyper.length_scale_x) << "\n";
  out << "length_scale_y = " << format_double(field.hyper.length_scale_y) << "\n";
  out << "\n[planner]\n";
  out << "policy = ";
  for (std::size_t i = 0; i < planner.policies.size(); ++i) {
    if (i) out << ",";
    out << to_string(planner.policies[i]);
  }
  out << "\n";
  out << "reward = " << to_string(planner.reward) << "\n";
  out << "beta = " << format_double(planner.beta) << "\n";
  out << "threshold = " << format_double(planner.threshold) << "\n";
  out << "cutin = " << format_double(planner.cutin) << "\n";
  out << "quad_nodes = " << planner.quad_nodes << "\n";
  out << "xi = " << format_double(planner.xi) << "\n";
  out << "epsilon = " << format_double(planner.epsilon) << "\n";
  out << "lambda = " << format_double(planner.lambda) << "\n";
  out << "horizon = " << planner.horizon << "\n";
  out << "budget_mode = " << budget_mode_string(planner) << "\n";
  out << "max_nodes = " << planner.stop.max_nodes << "\n";
  out << "max_iterations = " << planner.stop.max_iterations << "\n";
  out << "gap_target = " << format_double(planner.stop.gap_target) << "\n";
  out << "\n[run]\n";
  out << "steps = " << run.steps << "\n";
  out << "seeds = ";
  for (std::size_t i = 0; i < run.seeds.size(); ++i) {
    if (i) out << ",";
    out << run.seeds[i];
  }
  out << "\n";
  out << "noise_seed_base = " << run.noise_seed_base << "\n";
  out << "out = " << run.out << "\n";
  out << "prior_obs_at_start = " << (run.prior_obs_at_start ? "true" : "false") << "\n";
  out << "full_refactor = " << (run.full_refactor ? "true" : "false") << "\n";
  out << "start = " << run.start << "\n";
  return out.str();
}

RewardSpec ExperimentConfig::make_reward_spec() const {
  std::map<std::string, double> params;
  switch (planner.reward) {
    case RewardKind::Ucb:
      params["beta"] = planner.beta;
      break;
    case RewardKind::Step:
      params["threshold"] = planner.threshold;
      break;
    case RewardKind::LogEnergy:
      params["cutin"] = planner.cutin;
      params["quad_nodes"] = static_cast<double>(planner.quad_nodes);
      break;
    default:
      break;
  }
  return make_reward(planner.reward, params);
}

EpisodeConfig ExperimentConfig::episode_config(PolicyKind policy) const {
  EpisodeConfig cfg;
  cfg.policy = policy;
  cfg.steps = run.steps;
  cfg.horizon = planner.horizon;
  cfg.epsilon = planner.epsilon;
  cfg.lambda = planner.lambda;
  cfg.budget_mode = planner.budget_mode;
  cfg.n_cap = planner.n_cap;
  cfg.fixed_tau = planner.fixed_tau;
  cfg.fixed_n = planner.fixed_n;
  cfg.stop = planner.stop;
  cfg.beta = planner.beta;
  cfg.xi = planner.xi;
  cfg.prior_obs_at_start = run.prior_obs_at_start;
  cfg.full_refactor = run.full_refactor;
  return cfg;
}

void ExperimentConfig::validate() const {
  if (field.mode == "generate") {
    if (field.width < 1 || field.height < 1) throw ConfigError("[field] width/height must be >= 1");
    if (static_cast<long long>(field.width) * field.height > 2500)
      throw ConfigError("[field] generated grids are limited to 2500 cells");
    if (!(field.cell_size > 0.0)) throw ConfigError("[field] cell_size must be > 0");
  } else if (field.mode == "load") {
    if (field.path.empty()) throw ConfigError("[field] load mode requires path");
    if (!fs::exists(field.path)) throw ConfigError("[field] path does not exist: " + field.path);
  } else {
    throw ConfigError("[field] mode must be generate or load");
  }
  try {
    field.hyper.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("[field] ") + e.what());
  }

  if (planner.policies.empty()) throw ConfigError("[planner] policy list is empty");
  if (planner.horizon < 1) throw ConfigError("[planner] horizon must be >= 1");
  if (planner.stop.max_nodes < 1) throw ConfigError("[planner] max_nodes must be >= 1");
  if (planner.stop.max_iterations < 0) throw ConfigError("[planner] max_iterations must be >= 0");
  try {
    make_reward_spec();
  } catch (const Error& e) {
    throw ConfigError(std::string("[planner] ") + e.what());
  }
  for (PolicyKind policy : planner.policies) {
    if (policy == PolicyKind::EpsilonGpp || policy == PolicyKind::Anytime) {
      PlannerConfig pc;
      pc.horizon = planner.horizon;
      pc.epsilon = planner.epsilon;
      pc.lambda = planner.lambda;
      pc.budget_mode = planner.budget_mode;
      pc.n_cap = planner.n_cap;
      pc.fixed_tau = planner.fixed_tau;
      pc.fixed_n = planner.fixed_n;
      try {
        pc.validate();
      } catch (const Error& e) {
        throw ConfigError(std::string("[planner] ") + e.what());
      }
    }
  }

  if (run.steps < 1) throw ConfigError("[run] steps must be >= 1");
  if (run.seeds.empty()) throw ConfigError("[run] seeds is empty");
  if (run.out.empty()) throw ConfigError("[run] out is empty");
  if (run.start != "auto" && run.start != "center" && run.start != "random") {
    const int idx = parse_int("start", run.start);
    if (idx < 0) throw ConfigError("[run] start index must be >= 0");
    if (field.mode == "generate" && idx >= field.width * field.height)
      throw ConfigError("[run] start index outside the field");
  }
}

namespace {

int resolve_start(const ExperimentConfig& cfg, const FieldGrid& field, std::uint64_t seed) {
  std::string mode = cfg.run.start;
  if (mode == "auto") mode = cfg.field.mode == "load" ? "random" : "center";
  if (mode == "center") {
    return (field.height / 2) * field.width + field.width / 2;
  }
  if (mode == "random") {
    const auto cells = static_cast<std::uint64_t>(field.values.size());
    return static_cast<int>(splitmix64(seed) % cells);
  }
  const int idx = parse_int("start", mode);
  if (idx >= static_cast<int>(field.values.size()))
    throw ConfigError("[run] start index outside the field");
  return idx;
}

int worker_count(const RunOptions& opts, std::size_t jobs) {
  int n = opts.workers;
  if (n <= 0) {
    if (const char* env = std::getenv("GPPLAN_WORKERS")) {
      try {
        n = parse_int("GPPLAN_WORKERS", env);
      } catch (const Error&) {
        n = 0;
      }
    }
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  return static_cast<int>(std::min<std::size_t>(n, jobs));
}

double lambda_for_horizon(const PlannerSection& planner, int horizon) {
  if (planner.lambda > 0.0) return planner.lambda;
  const double h = static_cast<double>(horizon);
  return planner.epsilon / (h * (h + 1.0));
}

int run_experiment(const ExperimentConfig& cfg, const std::string& config_text,
                   const RunOptions& opts) {
  const fs::path out_dir = opts.out_override.empty() ? cfg.run.out : opts.out_override;
  fs::create_directories(out_dir);
  const RewardSpec reward = cfg.make_reward_spec();

  const std::size_t n_seeds = cfg.run.seeds.size();
  std::vector<FieldGrid> fields;
  if (cfg.field.mode == "load") {
    fields.push_back(load_field_csv(cfg.field.path));
  } else if (!cfg.field.per_seed_field) {
    fields.push_back(sample_field(cfg.field.width, cfg.field.height, cfg.field.cell_size,
                                  cfg.field.hyper, cfg.field.seed, cfg.field.units));
  } else {
    fields.reserve(n_seeds);
    for (std::uint64_t seed : cfg.run.seeds) {
      fields.push_back(sample_field(cfg.field.width, cfg.field.height, cfg.field.cell_size,
                                    cfg.field.hyper, cfg.field.seed + seed, cfg.field.units));
    }
  }
  const bool shared_field = fields.size() == 1;
  const ActionModel actions = grid_neighbors(fields[0].domain());

  const std::vector<PolicyKind>& policies = cfg.planner.policies;
  struct Job {
    std::size_t policy;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  jobs.reserve(policies.size() * n_seeds);
  for (std::size_t p = 0; p < policies.size(); ++p) {
    for (std::size_t s = 0; s < n_seeds; ++s) jobs.push_back({p, s});
  }

  std::vector<std::vector<std::optional<EpisodeResult>>> results(
      policies.size(), std::vector<std::optional<EpisodeResult>>(n_seeds));
  std::vector<std::string> errors;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job job = jobs[i];
      const PolicyKind policy = policies[job.policy];
      const std::uint64_t seed = cfg.run.seeds[job.seed];
      const FieldGrid& field = shared_field ? fields[0] : fields[job.seed];
      try {
        EpisodeConfig ecfg = cfg.episode_config(policy);
        ecfg.trace = opts.trace && policy == PolicyKind::Anytime;
        const int start = resolve_start(cfg, field, seed);
        results[job.policy][job.seed] =
            run_episode(field, actions, cfg.field.hyper, reward, ecfg, start,
                        cfg.run.noise_seed_base + seed, seed);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        errors.push_back(to_string(policy) + " seed " + std::to_string(seed) + ": " + e.what());
      }
    }
  };

  const int n_workers = worker_count(opts, jobs.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  std::sort(errors.begin(), errors.end());
  const bool complete = errors.empty();

  nlohmann::json meta;
  meta["schema_version"] = 1;
  meta["config_sha1"] = git_blob_sha1(config_text);
  meta["complete"] = complete;
  if (!complete) meta["errors"] = errors;
  meta["field"] = {{"mode", cfg.field.mode},
                   {"width", fields[0].width},
                   {"height", fields[0].height},
                   {"cell_size", fields[0].cell_size},
                   {"units", fields[0].units},
                   {"seed", cfg.field.seed},
                   {"per_seed_field", cfg.field.per_seed_field && cfg.field.mode == "generate"}};
  meta["run"] = {{"steps", cfg.run.steps},
                 {"seeds", cfg.run.seeds},
                 {"noise_seed_base", cfg.run.noise_seed_base},
                 {"prior_obs_at_start", cfg.run.prior_obs_at_start},
                 {"start", cfg.run.start}};
  nlohmann::json planner_meta = {{"reward", to_string(cfg.planner.reward)},
                                 {"horizon", cfg.planner.horizon},
                                 {"epsilon", cfg.planner.epsilon},
                                 {"budget_mode", budget_mode_string(cfg.planner)},
                                 {"lambda_policy", cfg.planner.lambda > 0.0
                                                       ? "explicit"
                                                       : "rederived_per_replan"}};
  if (cfg.planner.budget_mode != BudgetMode::Fixed) {
    nlohmann::json lambdas = nlohmann::json::array();
    for (int k = 0; k < cfg.run.steps; ++k) {
      lambdas.push_back(lambda_for_horizon(cfg.planner, std::min(cfg.planner.horizon,
                                                                 cfg.run.steps - k)));
    }
    planner_meta["lambda_per_step"] = lambdas;
  }
  meta["planner"] = planner_meta;

  nlohmann::json policies_meta = nlohmann::json::array();
  for (std::size_t p = 0; p < policies.size(); ++p) {
    std::vector<EpisodeResult> ok;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      if (results[p][s]) ok.push_back(*results[p][s]);
    }
    const std::string name = to_string(policies[p]);
    write_results_csv((out_dir / ("results_" + name + ".csv")).string(), ok);
    if (!ok.empty()) {
      write_summary_csv((out_dir / ("summary_" + name + ".csv")).string(), aggregate(ok));
    }
    if (opts.trace && policies[p] == PolicyKind::Anytime && !ok.empty()) {
      write_trace_csv((out_dir / ("trace_" + name + ".csv")).string(), ok);
    }

    nlohmann::json pm;
    pm["name"] = name;
    pm["episodes"] = ok.size();
    nlohmann::json budgets = nlohmann::json::array();
    if (!ok.empty()) {
      for (std::size_t k = 0; k < ok.front().steps.size(); ++k) {
        int n_min = std::numeric_limits<int>::max();
        int n_max = 0;
        double tau_min = std::numeric_limits<double>::infinity();
        double tau_max = 0.0;
        for (const EpisodeResult& r : ok) {
          const StepRecord& rec = r.steps[k];
          if (rec.n_max == 0) continue;
          n_min = std::min(n_min, rec.n_min);
          n_max = std::max(n_max, rec.n_max);
          tau_min = std::min(tau_min, rec.tau_min);
          tau_max = std::max(tau_max, rec.tau_max);
        }
        if (n_max > 0) {
          budgets.push_back({{"step", k},
                             {"n_min", n_min},
                             {"n_max", n_max},
                             {"tau_min", tau_min},
                             {"tau_max", tau_max}});
        }
      }
    }
    pm["budgets"] = budgets;
    policies_meta.push_back(pm);
  }
  meta["policies"] = policies_meta;

  {
    std::ofstream out(out_dir / "metadata.json");
    if (!out) throw IoError("cannot open for writing: " + (out_dir / "metadata.json").string());
    out << meta.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + (out_dir / "metadata.json").string());
  }

  if (!complete) {
    for (const std::string& e : errors) std::cerr << "episode failed: " << e << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int cmd_run(const std::string& config_path, const RunOptions& opts) {
  ExperimentConfig cfg;
  std::string text;
  try {
    text = read_file(config_path);
    cfg = parse_config(text);
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    return run_experiment(cfg, text, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_gen_field(const std::string& config_path, const std::string& out_csv) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config_file(config_path);
    cfg.validate();
    if (cfg.field.mode != "generate")
      throw ConfigError("gen-field requires [field] mode = generate");
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const FieldGrid field = sample_field(cfg.field.width, cfg.field.height, cfg.field.cell_size,
                                         cfg.field.hyper, cfg.field.seed, cfg.field.units);
    save_field_csv(field, out_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace gpplan
