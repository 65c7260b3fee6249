#include "gpplan/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gpplan/errors.hpp"
#include "gpplan/math.hpp"

namespace gpplan {

RewardKind reward_kind_from_string(const std::string& name) {
  if (name == "ucb") return RewardKind::Ucb;
  if (name == "log_energy") return RewardKind::LogEnergy;
  if (name == "step") return RewardKind::Step;
  if (name == "gaussian") return RewardKind::Gaussian;
  if (name == "mes") return RewardKind::Mes;
  if (name == "custom") return RewardKind::Custom;
  throw ArgumentError("unknown reward kind: " + name);
}

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::Ucb: return "ucb";
    case RewardKind::LogEnergy: return "log_energy";
    case RewardKind::Step: return "step";
    case RewardKind::Gaussian: return "gaussian";
    case RewardKind::Mes: return "mes";
    case RewardKind::Custom: return "custom";
  }
  throw ArgumentError("unknown reward kind");
}

double h_sigma_numeric(const std::function<double(double)>& r1, double u, double sigma, int nodes,
                       const std::vector<double>& breakpoints) {
  if (!(sigma > 0.0)) throw ArgumentError("h_sigma_numeric: sigma must be > 0");
  if (nodes < 2) throw ArgumentError("h_sigma_numeric: need at least 2 nodes");

  // collect breakpoints that fall inside the effective support
  const double lo = u - 12.0 * sigma;
  const double hi = u + 12.0 * sigma;
  std::vector<double> cuts;
  for (double b : breakpoints) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());

  double total = 0.0;
  if (cuts.empty()) {
    const QuadratureRule rule = gauss_hermite(nodes);
    const double scale = sigma * std::numbers::sqrt2;
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) acc += rule.weights[i] * r1(u + scale * rule.nodes[i]);
    total = acc / std::sqrt(std::numbers::pi);
  } else {
    cuts.insert(cuts.begin(), lo);
    cuts.push_back(hi);
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
      const QuadratureRule rule = gauss_legendre(nodes, cuts[seg], cuts[seg + 1]);
      double acc = 0.0;
      for (int i = 0; i < nodes; ++i) {
        const double z = rule.nodes[i];
        acc += rule.weights[i] * r1(z) * normal_pdf((z - u) / sigma);
      }
      total += acc / sigma;
    }
  }
  if (!std::isfinite(total)) throw NumericError("h_sigma_numeric: non-finite integrand value");
  return total;
}

namespace {

double require_param(const std::map<std::string, double>& params, const char* name,
                     const char* kind) {
  const auto it = params.find(name);
  if (it == params.end())
    throw ArgumentError(std::string("make_reward(") + kind + "): missing parameter '" + name + "'");
  return it->second;
}

}  // namespace

RewardSpec make_reward(RewardKind kind, const std::map<std::string, double>& params) {
  RewardSpec spec;
  spec.kind = kind;
  spec.params = params;
  const auto zero1 = [](double) { return 0.0; };
  const auto zero2 = [](double, double) { return 0.0; };
  const auto zero3 = [](const std::vector<Location>&, double) { return 0.0; };
  const auto identity_g = [](double u, double) { return u; };
  spec.r1 = zero1;
  spec.r2 = zero1;
  spec.g_sigma = zero2;
  spec.h_sigma = zero2;
  spec.r3 = zero3;
  spec.l2_of_sigma = zero1;

  switch (kind) {
    case RewardKind::Ucb: {
      const double beta = require_param(params, "beta", "ucb");
      spec.r2 = [](double z) { return z; };
      spec.g_sigma = identity_g;
      spec.l2_of_sigma = [](double) { return 1.0; };
      spec.r3 = [beta](const std::vector<Location>&, double variance) {
        return beta * std::sqrt(variance);
      };
      break;
    }
    case RewardKind::Mes: {
      spec.r2 = [](double z) { return z; };
      spec.g_sigma = identity_g;
      spec.l2_of_sigma = [](double) { return 1.0; };
      spec.r3 = [](const std::vector<Location>&, double variance) {
        return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * variance);
      };
      break;
    }
    case RewardKind::Step: {
      const double a = require_param(params, "threshold", "step");
      spec.r2 = [a](double z) { return z > a ? 1.0 : 0.0; };
      spec.g_sigma = [a](double u, double sigma) { return 1.0 - normal_cdf((a - u) / sigma); };
      spec.l2_of_sigma = [](double sigma) {
        return 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
      };
      spec.breakpoints = {a};
      break;
    }
    case RewardKind::Gaussian: {
      spec.r2 = [](double z) { return normal_pdf(z); };
      spec.g_sigma = [](double u, double sigma) {
        const double v = 1.0 + sigma * sigma;
        return std::exp(-0.5 * u * u / v) / std::sqrt(2.0 * std::numbers::pi * v);
      };
      spec.l2_of_sigma = [](double sigma) {
        const double v = 1.0 + sigma * sigma;
        return std::exp(-0.5) / (std::sqrt(2.0 * std::numbers::pi) * v);
      };
      break;
    }
    case RewardKind::LogEnergy: {
      const double cutin = require_param(params, "cutin", "log_energy");
      int nodes = 64;
      if (const auto it = params.find("quad_nodes"); it != params.end())
        nodes = static_cast<int>(it->second);
      if (nodes < 2) throw ArgumentError("make_reward(log_energy): quad_nodes must be >= 2");
      spec.r1 = [cutin](double z) { return z > cutin ? std::log(z) : 0.0; };
      spec.l1 = 1.0;
      spec.breakpoints = {cutin};
      auto r1 = spec.r1;
      auto brk = spec.breakpoints;
      spec.h_sigma = [r1, brk, nodes](double u, double sigma) {
        return h_sigma_numeric(r1, u, sigma, nodes, brk);
      };
      // startup convergence check: doubling the node count must not move the
      // result on representative (u, sigma) probes
      for (const auto& [u, s] : {std::pair{cutin, 1.0}, {cutin + 2.0, 1.0}, {cutin + 5.0, 0.1}}) {
        const double once = h_sigma_numeric(r1, u, s, nodes, brk);
        const double twice = h_sigma_numeric(r1, u, s, 2 * nodes, brk);
        if (!(std::abs(once - twice) < 1e-8))
          throw NumericError("make_reward(log_energy): quadrature not converged at " +
                             std::to_string(nodes) + " nodes");
      }
      break;
    }
    case RewardKind::Custom:
      // caller fills in the callable fields directly
      break;
  }
  return spec;
}

double expected_immediate_reward(const RewardSpec& reward, const Posterior& post,
                                 const std::vector<Location>& visited) {
  if (!(post.variance > 0.0))
    throw ArgumentError("expected_immediate_reward: posterior variance must be > 0");
  const double sigma = std::sqrt(post.variance);
  const double value = reward.h_sigma(post.mean, sigma) + reward.g_sigma(post.mean, sigma) +
                       reward.r3(visited, post.variance);
  if (!std::isfinite(value)) throw NumericError("expected_immediate_reward: non-finite value");
  return value;
}

}  // namespace gpplan
