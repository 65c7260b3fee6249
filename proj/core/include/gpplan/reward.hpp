#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gpplan/geometry.hpp"
#include "gpplan/gp.hpp"

namespace gpplan {

enum class RewardKind { Ucb, LogEnergy, Step, Gaussian, Mes, Custom };

RewardKind reward_kind_from_string(const std::string& name);
std::string to_string(RewardKind kind);

// Additive reward R(z, path) = r1(z) + r2(z) + r3(path, predictive variance).
//
// g_sigma and h_sigma are the measurement-marginalized components: convolving
// r2 (resp. r1) with a zero-mean Gaussian of the posterior's width, so that
// E[R | posterior N(u, sigma^2)] = h_sigma(u, sigma) + g_sigma(u, sigma) + r3.
// l1 bounds the slope of h_sigma in u for every sigma; l2_of_sigma does the
// same for g_sigma at a given sigma.
struct RewardSpec {
  RewardKind kind = RewardKind::Custom;
  std::map<std::string, double> params;

  double l1 = 0.0;
  std::function<double(double)> l2_of_sigma;
  std::function<double(double)> r1;
  std::function<double(double)> r2;
  std::function<double(double, double)> g_sigma;  // (u, sigma)
  std::function<double(double, double)> h_sigma;  // (u, sigma)
  std::function<double(const std::vector<Location>&, double)> r3;  // (visited, variance)

  // z values where r1/r2 are not smooth; quadratures split there.
  std::vector<double> breakpoints;
};

// Catalog constructor. Required params per kind:
//   ucb:        beta             (exploration bonus times posterior std dev)
//   log_energy: cutin            (optional quad_nodes, default 64)
//   step:       threshold
//   gaussian, mes: none
// Throws ArgumentError for an unknown kind or missing parameter, and
// NumericError when the log_energy quadrature fails its startup
// node-doubling convergence check.
RewardSpec make_reward(RewardKind kind, const std::map<std::string, double>& params = {});

// E[R] under posterior (mean, variance) after visiting `visited`.
// Throws NumericError when any component is non-finite.
double expected_immediate_reward(const RewardSpec& reward, const Posterior& post,
                                 const std::vector<Location>& visited);

// Gaussian smoothing of r1: integral r1(u + sigma*y) phi(y) dy.
// Smooth integrands use an n-node Gauss–Hermite rule. When breakpoints are
// given, the expectation is split at each breakpoint and every smooth piece
// is integrated by an n-node Gauss–Legendre rule with the Gaussian weight
// folded in — a plain Hermite rule stalls at ~1e-3 accuracy on integrands
// with a kink, far short of what the per-stage tolerances need.
double h_sigma_numeric(const std::function<double(double)>& r1, double u, double sigma, int nodes,
                       const std::vector<double>& breakpoints = {});

}  // namespace gpplan
