#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gpplan/geometry.hpp"

namespace gpplan {

// Stationary anisotropic squared-exponential prior over a scalar field, plus
// i.i.d. Gaussian measurement noise.
struct GpHyperparams {
  double prior_mean = 0.0;
  double signal_variance = 1.0;   // kernel amplitude
  double noise_variance = 1e-5;   // measurement noise, must be > 0
  double length_scale_x = 1.0;
  double length_scale_y = 1.0;

  void validate() const;  // throws ArgumentError on a non-positive scale/variance
};

// k(a, b) = signal_variance * exp(-0.5 * ((dx/lx)^2 + (dy/ly)^2))
double kernel_eval(const GpHyperparams& hyper, const Location& a, const Location& b);

// Predictive distribution of the *noisy* measurement at a location:
// variance includes the noise floor, so it is always >= noise_variance.
struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

// Immutable measurement history with a cached Cholesky factor of the
// regularized covariance  Gamma = K + noise_variance * I.
//
// extended() appends one observation by a rank-1 factor update (O(m^2));
// a full-refactorization mode recomputes the factor from scratch for
// cross-checking the incremental path. All queries are const and safe to run
// concurrently on the same History; extension returns a new value.
class History {
 public:
  History() = default;
  explicit History(bool refactor_on_extend) : refactor_on_extend_(refactor_on_extend) {}

  static History from_observations(const std::vector<Location>& locations,
                                   const std::vector<double>& measurements,
                                   const GpHyperparams& hyper,
                                   bool refactor_on_extend = false);

  int size() const { return static_cast<int>(locs_.size()); }
  bool empty() const { return locs_.empty(); }
  const std::vector<Location>& locations() const { return locs_; }
  const std::vector<double>& measurements() const { return z_; }

  // Appends (s, z). Throws ConditioningError when the updated factor's
  // condition estimate exceeds the trust threshold.
  History extended(const Location& s, double z, const GpHyperparams& hyper) const;

  // Predictive mean and variance at s. Empty history falls back to the prior.
  Posterior posterior(const Location& s, const GpHyperparams& hyper) const;

  // Euclidean norm of the weight row  k(s, hist) Gamma^{-1}: how strongly the
  // measurement vector can move the posterior mean at s. Zero when empty.
  double alpha_norm(const Location& s, const GpHyperparams& hyper) const;

  // (max diag / min diag)^2 of the Cholesky factor; 1 when empty.
  double condition_estimate() const;

  // Relative Frobenius reconstruction error of Gamma from the cached factor
  // (diagnostic used by tests).
  double factor_reconstruction_error(const GpHyperparams& hyper) const;

  static constexpr double kConditionLimit = 1e12;

 private:
  void check_condition() const;
  Eigen::VectorXd solve_lower(const Location& s, const GpHyperparams& hyper) const;

  std::vector<Location> locs_;
  std::vector<double> z_;
  Eigen::MatrixXd chol_;   // lower-triangular factor of Gamma
  Eigen::VectorXd white_;  // chol^{-1} (z - prior_mean)
  bool refactor_on_extend_ = false;
};

}  // namespace gpplan
