#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace gpplan {

// Deterministic weighted sample set standing in for a Gaussian expectation:
// E[f(Z)] ~ sum_i weight[i] * f(sample[i]),  Z ~ N(mean, sigma^2).
// Two boundary samples sit at mean -/+ tau*sigma and carry the tail mass
// Phi(-tau) each; the interior samples are evenly spaced midpoints whose
// weights are the Gaussian mass of their cells. tau = 0 collapses to the
// single sample (mean, 1).
struct Partition {
  std::vector<double> samples;
  std::vector<double> weights;

  int size() const { return static_cast<int>(samples.size()); }
};

// Builds the partition. Valid shapes: tau = 0 with n >= 1 (canonical single
// sample), or tau > 0 with n > 2. Anything else throws ArgumentError.
Partition build_partition(double mean, double sigma, int n, double tau);

// Worst-case quadrature error coefficient: for any f with Lipschitz constant
// L_f, |sum_i w_i f(z_i) - E f(Z)| <= lambda_coefficient(n, tau) * sigma * L_f.
// Defined for (n >= 2, tau = 0) -> sqrt(2/pi) and (n > 2, tau > 0)
// -> kappa(tau) + eta(n, tau); other shapes throw ArgumentError.
double lambda_coefficient(int n, double tau);

// Tail term: sqrt(2/pi) e^{-tau^2/2} - 2 tau Phi(-tau).
double kappa_coefficient(double tau);
// Interior spacing term: 2 tau (1/2 - Phi(-tau)) / (n - 2).
double eta_coefficient(int n, double tau);

using LambdaCoefficientFn = std::function<double(int, double)>;

struct BudgetChoice {
  double tau = 0.0;
  int n = 1;
  double bound = 0.0;  // lambda_coefficient(n, tau) * sigma * l1_plus_L
};

// Smallest closed-form budget meeting the per-stage tolerance `lam`:
// solves  2 sqrt(2/pi) e^{-tau^2/2} = lam / (sigma * l1_plus_L)  for tau and
// ceils  n = 2 + tau sqrt(pi/2) e^{tau^2/2}.  Degenerate cases short-circuit:
// l1_plus_L = 0 -> (0, 1); tolerance at or above the tau = 0 threshold
// -> (0, 2). The returned pair is re-verified against lambda_coefficient.
// `coeff` injects an alternative coefficient for fault-injection tests.
BudgetChoice feasible_tau_n(double lam, double sigma, double l1_plus_L,
                            const LambdaCoefficientFn& coeff = {});

// Capped variant: for each n in [2, n_max), minimizes the error coefficient
// over tau in [0, 10] by golden-section search (tol 1e-6) and returns the
// smallest n whose optimum meets the tolerance, or nullopt when none does.
std::optional<BudgetChoice> feasible_n_capped(double lam, double sigma, double l1_plus_L,
                                              int n_max, const LambdaCoefficientFn& coeff = {});

}  // namespace gpplan
