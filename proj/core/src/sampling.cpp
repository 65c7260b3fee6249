#include "gpplan/sampling.hpp"

#include <cmath>
#include <numbers>

#include "gpplan/errors.hpp"
#include "gpplan/math.hpp"

namespace gpplan {

namespace {

constexpr double kSqrt2OverPi = 0.7978845608028654;  // sqrt(2/pi)

void check_partition_shape(int n, double tau, const char* who) {
  if (!(tau >= 0.0)) throw ArgumentError(std::string(who) + ": tau must be >= 0");
  if (tau == 0.0) {
    if (n < 1) throw ArgumentError(std::string(who) + ": n must be >= 1 when tau = 0");
  } else if (n <= 2) {
    // n = 2 with tau > 0 has no interior samples to carry the central mass;
    // the error coefficient is undefined there, so the shape is rejected.
    throw ArgumentError(std::string(who) + ": n must be > 2 when tau > 0");
  }
}

}  // namespace

Partition build_partition(double mean, double sigma, int n, double tau) {
  if (!(sigma > 0.0)) throw ArgumentError("build_partition: sigma must be > 0");
  check_partition_shape(n, tau, "build_partition");

  Partition part;
  if (tau == 0.0) {
    part.samples = {mean};
    part.weights = {1.0};
    return part;
  }
  part.samples.resize(n);
  part.weights.resize(n);
  const double z0 = mean - tau * sigma;
  const double zl = mean + tau * sigma;
  part.samples[0] = z0;
  part.samples[n - 1] = zl;
  const double tail = normal_cdf(-tau);
  part.weights[0] = tail;
  part.weights[n - 1] = tail;
  for (int i = 1; i <= n - 2; ++i) {
    part.samples[i] = z0 + ((i - 0.5) / (n - 2)) * (zl - z0);
    part.weights[i] =
        normal_cdf(2.0 * i * tau / (n - 2) - tau) - normal_cdf(2.0 * (i - 1) * tau / (n - 2) - tau);
  }
  return part;
}

double kappa_coefficient(double tau) {
  return kSqrt2OverPi * std::exp(-0.5 * tau * tau) - 2.0 * tau * normal_cdf(-tau);
}

double eta_coefficient(int n, double tau) {
  if (n <= 2) throw ArgumentError("eta_coefficient: n must be > 2");
  return 2.0 * tau * (0.5 - normal_cdf(-tau)) / (n - 2);
}

double lambda_coefficient(int n, double tau) {
  if (!(tau >= 0.0)) throw ArgumentError("lambda_coefficient: tau must be >= 0");
  if (tau == 0.0) {
    if (n < 2) throw ArgumentError("lambda_coefficient: n must be >= 2 when tau = 0");
    return kSqrt2OverPi;
  }
  if (n <= 2) throw ArgumentError("lambda_coefficient: n must be > 2 when tau > 0");
  return kappa_coefficient(tau) + eta_coefficient(n, tau);
}

namespace {

double coeff_or_default(const LambdaCoefficientFn& coeff, int n, double tau) {
  return coeff ? coeff(n, tau) : lambda_coefficient(n, tau);
}

}  // namespace

BudgetChoice feasible_tau_n(double lam, double sigma, double l1_plus_L,
                            const LambdaCoefficientFn& coeff) {
  if (!(lam > 0.0)) throw ArgumentError("feasible_tau_n: tolerance must be > 0");
  if (!(sigma > 0.0)) throw ArgumentError("feasible_tau_n: sigma must be > 0");
  if (l1_plus_L < 0.0) throw ArgumentError("feasible_tau_n: negative Lipschitz sum");

  if (l1_plus_L == 0.0) return BudgetChoice{0.0, 1, 0.0};  // any partition is exact

  const double x = lam / (sigma * l1_plus_L);
  if (x >= 2.0 * kSqrt2OverPi) {
    // tolerance so loose the untruncated single-sample bound already meets it
    return BudgetChoice{0.0, 2, coeff_or_default(coeff, 2, 0.0) * sigma * l1_plus_L};
  }
  const double tau = std::sqrt(-2.0 * std::log(std::sqrt(std::numbers::pi / 2.0) * x / 2.0));
  const double n_raw = 2.0 + tau * std::sqrt(std::numbers::pi / 2.0) * std::exp(0.5 * tau * tau);
  if (!(n_raw < 1e9)) throw BudgetError("feasible_tau_n: required sample count exceeds 1e9");
  const int n = static_cast<int>(std::ceil(n_raw));
  BudgetChoice choice{tau, n, coeff_or_default(coeff, n, tau) * sigma * l1_plus_L};
  if (!(choice.bound <= lam * (1.0 + 1e-9)))
    throw NumericError("feasible_tau_n: closed-form budget failed re-verification");
  return choice;
}

std::optional<BudgetChoice> feasible_n_capped(double lam, double sigma, double l1_plus_L,
                                              int n_max, const LambdaCoefficientFn& coeff) {
  if (!(lam > 0.0)) throw ArgumentError("feasible_n_capped: tolerance must be > 0");
  if (!(sigma > 0.0)) throw ArgumentError("feasible_n_capped: sigma must be > 0");
  if (n_max < 2) throw ArgumentError("feasible_n_capped: n_max must be >= 2");
  if (l1_plus_L < 0.0) throw ArgumentError("feasible_n_capped: negative Lipschitz sum");

  if (l1_plus_L == 0.0) return BudgetChoice{0.0, 1, 0.0};

  for (int n = 2; n < n_max; ++n) {
    double tau = 0.0;
    double best;
    if (n == 2) {
      best = coeff_or_default(coeff, 2, 0.0);
    } else {
      // golden-section search for the tau minimizing the error coefficient
      constexpr double kInvPhi = 0.6180339887498949;
      double a = 0.0, b = 10.0;
      double c = b - kInvPhi * (b - a);
      double d = a + kInvPhi * (b - a);
      auto eval = [&](double t) { return coeff_or_default(coeff, n, t > 0.0 ? t : 1e-300); };
      double fc = eval(c), fd = eval(d);
      while (b - a > 1e-6) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - kInvPhi * (b - a);
          fc = eval(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + kInvPhi * (b - a);
          fd = eval(d);
        }
      }
      tau = 0.5 * (a + b);
      best = eval(tau);
    }
    if (best * sigma * l1_plus_L <= lam) {
      return BudgetChoice{tau, n, best * sigma * l1_plus_L};
    }
  }
  return std::nullopt;
}

}  // namespace gpplan
