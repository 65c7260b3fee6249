#pragma once

#include <cstdint>
#include <vector>

namespace gpplan {

// Standard normal CDF, accurate to ~1e-15 via erfc. Single shared
// implementation: every CDF evaluation in the library funnels through here.
double normal_cdf(double x);

// Standard normal density.
double normal_pdf(double x);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss–Hermite rule for weight exp(-x^2) on (-inf, inf).
// sum_i w_i f(x_i) ~ integral f(x) exp(-x^2) dx. Computed by Newton iteration
// on the orthonormal Hermite recurrence (overflow-free at large n).
QuadratureRule gauss_hermite(int n);

// Gauss–Legendre rule on [-1, 1]; affine-map helpers below rescale it.
QuadratureRule gauss_legendre(int n);

// Gauss–Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

// Deterministic stream of standard normal draws. Box–Muller over an
// explicitly specified 64-bit generator, so the sequence for a given seed is
// reproducible across platforms and standard library versions.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed);
  double next();

 private:
  double uniform();  // in (0, 1)
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gpplan
