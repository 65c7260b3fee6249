#include "gpplan/math.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "gpplan/errors.hpp"

namespace gpplan {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

namespace {

QuadratureRule compute_gauss_hermite(int n) {
  if (n < 1) throw ArgumentError("gauss_hermite: node count must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}, normalizes p0
  const int m = (n + 1) / 2;               // roots come in +/- pairs
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    // asymptotic initial guesses, largest root first
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // orthonormal recurrence: values stay O(1) even for n in the hundreds
      double p1 = pim4;
      double p2 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (k + 1)) * p2 - std::sqrt(static_cast<double>(k) / (k + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) break;
      if (iter == 99) throw NumericError("gauss_hermite: Newton iteration failed to converge");
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;  // center root is exact
  // return ascending
  for (int i = 0; i < n / 2; ++i) std::swap(rule.nodes[i], rule.nodes[n - 1 - i]);
  for (int i = 0; i < n / 2; ++i) std::swap(rule.weights[i], rule.weights[n - 1 - i]);
  return rule;
}

QuadratureRule compute_gauss_legendre(int n) {
  if (n < 1) throw ArgumentError("gauss_legendre: node count must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * k + 1.0) * z * p2 - k * p3) / (k + 1);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15) break;
      if (iter == 99) throw NumericError("gauss_legendre: Newton iteration failed to converge");
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

// Rule derivation costs O(n^2); planners request the same sizes thousands of
// times per search, so completed rules are memoized.
const QuadratureRule& cached(std::unordered_map<int, QuadratureRule>& cache, int n,
                             QuadratureRule (*compute)(int)) {
  static std::mutex mutex;
  std::scoped_lock lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute(n)).first;
  return it->second;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  static std::unordered_map<int, QuadratureRule> cache;
  return cached(cache, n, compute_gauss_hermite);
}

QuadratureRule gauss_legendre(int n) {
  static std::unordered_map<int, QuadratureRule> cache;
  return cached(cache, n, compute_gauss_legendre);
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

GaussianStream::GaussianStream(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& w : state_) w = splitmix64(s);
}

double GaussianStream::uniform() {
  // xoshiro256++
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  // 53 leading bits -> double in [2^-53, 1 - 2^-53]; never exactly 0
  return (static_cast<double>(result >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace gpplan
