#include "gpplan/gp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gpplan/errors.hpp"

namespace gpplan {

void GpHyperparams::validate() const {
  if (!(signal_variance >= 0.0)) throw ArgumentError("GpHyperparams: signal_variance must be >= 0");
  if (!(noise_variance > 0.0)) throw ArgumentError("GpHyperparams: noise_variance must be > 0");
  if (!(length_scale_x > 0.0 && length_scale_y > 0.0))
    throw ArgumentError("GpHyperparams: length scales must be > 0");
  if (!std::isfinite(prior_mean)) throw ArgumentError("GpHyperparams: prior_mean must be finite");
}

double kernel_eval(const GpHyperparams& hyper, const Location& a, const Location& b) {
  const double dx = (a.x - b.x) / hyper.length_scale_x;
  const double dy = (a.y - b.y) / hyper.length_scale_y;
  return hyper.signal_variance * std::exp(-0.5 * (dx * dx + dy * dy));
}

namespace {

Eigen::MatrixXd gamma_matrix(const std::vector<Location>& locs, const GpHyperparams& hyper) {
  const int m = static_cast<int>(locs.size());
  Eigen::MatrixXd g(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      g(i, j) = kernel_eval(hyper, locs[i], locs[j]);
      g(j, i) = g(i, j);
    }
    g(i, i) += hyper.noise_variance;
  }
  return g;
}

[[noreturn]] void throw_conditioning(const std::vector<Location>& locs, double estimate) {
  std::ostringstream os;
  os << "covariance factorization untrustworthy (condition estimate " << estimate
     << " exceeds " << History::kConditionLimit << "); locations:";
  for (const auto& l : locs) os << ' ' << l.index;
  throw ConditioningError(os.str());
}

}  // namespace

History History::from_observations(const std::vector<Location>& locations,
                                   const std::vector<double>& measurements,
                                   const GpHyperparams& hyper, bool refactor_on_extend) {
  if (locations.size() != measurements.size())
    throw ArgumentError("History::from_observations: size mismatch");
  hyper.validate();
  History h(refactor_on_extend);
  // build by repeated extension so the factor matches the incremental path
  for (std::size_t i = 0; i < locations.size(); ++i) {
    h = h.extended(locations[i], measurements[i], hyper);
  }
  return h;
}

History History::extended(const Location& s, double z, const GpHyperparams& hyper) const {
  if (!std::isfinite(z)) throw ArgumentError("History::extended: non-finite measurement");
  History out(*this);
  const int m = size();
  out.locs_.push_back(s);
  out.z_.push_back(z);

  if (refactor_on_extend_) {
    const Eigen::MatrixXd g = gamma_matrix(out.locs_, hyper);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw_conditioning(out.locs_, std::nan(""));
    out.chol_ = llt.matrixL();
    Eigen::VectorXd centered(m + 1);
    for (int i = 0; i <= m; ++i) centered[i] = out.z_[i] - hyper.prior_mean;
    out.white_ = out.chol_.triangularView<Eigen::Lower>().solve(centered);
  } else {
    // rank-1 append: new row a = L^{-1} k(hist, s), corner sqrt(kss + noise - |a|^2)
    Eigen::VectorXd cross(m);
    for (int i = 0; i < m; ++i) cross[i] = kernel_eval(hyper, locs_[i], s);
    const double kss = kernel_eval(hyper, s, s) + hyper.noise_variance;
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(m + 1, m + 1);
    grown.topLeftCorner(m, m) = chol_;
    double corner2 = kss;
    if (m > 0) {
      const Eigen::VectorXd a =
          chol_.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(cross);
      grown.block(m, 0, 1, m) = a.transpose();
      corner2 -= a.squaredNorm();
    }
    if (!(corner2 > 0.0)) throw_conditioning(out.locs_, std::numeric_limits<double>::infinity());
    const double corner = std::sqrt(corner2);
    grown(m, m) = corner;
    out.chol_ = std::move(grown);
    Eigen::VectorXd white(m + 1);
    white.head(m) = white_;
    double dot = 0.0;
    for (int i = 0; i < m; ++i) dot += out.chol_(m, i) * white[i];
    white[m] = (z - hyper.prior_mean - dot) / corner;
    out.white_ = std::move(white);
  }
  out.check_condition();
  return out;
}

void History::check_condition() const {
  const double est = condition_estimate();
  if (!(est <= kConditionLimit)) throw_conditioning(locs_, est);
}

double History::condition_estimate() const {
  const int m = size();
  if (m == 0) return 1.0;
  double dmin = chol_(0, 0), dmax = chol_(0, 0);
  for (int i = 1; i < m; ++i) {
    dmin = std::min(dmin, chol_(i, i));
    dmax = std::max(dmax, chol_(i, i));
  }
  const double r = dmax / dmin;
  return r * r;
}

Eigen::VectorXd History::solve_lower(const Location& s, const GpHyperparams& hyper) const {
  const int m = size();
  Eigen::VectorXd cross(m);
  for (int i = 0; i < m; ++i) cross[i] = kernel_eval(hyper, locs_[i], s);
  return chol_.triangularView<Eigen::Lower>().solve(cross);
}

Posterior History::posterior(const Location& s, const GpHyperparams& hyper) const {
  const double kss = kernel_eval(hyper, s, s) + hyper.noise_variance;
  if (empty()) return Posterior{hyper.prior_mean, kss};
  check_condition();
  const Eigen::VectorXd u = solve_lower(s, hyper);
  return Posterior{hyper.prior_mean + u.dot(white_), kss - u.squaredNorm()};
}

double History::alpha_norm(const Location& s, const GpHyperparams& hyper) const {
  if (empty()) return 0.0;
  check_condition();
  const Eigen::VectorXd u = solve_lower(s, hyper);
  // || Gamma^{-1} k(hist, s) || = || L^{-T} u ||
  return chol_.triangularView<Eigen::Lower>().transpose().solve(u).norm();
}

double History::factor_reconstruction_error(const GpHyperparams& hyper) const {
  if (empty()) return 0.0;
  const Eigen::MatrixXd g = gamma_matrix(locs_, hyper);
  const Eigen::MatrixXd lower = chol_.triangularView<Eigen::Lower>();
  return (lower * lower.transpose() - g).norm() / g.norm();
}

}  // namespace gpplan
