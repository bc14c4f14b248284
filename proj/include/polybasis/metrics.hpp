#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "polybasis/common.hpp"

namespace polybasis {

struct MetricsReport {
  double mse = 0.0;
  double r_squared = 0.0;
  double relative_l2 = 0.0;
  long n_samples = 0;
};

inline double mse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size() || y.size() < 1)
    throw invalid_config("mse: sequences must have equal nonzero length");
  return (y_hat - y).squaredNorm() / static_cast<double>(y.size());
}

inline double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size() || y.size() < 2)
    throw invalid_config("r_squared: need equal lengths >= 2");
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).matrix().squaredNorm();
  if (ss_tot == 0.0)
    throw invalid_config("r_squared: target variance is zero");
  const double ss_res = (y_hat - y).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

inline double relative_l2(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size() || y.size() < 1)
    throw invalid_config("relative_l2: sequences must have equal nonzero length");
  const double ny = y.norm();
  if (ny == 0.0)
    throw invalid_config("relative_l2: target norm is zero");
  return (y_hat - y).norm() / ny;
}

inline MetricsReport compute_metrics(const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& y_hat) {
  MetricsReport r;
  r.mse = mse(y, y_hat);
  r.r_squared = r_squared(y, y_hat);
  r.relative_l2 = relative_l2(y, y_hat);
  r.n_samples = static_cast<long>(y.size());
  return r;
}

}  // namespace polybasis
