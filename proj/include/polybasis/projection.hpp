#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "polybasis/basis.hpp"
#include "polybasis/domain_map.hpp"
#include "polybasis/metrics.hpp"
#include "polybasis/train.hpp"

namespace polybasis {

using TargetFn = std::function<double(const Eigen::RowVectorXd&)>;

struct DegreeSet {
  int dimension = 1;
  std::vector<std::array<int, 2>> exponents;

  static DegreeSet graded(int dimension, int K) {
    return DegreeSet{dimension, graded_exponents(dimension, K)};
  }

  int max_total_degree() const {
    int m = 0;
    for (const auto& e : exponents) m = std::max(m, e[0] + e[1]);
    return m;
  }

  std::size_t size() const { return exponents.size(); }
};

enum class BasisSource { Network, Oracle };

inline const char* to_string(BasisSource s) {
  return s == BasisSource::Network ? "network" : "oracle";
}

inline BasisSource basis_source_from_string(const std::string& s) {
  if (s == "network") return BasisSource::Network;
  if (s == "oracle") return BasisSource::Oracle;
  throw invalid_config("unknown basis source: " + s);
}

struct DesignMatrix {
  Eigen::MatrixXd phi;     // n_samples x n_basis
  Eigen::MatrixXd points;  // n_samples x d
  DegreeSet degrees;
  MappingMode mode = MappingMode::Pointwise;
  BasisSource source = BasisSource::Network;
};

/// Per column: forward_map -> basis evaluation (network or exact monomial) ->
/// unmap_basis_value with the shared per-point exponent.
inline DesignMatrix build_design_matrix(const BasisLibrary* lib,
                                        const DegreeSet& degrees,
                                        const Eigen::MatrixXd& points,
                                        MappingMode mode,
                                        BasisSource source) {
  if (degrees.exponents.empty()) throw invalid_config("empty degree set");
  if (points.cols() != degrees.dimension)
    throw invalid_config("point dimension does not match degree set");
  if (source == BasisSource::Network && lib == nullptr)
    throw invalid_config("network basis source requires a library");
  if (lib != nullptr && source == BasisSource::Network) {
    for (const auto& e : degrees.exponents) lib->at(e);  // throws if missing
  }

  const auto mapped = map_domain(points, mode);
  const long n = points.rows();
  Eigen::MatrixXd X_hat(n, points.cols());
  for (long i = 0; i < n; ++i) X_hat.row(i) = mapped[i].x_hat;

  DesignMatrix dm;
  dm.phi.resize(n, static_cast<long>(degrees.size()));
  dm.points = points;
  dm.degrees = degrees;
  dm.mode = mode;
  dm.source = source;

  for (std::size_t c = 0; c < degrees.size(); ++c) {
    const auto& exps = degrees.exponents[c];
    const int deg = exps[0] + exps[1];
    Eigen::VectorXd phi_hat(n);
    if (source == BasisSource::Network) {
      phi_hat = eval_basis(*lib, exps, X_hat);
    } else {
      BasisSpec spec{degrees.dimension, exps};
      for (long i = 0; i < n; ++i) phi_hat[i] = spec.eval_exact(X_hat.row(i));
    }
    for (long i = 0; i < n; ++i) {
      const double v = phi_hat[i] * std::pow(10.0, static_cast<double>(deg) *
                                                       mapped[i].s);
      if (!std::isfinite(v))
        throw std::range_error(
            "design matrix overflow at point row " + std::to_string(i) +
            ", exponents (" + std::to_string(exps[0]) + "," +
            std::to_string(exps[1]) + ")");
      dm.phi(i, static_cast<long>(c)) = v;
    }
  }
  return dm;
}

struct LsSolution {
  Eigen::VectorXd alpha;
  double residual_norm = 0.0;
  double condition_estimate = 0.0;
  long rank = 0;
  bool rank_warning = false;
};

/// Pivoted-QR least squares. Columns whose pivot falls below
/// rcond * |largest pivot| are dropped (zero coefficient) with a rank warning.
inline LsSolution solve_coefficients(const DesignMatrix& design,
                                     const Eigen::VectorXd& y,
                                     double rcond = 1e-12) {
  const Eigen::MatrixXd& A = design.phi;
  if (y.size() != A.rows())
    throw invalid_config("target length does not match design matrix rows");
  if (A.rows() < A.cols())
    throw invalid_config("need at least as many samples as basis functions");
  if (!A.allFinite() || !y.allFinite())
    throw invalid_config("non-finite entries in least-squares system");

  // Equilibrate columns to unit norm first: unmapped basis columns differ by
  // factors of 10^(k*s), and without scaling the pivot threshold reads that
  // disparity as rank deficiency (dropping, e.g., the constant column).
  Eigen::VectorXd scale = A.colwise().norm();
  for (long j = 0; j < scale.size(); ++j)
    if (scale[j] <= 0.0) scale[j] = 1.0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A * scale.cwiseInverse().asDiagonal());
  qr.setThreshold(rcond);

  LsSolution sol;
  sol.rank = qr.rank();
  sol.rank_warning = sol.rank < A.cols();
  // Solve over the `rank` pivot columns only, so dropped columns always carry
  // exact zeros (qr.solve may spread weight onto non-pivot columns).
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(A.cols());
  if (sol.rank > 0) {
    const Eigen::VectorXd qty = qr.householderQ().transpose() * y;
    const Eigen::VectorXd z = qr.matrixR()
                                  .topLeftCorner(sol.rank, sol.rank)
                                  .triangularView<Eigen::Upper>()
                                  .solve(qty.head(sol.rank));
    const auto& perm = qr.colsPermutation().indices();
    for (long i = 0; i < sol.rank; ++i) beta[perm[i]] = z[i];
  }
  sol.alpha = beta.cwiseQuotient(scale);
  sol.residual_norm = (A * sol.alpha - y).norm();

  const auto& R = qr.matrixR();
  const double max_piv = std::abs(R(0, 0));
  const double min_piv =
      sol.rank > 0 ? std::abs(R(sol.rank - 1, sol.rank - 1)) : 0.0;
  sol.condition_estimate =
      min_piv > 0.0 ? max_piv / min_piv : std::numeric_limits<double>::infinity();
  return sol;
}

struct FitConfig {
  int n_samples_1d = 1000;
  int grid_side_2d = 50;
  std::uint64_t seed = 0;
  MappingMode mode = MappingMode::Pointwise;
  BasisSource source = BasisSource::Network;
};

struct FitModel {
  DegreeSet degrees;
  Eigen::VectorXd alpha;
  MappingMode mode = MappingMode::Pointwise;
  BasisSource source = BasisSource::Network;
  std::uint64_t library_digest = 0;
  std::vector<std::pair<double, double>> domain;
  MetricsReport train_metrics;
  double condition_estimate = 0.0;
  bool ill_conditioned = false;  // condition estimate > 1e12
  bool rank_warning = false;
};

inline Eigen::VectorXd sample_target(const TargetFn& f, const Eigen::MatrixXd& X) {
  Eigen::VectorXd y(X.rows());
  for (long i = 0; i < X.rows(); ++i) y[i] = f(X.row(i));
  return y;
}

inline Eigen::MatrixXd fit_sample_points(
    int dimension, const std::vector<std::pair<double, double>>& domain,
    const FitConfig& config) {
  if (static_cast<int>(domain.size()) != dimension)
    throw invalid_config("domain rank does not match dimension");
  if (dimension == 1)
    return sample_uniform_1d(config.n_samples_1d, domain[0].first,
                             domain[0].second, config.seed);
  return sample_grid_2d(config.grid_side_2d, domain[0].first, domain[0].second,
                        domain[1].first, domain[1].second);
}

/// Least-squares projection of `f` onto the mapped basis up to degree K.
inline FitModel fit(const BasisLibrary* lib, int K, const TargetFn& f,
                    int dimension,
                    const std::vector<std::pair<double, double>>& domain,
                    const FitConfig& config = {}) {
  if (lib != nullptr && K > lib->max_degree)
    throw invalid_config("requested degree K=" + std::to_string(K) +
                         " exceeds library max degree M=" +
                         std::to_string(lib->max_degree));
  const DegreeSet degrees = DegreeSet::graded(dimension, K);
  const Eigen::MatrixXd X = fit_sample_points(dimension, domain, config);
  const Eigen::VectorXd y = sample_target(f, X);

  DesignMatrix dm = build_design_matrix(lib, degrees, X, config.mode, config.source);
  LsSolution sol = solve_coefficients(dm, y);

  FitModel model;
  model.degrees = degrees;
  model.alpha = sol.alpha;
  model.mode = config.mode;
  model.source = config.source;
  model.library_digest = lib ? lib->digest() : 0;
  model.domain = domain;
  model.train_metrics = compute_metrics(y, dm.phi * sol.alpha);
  model.condition_estimate = sol.condition_estimate;
  model.ill_conditioned = sol.condition_estimate > 1e12;
  model.rank_warning = sol.rank_warning;
  return model;
}

/// Evaluates Pf at arbitrary points (inside the fit domain or beyond).
inline Eigen::VectorXd predict(const FitModel& model, const BasisLibrary* lib,
                               const Eigen::MatrixXd& X) {
  if (model.source == BasisSource::Network) {
    if (lib == nullptr)
      throw invalid_config("predict: model uses network basis but no library given");
    if (lib->digest() != model.library_digest)
      throw invalid_config("predict: library does not match the model's library digest");
  }
  DesignMatrix dm =
      build_design_matrix(lib, model.degrees, X, model.mode, model.source);
  return dm.phi * model.alpha;
}

/// Held-out evaluation on a declared grid.
inline MetricsReport evaluate_fit(const FitModel& model, const BasisLibrary* lib,
                                  const TargetFn& f,
                                  const std::vector<std::pair<double, double>>& domain,
                                  int grid_n) {
  if (grid_n < 2) throw invalid_config("evaluate_fit: degenerate grid");
  Eigen::MatrixXd X;
  if (domain.size() == 1) {
    X = linspace_1d(grid_n, domain[0].first, domain[0].second);
  } else if (domain.size() == 2) {
    X = sample_grid_2d(grid_n, domain[0].first, domain[0].second,
                       domain[1].first, domain[1].second);
  } else {
    throw invalid_config("evaluate_fit: domain rank must be 1 or 2");
  }
  return compute_metrics(sample_target(f, X), predict(model, lib, X));
}

}  // namespace polybasis
