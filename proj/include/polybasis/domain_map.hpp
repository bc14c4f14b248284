#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polybasis/common.hpp"

namespace polybasis {

/// A point together with its decimal scaling: x_hat = x / 10^s.
struct MappedSample {
  double x = 0.0;
  int s = 0;
  double x_hat = 0.0;
};

enum class MappingMode { Pointwise, Uniform };

inline const char* to_string(MappingMode m) {
  return m == MappingMode::Pointwise ? "pointwise" : "uniform";
}

inline MappingMode mapping_mode_from_string(const std::string& s) {
  if (s == "pointwise") return MappingMode::Pointwise;
  if (s == "uniform") return MappingMode::Uniform;
  throw invalid_config("unknown mapping mode: " + s);
}

/// Scaling exponent s = ceil(log10(floor(|x|+1))), evaluated exactly with
/// integer digit counting. floor(|x|+1) >= 1 for all finite x.
inline int scale_exponent(double x) {
  if (!std::isfinite(x)) throw invalid_config("scale_exponent: non-finite input");
  const double m = std::floor(std::abs(x) + 1.0);
  // m is an integral double; s is the smallest integer with 10^s >= m.
  int s = 0;
  double p = 1.0;
  while (p < m) {
    p *= 10.0;
    ++s;
  }
  return s;
}

inline MappedSample forward_map(double x) {
  const int s = scale_exponent(x);
  return {x, s, x / std::pow(10.0, s)};
}

inline double inverse_map(double x_hat, int s) {
  if (!std::isfinite(x_hat)) throw invalid_config("inverse_map: non-finite input");
  if (s < 0) throw invalid_config("inverse_map: s must be >= 0");
  return x_hat * std::pow(10.0, s);
}

/// Recovers a degree-k monomial value on the original domain:
/// phi(x) = 10^(k*s) * phi_hat(x_hat).
inline double unmap_basis_value(double phi_hat_value, int total_degree, int s) {
  if (total_degree < 0 || s < 0)
    throw invalid_config("unmap_basis_value: degree and s must be >= 0");
  const double v = phi_hat_value *
                   std::pow(10.0, static_cast<double>(total_degree) * s);
  if (!std::isfinite(v))
    throw std::range_error("unmap_basis_value: overflow at degree " +
                           std::to_string(total_degree) + ", s " + std::to_string(s));
  return v;
}

/// Maps a batch of d-dimensional points. Pointwise: s per point (per point the
/// max over coordinates, so the monomial recovery 10^((i+j)s) holds). Uniform:
/// one shared s = max over all points.
/// Returns, per point: shared exponent s and the scaled coordinates.
struct MappedPoint {
  int s = 0;
  Eigen::RowVectorXd x_hat;
};

inline std::vector<MappedPoint> map_domain(const Eigen::MatrixXd& points,
                                           MappingMode mode) {
  if (points.rows() == 0) throw invalid_config("map_domain: empty point set");
  if (!points.allFinite()) throw invalid_config("map_domain: non-finite points");

  std::vector<int> s_point(points.rows(), 0);
  int s_max = 0;
  for (long i = 0; i < points.rows(); ++i) {
    int s = 0;
    for (long j = 0; j < points.cols(); ++j)
      s = std::max(s, scale_exponent(points(i, j)));
    s_point[i] = s;
    s_max = std::max(s_max, s);
  }

  std::vector<MappedPoint> out(points.rows());
  for (long i = 0; i < points.rows(); ++i) {
    const int s = mode == MappingMode::Pointwise ? s_point[i] : s_max;
    out[i].s = s;
    out[i].x_hat = points.row(i) / std::pow(10.0, s);
  }
  return out;
}

/// Per-coordinate variant: independent exponents (s1, ..., sd) per point, with
/// recovery factor 10^(i*s1 + j*s2) handled by the caller.
struct MappedPointPerCoord {
  Eigen::RowVectorXi s;
  Eigen::RowVectorXd x_hat;
};

inline std::vector<MappedPointPerCoord> map_domain_per_coordinate(
    const Eigen::MatrixXd& points) {
  if (points.rows() == 0) throw invalid_config("map_domain: empty point set");
  if (!points.allFinite()) throw invalid_config("map_domain: non-finite points");
  std::vector<MappedPointPerCoord> out(points.rows());
  for (long i = 0; i < points.rows(); ++i) {
    out[i].s.resize(points.cols());
    out[i].x_hat.resize(points.cols());
    for (long j = 0; j < points.cols(); ++j) {
      const int s = scale_exponent(points(i, j));
      out[i].s[j] = s;
      out[i].x_hat[j] = points(i, j) / std::pow(10.0, s);
    }
  }
  return out;
}

}  // namespace polybasis
