#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "polybasis/common.hpp"

namespace polybasis {

enum class ActivationKind { ReLU, Sigmoid, Tanh, Mish, GELU, SELU, CELU };

// SELU constants from the self-normalizing-networks paper.
inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kCeluAlpha = 1.0;

inline const char* to_string(ActivationKind k) {
  switch (k) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Mish: return "mish";
    case ActivationKind::GELU: return "gelu";
    case ActivationKind::SELU: return "selu";
    case ActivationKind::CELU: return "celu";
  }
  return "?";
}

inline ActivationKind activation_from_string(const std::string& s) {
  if (s == "relu") return ActivationKind::ReLU;
  if (s == "sigmoid") return ActivationKind::Sigmoid;
  if (s == "tanh") return ActivationKind::Tanh;
  if (s == "mish") return ActivationKind::Mish;
  if (s == "gelu") return ActivationKind::GELU;
  if (s == "selu") return ActivationKind::SELU;
  if (s == "celu") return ActivationKind::CELU;
  throw invalid_config("unknown activation: " + s +
                       " (expected one of relu, sigmoid, tanh, mish, gelu, selu, celu)");
}

constexpr int kActivationCount = 7;

inline constexpr ActivationKind kAllActivations[kActivationCount] = {
    ActivationKind::ReLU, ActivationKind::Sigmoid, ActivationKind::Tanh,
    ActivationKind::Mish, ActivationKind::GELU,    ActivationKind::SELU,
    ActivationKind::CELU};

namespace detail {

// Numerically stable logistic; never overflows for finite x.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow for large x.
inline double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

inline double gelu_inner(double x) {
  // sqrt(2/pi) * (x + 0.044715 x^3)
  constexpr double c = 0.7978845608028654;
  return c * (x + 0.044715 * x * x * x);
}

}  // namespace detail

inline double activation_eval(ActivationKind kind, double x) {
  using namespace detail;
  switch (kind) {
    case ActivationKind::ReLU:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::Sigmoid:
      return sigmoid(x);
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::Mish:
      return x * std::tanh(softplus(x));
    case ActivationKind::GELU:
      return 0.5 * x * (1.0 + std::tanh(gelu_inner(x)));
    case ActivationKind::SELU:
      return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x);
    case ActivationKind::CELU:
      return (x > 0.0 ? x : 0.0) +
             std::min(0.0, kCeluAlpha * std::expm1(x / kCeluAlpha));
  }
  return 0.0;
}

inline double activation_grad(ActivationKind kind, double x) {
  using namespace detail;
  switch (kind) {
    case ActivationKind::ReLU:
      return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Mish: {
      const double sp = softplus(x);
      const double t = std::tanh(sp);
      return t + x * (1.0 - t * t) * sigmoid(x);
    }
    case ActivationKind::GELU: {
      const double u = gelu_inner(x);
      const double t = std::tanh(u);
      constexpr double c = 0.7978845608028654;
      const double du = c * (1.0 + 3.0 * 0.044715 * x * x);
      return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
    }
    case ActivationKind::SELU:
      return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
    case ActivationKind::CELU:
      return x > 0.0 ? 1.0 : std::exp(x / kCeluAlpha);
  }
  return 0.0;
}

namespace detail {

// Batch tanh built on Eigen's vectorized exp (std::tanh stays scalar for
// doubles). Series fallback below 1e-4 avoids cancellation in (e-1)/(e+1);
// its truncation error there is < 1e-12 relative.
inline Eigen::ArrayXXd tanh_arr(const Eigen::ArrayXXd& x) {
  const Eigen::ArrayXXd e = (2.0 * x.min(350.0).max(-350.0)).exp();
  return (x.abs() < 1e-4)
      .select(x * (1.0 - x.square() / 3.0), (e - 1.0) / (e + 1.0));
}

inline Eigen::ArrayXXd sigmoid_arr(const Eigen::ArrayXXd& x) {
  return 0.5 * (1.0 + tanh_arr(0.5 * x));
}

inline Eigen::ArrayXXd softplus_arr(const Eigen::ArrayXXd& x) {
  return x.max(0.0) + (1.0 + (-x.abs()).exp()).log();
}

inline Eigen::ArrayXXd gelu_inner_arr(const Eigen::ArrayXXd& x) {
  constexpr double c = 0.7978845608028654;
  return c * (x + 0.044715 * x.cube());
}

}  // namespace detail

inline void activation_eval(ActivationKind kind, Eigen::ArrayXXd& z) {
  using namespace detail;
  switch (kind) {
    case ActivationKind::ReLU:
      z = z.max(0.0);
      return;
    case ActivationKind::Sigmoid:
      z = sigmoid_arr(z);
      return;
    case ActivationKind::Tanh:
      z = tanh_arr(z);
      return;
    case ActivationKind::Mish:
      z *= tanh_arr(softplus_arr(z));
      return;
    case ActivationKind::GELU:
      z = 0.5 * z * (1.0 + tanh_arr(gelu_inner_arr(z)));
      return;
    case ActivationKind::SELU:
      z = (z > 0.0).select(kSeluLambda * z,
                           kSeluLambda * kSeluAlpha * (z.min(0.0).exp() - 1.0));
      return;
    case ActivationKind::CELU:
      z = (z > 0.0).select(
          z, kCeluAlpha * ((z.min(0.0) / kCeluAlpha).exp() - 1.0));
      return;
  }
}

inline Eigen::ArrayXXd activation_grad(ActivationKind kind,
                                       const Eigen::ArrayXXd& z) {
  using namespace detail;
  switch (kind) {
    case ActivationKind::ReLU:
      return (z > 0.0).cast<double>();
    case ActivationKind::Sigmoid: {
      const Eigen::ArrayXXd s = sigmoid_arr(z);
      return s * (1.0 - s);
    }
    case ActivationKind::Tanh:
      return 1.0 - tanh_arr(z).square();
    case ActivationKind::Mish: {
      const Eigen::ArrayXXd t = tanh_arr(softplus_arr(z));
      return t + z * (1.0 - t.square()) * sigmoid_arr(z);
    }
    case ActivationKind::GELU: {
      const Eigen::ArrayXXd t = tanh_arr(gelu_inner_arr(z));
      constexpr double c = 0.7978845608028654;
      const Eigen::ArrayXXd du = c * (1.0 + 3.0 * 0.044715 * z.square());
      return 0.5 * (1.0 + t) + 0.5 * z * (1.0 - t.square()) * du;
    }
    case ActivationKind::SELU:
      return (z > 0.0).select(
          Eigen::ArrayXXd::Constant(z.rows(), z.cols(), kSeluLambda),
          kSeluLambda * kSeluAlpha * z.min(0.0).exp());
    case ActivationKind::CELU:
      return (z > 0.0).select(Eigen::ArrayXXd::Ones(z.rows(), z.cols()),
                              (z.min(0.0) / kCeluAlpha).exp());
  }
  return z;
}

/// Computes activation value `a` and derivative `g` together, sharing the
/// expensive transcendental subexpressions (one exp chain instead of two).
inline void activation_eval_grad(ActivationKind kind, const Eigen::ArrayXXd& z,
                                 Eigen::ArrayXXd& a, Eigen::ArrayXXd& g) {
  using namespace detail;
  switch (kind) {
    case ActivationKind::ReLU:
      a = z.max(0.0);
      g = (z > 0.0).cast<double>();
      return;
    case ActivationKind::Sigmoid:
      a = sigmoid_arr(z);
      g = a * (1.0 - a);
      return;
    case ActivationKind::Tanh:
      a = tanh_arr(z);
      g = 1.0 - a.square();
      return;
    case ActivationKind::Mish: {
      const Eigen::ArrayXXd t = tanh_arr(softplus_arr(z));
      a = z * t;
      g = t + z * (1.0 - t.square()) * sigmoid_arr(z);
      return;
    }
    case ActivationKind::GELU: {
      const Eigen::ArrayXXd t = tanh_arr(gelu_inner_arr(z));
      constexpr double c = 0.7978845608028654;
      a = 0.5 * z * (1.0 + t);
      g = 0.5 * (1.0 + t) +
          0.5 * z * (1.0 - t.square()) * (c * (1.0 + 3.0 * 0.044715 * z.square()));
      return;
    }
    case ActivationKind::SELU: {
      const Eigen::ArrayXXd e = z.min(0.0).exp();
      a = (z > 0.0).select(kSeluLambda * z, kSeluLambda * kSeluAlpha * (e - 1.0));
      g = (z > 0.0).select(
          Eigen::ArrayXXd::Constant(z.rows(), z.cols(), kSeluLambda),
          kSeluLambda * kSeluAlpha * e);
      return;
    }
    case ActivationKind::CELU: {
      const Eigen::ArrayXXd e = (z.min(0.0) / kCeluAlpha).exp();
      a = (z > 0.0).select(z, kCeluAlpha * (e - 1.0));
      g = (z > 0.0).select(Eigen::ArrayXXd::Ones(z.rows(), z.cols()), e);
      return;
    }
  }
}

}  // namespace polybasis
