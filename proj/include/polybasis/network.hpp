#pragma once

#include <vector>

#include <Eigen/Dense>

#include "polybasis/activation.hpp"
#include "polybasis/common.hpp"

namespace polybasis {

/// Dense feedforward architecture: widths[0] inputs, widths.back() outputs,
/// `activation` on every hidden layer, linear output layer.
struct Architecture {
  std::vector<int> widths;
  ActivationKind activation = ActivationKind::GELU;

  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }
  int n_layers() const { return static_cast<int>(widths.size()) - 1; }

  void validate() const {
    if (widths.size() < 2)
      throw invalid_config("architecture needs at least input and output widths");
    for (int w : widths)
      if (w < 1) throw invalid_config("architecture widths must be >= 1");
  }

  bool operator==(const Architecture&) const = default;
};

struct ParamSet {
  struct Layer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;  // out
  };
  std::vector<Layer> layers;

  static ParamSet zeros(const Architecture& arch) {
    arch.validate();
    ParamSet p;
    p.layers.reserve(arch.n_layers());
    for (int l = 0; l < arch.n_layers(); ++l)
      p.layers.push_back({Eigen::MatrixXd::Zero(arch.widths[l + 1], arch.widths[l]),
                          Eigen::VectorXd::Zero(arch.widths[l + 1])});
    return p;
  }

  long n_parameters() const {
    long n = 0;
    for (const auto& l : layers) n += l.W.size() + l.b.size();
    return n;
  }

  bool same_shape(const Architecture& arch) const {
    if (static_cast<int>(layers.size()) != arch.n_layers()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l)
      if (layers[l].W.rows() != arch.widths[l + 1] ||
          layers[l].W.cols() != arch.widths[l] ||
          layers[l].b.size() != arch.widths[l + 1])
        return false;
    return true;
  }

  bool all_finite() const {
    for (const auto& l : layers)
      if (!l.W.allFinite() || !l.b.allFinite()) return false;
    return true;
  }
};

namespace detail {
inline void check_forward_shapes(const ParamSet& params, const Architecture& arch,
                                 const Eigen::MatrixXd& X) {
  arch.validate();
  if (!params.same_shape(arch))
    throw invalid_config("parameter shapes do not match architecture");
  if (X.cols() != arch.input_width())
    throw invalid_config("input column count does not match input width");
}
}  // namespace detail

/// Forward pass. X is n_samples x input_width; returns n_samples x output_width.
inline Eigen::MatrixXd forward(const ParamSet& params, const Architecture& arch,
                               const Eigen::MatrixXd& X) {
  detail::check_forward_shapes(params, arch, X);
  Eigen::MatrixXd a = X;
  const int L = arch.n_layers();
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z =
        (a * params.layers[l].W.transpose()).rowwise() +
        params.layers[l].b.transpose();
    if (l + 1 < L) {
      Eigen::ArrayXXd za = z.array();
      activation_eval(arch.activation, za);
      a = za.matrix();
    } else {
      a = std::move(z);
    }
  }
  return a;
}

inline Eigen::VectorXd forward_scalar(const ParamSet& params,
                                      const Architecture& arch,
                                      const Eigen::MatrixXd& X) {
  return forward(params, arch, X).col(0);
}

/// Mean-squared-error loss over all output entries.
inline double mse_loss(const ParamSet& params, const Architecture& arch,
                       const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  return (forward(params, arch, X) - Y).squaredNorm() /
         static_cast<double>(Y.size());
}

/// Analytic gradient of the MSE loss, same shapes as ParamSet. If `loss_out`
/// is given, receives the MSE of the same forward pass the gradient used.
inline ParamSet gradient(const ParamSet& params, const Architecture& arch,
                         const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                         double* loss_out = nullptr) {
  detail::check_forward_shapes(params, arch, X);
  if (Y.rows() != X.rows() || Y.cols() != arch.output_width())
    throw invalid_config("target shape does not match network output");

  const int L = arch.n_layers();
  std::vector<Eigen::MatrixXd> activations(L + 1);  // post-activation per layer
  std::vector<Eigen::ArrayXXd> act_grads(L);        // phi'(z) per hidden layer
  activations[0] = X;
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z =
        (activations[l] * params.layers[l].W.transpose()).rowwise() +
        params.layers[l].b.transpose();
    if (l + 1 < L) {
      Eigen::ArrayXXd a;
      activation_eval_grad(arch.activation, z.array(), a, act_grads[l]);
      activations[l + 1] = a.matrix();
    } else {
      activations[l + 1] = std::move(z);
    }
  }

  ParamSet grads = ParamSet::zeros(arch);
  if (loss_out)
    *loss_out = (activations[L] - Y).squaredNorm() / static_cast<double>(Y.size());
  // dL/dyhat for L = (1/|Y|) * sum (yhat - y)^2
  Eigen::MatrixXd delta =
      2.0 / static_cast<double>(Y.size()) * (activations[L] - Y);
  for (int l = L - 1; l >= 0; --l) {
    grads.layers[l].W = delta.transpose() * activations[l];
    grads.layers[l].b = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd back = delta * params.layers[l].W;
      delta = back.array() * act_grads[l - 1];
    }
  }
  return grads;
}

}  // namespace polybasis
