#pragma once

#include <algorithm>
#include <cmath>
#ifdef __GLIBC__
#include <malloc.h>
#endif
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "polybasis/common.hpp"
#include "polybasis/network.hpp"

namespace polybasis {

enum class OptimizerKind { Adam, GradientDescent };

inline const char* to_string(OptimizerKind k) {
  return k == OptimizerKind::Adam ? "adam" : "gd";
}

struct TrainConfig {
  int epochs = 5000;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  // 0 = full batch.
  int batch_size = 0;
  // Sampling spec for callers that generate their own data.
  int n_samples = 2048;
  std::vector<std::pair<double, double>> domain = {{-1.0, 1.0}};
  std::uint64_t seed = 0;
  // Stop early once the epoch loss drops below this, if set.
  std::optional<double> convergence_threshold;
  // Step decay: multiply lr by decay_factor at these fractions of `epochs`.
  double decay_factor = 0.5;
  std::vector<double> decay_at = {0.60, 0.85};

  void validate() const {
    if (epochs < 0) throw invalid_config("epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw invalid_config("learning rate must be positive");
    if (n_samples < 2) throw invalid_config("need at least 2 samples");
    for (const auto& [lo, hi] : domain)
      if (!(lo < hi)) throw invalid_config("domain lower bound must be below upper");
  }
};

struct TrainResult {
  ParamSet params;
  std::vector<double> loss_history;  // one entry per epoch
};

namespace detail {

struct AdamState {
  ParamSet m, v;
  long t = 0;
  explicit AdamState(const Architecture& arch)
      : m(ParamSet::zeros(arch)), v(ParamSet::zeros(arch)) {}
};

inline void adam_step(ParamSet& params, const ParamSet& grads, AdamState& st,
                      double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++st.t;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto upd = [&](Eigen::MatrixXd& p, Eigen::MatrixXd& m, Eigen::MatrixXd& v,
                   const Eigen::MatrixXd& g) {
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v.array().matrix() + (1.0 - b2) * g.array().square().matrix();
      p.array() -= lr * (m.array() / bc1) /
                   ((v.array() / bc2).sqrt() + eps);
    };
    upd(params.layers[l].W, st.m.layers[l].W, st.v.layers[l].W, grads.layers[l].W);
    Eigen::MatrixXd pb = params.layers[l].b, mb = st.m.layers[l].b,
                    vb = st.v.layers[l].b, gb = grads.layers[l].b;
    upd(pb, mb, vb, gb);
    params.layers[l].b = pb;
    st.m.layers[l].b = mb;
    st.v.layers[l].b = vb;
  }
}

inline void gd_step(ParamSet& params, const ParamSet& grads, double lr) {
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    params.layers[l].W -= lr * grads.layers[l].W;
    params.layers[l].b -= lr * grads.layers[l].b;
  }
}

}  // namespace detail

/// Trains `params` against (X, Y) with MSE loss. Returns the parameters after
/// `config.epochs` optimizer steps and the per-epoch loss history.
inline TrainResult train(ParamSet params, const Architecture& arch,
                         const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                         const TrainConfig& config) {
  config.validate();
#ifdef __GLIBC__
  // The training loop allocates multi-megabyte temporaries every epoch; stop
  // glibc from serving those via mmap/munmap (kernel round-trip + page
  // zeroing each epoch) so freed blocks are reused from the heap.
  [[maybe_unused]] static const bool malloc_tuned = [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    return true;
  }();
#endif
  detail::check_forward_shapes(params, arch, X);
  if (X.rows() == 0) throw invalid_config("train: empty sample set");
  if (!X.allFinite() || !Y.allFinite())
    throw invalid_config("train: samples must be finite");

  TrainResult result;
  result.loss_history.reserve(config.epochs);

  detail::AdamState adam(arch);
  std::mt19937_64 rng(config.seed + 0x9e3779b97f4a7c15ull);
  const long n = X.rows();
  const int bs = config.batch_size > 0 ? std::min<long>(config.batch_size, n) : n;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double lr = config.learning_rate;
    for (double frac : config.decay_at)
      if (epoch >= static_cast<int>(frac * config.epochs)) lr *= config.decay_factor;

    double epoch_loss = 0.0;
    bool have_loss = false;
    if (bs == n) {
      ParamSet grads = gradient(params, arch, X, Y, &epoch_loss);
      have_loss = true;
      if (config.optimizer == OptimizerKind::Adam)
        detail::adam_step(params, grads, adam, lr);
      else
        detail::gd_step(params, grads, lr);
    } else {
      std::vector<long> idx(n);
      for (long i = 0; i < n; ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      for (long start = 0; start < n; start += bs) {
        const long m = std::min<long>(bs, n - start);
        Eigen::MatrixXd Xb(m, X.cols()), Yb(m, Y.cols());
        for (long i = 0; i < m; ++i) {
          Xb.row(i) = X.row(idx[start + i]);
          Yb.row(i) = Y.row(idx[start + i]);
        }
        ParamSet grads = gradient(params, arch, Xb, Yb);
        if (config.optimizer == OptimizerKind::Adam)
          detail::adam_step(params, grads, adam, lr);
        else
          detail::gd_step(params, grads, lr);
      }
    }

    // Full-batch mode reuses the gradient's forward pass: the recorded loss is
    // the epoch's pre-step loss. Mini-batch mode re-evaluates on the full set.
    const double loss = have_loss ? epoch_loss : mse_loss(params, arch, X, Y);
    if (!std::isfinite(loss))
      throw training_divergence(
          "training loss became non-finite at epoch " + std::to_string(epoch), epoch);
    result.loss_history.push_back(loss);
    if (config.convergence_threshold && loss < *config.convergence_threshold) break;
  }

  result.params = std::move(params);
  return result;
}

/// n uniform-random points in [a,b], reproducible from seed.
inline Eigen::MatrixXd sample_uniform_1d(int n, double a, double b,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(a, b);
  Eigen::MatrixXd X(n, 1);
  for (int i = 0; i < n; ++i) X(i, 0) = d(rng);
  return X;
}

/// side x side uniform grid over [a,b] x [c,d], row-major.
inline Eigen::MatrixXd sample_grid_2d(int side, double a, double b, double c,
                                      double d) {
  Eigen::MatrixXd X(static_cast<long>(side) * side, 2);
  for (int i = 0; i < side; ++i) {
    const double x1 = side == 1 ? a : a + (b - a) * i / (side - 1.0);
    for (int j = 0; j < side; ++j) {
      const double x2 = side == 1 ? c : c + (d - c) * j / (side - 1.0);
      X(static_cast<long>(i) * side + j, 0) = x1;
      X(static_cast<long>(i) * side + j, 1) = x2;
    }
  }
  return X;
}

/// n equally spaced points on [a,b] inclusive.
inline Eigen::MatrixXd linspace_1d(int n, double a, double b) {
  Eigen::MatrixXd X(n, 1);
  for (int i = 0; i < n; ++i)
    X(i, 0) = n == 1 ? a : a + (b - a) * i / (n - 1.0);
  return X;
}

}  // namespace polybasis
