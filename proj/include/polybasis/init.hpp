#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "polybasis/common.hpp"
#include "polybasis/network.hpp"

namespace polybasis {

enum class InitKind { Uniform, Xavier, Kaiming };

inline const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::Uniform: return "uniform";
    case InitKind::Xavier: return "xavier";
    case InitKind::Kaiming: return "kaiming";
  }
  return "?";
}

inline InitKind init_kind_from_string(const std::string& s) {
  if (s == "uniform") return InitKind::Uniform;
  if (s == "xavier") return InitKind::Xavier;
  if (s == "kaiming") return InitKind::Kaiming;
  throw invalid_config("unknown init strategy: " + s);
}

struct InitStrategy {
  InitKind kind = InitKind::Kaiming;
  double gain = 1.0;
  std::uint64_t seed = 0;
};

/// Weight initialization; biases are always zero.
///   Uniform: W ~ U(-gain, gain)
///   Xavier:  W ~ U(-gain*sqrt(6/(fan_in+fan_out)), +...)
///   Kaiming: W ~ N(0, gain^2 * 2/fan_in)
inline ParamSet init_params(const Architecture& arch, const InitStrategy& strategy) {
  arch.validate();
  if (!(strategy.gain > 0.0)) throw invalid_config("init gain must be positive");

  std::mt19937_64 rng(strategy.seed);
  ParamSet p = ParamSet::zeros(arch);
  for (int l = 0; l < arch.n_layers(); ++l) {
    const int fan_in = arch.widths[l];
    const int fan_out = arch.widths[l + 1];
    auto& W = p.layers[l].W;
    switch (strategy.kind) {
      case InitKind::Uniform: {
        std::uniform_real_distribution<double> d(-strategy.gain, strategy.gain);
        for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = d(rng);
        break;
      }
      case InitKind::Xavier: {
        const double bound =
            strategy.gain * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> d(-bound, bound);
        for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = d(rng);
        break;
      }
      case InitKind::Kaiming: {
        const double sd = strategy.gain * std::sqrt(2.0 / static_cast<double>(fan_in));
        std::normal_distribution<double> d(0.0, sd);
        for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = d(rng);
        break;
      }
    }
  }
  return p;
}

}  // namespace polybasis
