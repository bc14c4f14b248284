#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polybasis/common.hpp"
#include "polybasis/init.hpp"
#include "polybasis/train.hpp"

namespace polybasis {

/// Exponents of one monomial basis function on the reference domain [-1,1]^d.
/// 1D uses {k, 0}.
struct BasisSpec {
  int dimension = 1;
  std::array<int, 2> exponents = {0, 0};

  int total_degree() const { return exponents[0] + exponents[1]; }

  void validate() const {
    if (dimension != 1 && dimension != 2)
      throw invalid_config("basis dimension must be 1 or 2");
    if (exponents[0] < 0 || exponents[1] < 0)
      throw invalid_config("basis exponents must be nonnegative");
    if (dimension == 1 && exponents[1] != 0)
      throw invalid_config("1D basis spec must have second exponent 0");
  }

  std::string label() const {
    if (dimension == 1) return "x^" + std::to_string(exponents[0]);
    return "x1^" + std::to_string(exponents[0]) + " x2^" +
           std::to_string(exponents[1]);
  }

  /// Exact monomial value at a reference-domain point.
  double eval_exact(const Eigen::RowVectorXd& x_hat) const {
    double v = std::pow(x_hat[0], exponents[0]);
    if (dimension == 2) v *= std::pow(x_hat[1], exponents[1]);
    return v;
  }

  auto operator<=>(const BasisSpec&) const = default;
};

enum class InitProvenance { Random, Inherited };

inline const char* to_string(InitProvenance p) {
  return p == InitProvenance::Random ? "random" : "inherited";
}

struct BasisNet {
  BasisSpec spec;
  Architecture arch;
  ParamSet params;
  // Parameters as left by gradient training, before the least-squares output
  // polish. Warm starts chain from these: the polished readout can be large
  // and destabilizes a fresh optimizer. Not serialized; empty after load.
  ParamSet raw_params;
  double final_mse = 0.0;
  int epochs_used = 0;
  std::uint64_t seed = 0;
  InitProvenance provenance = InitProvenance::Random;
  // Valid when provenance == Inherited.
  std::array<int, 2> inherited_from = {0, 0};
};

/// Default basis-net architecture: [d, 1024, 1], GELU.
inline Architecture default_basis_arch(int dimension, int hidden = 1024) {
  return Architecture{{dimension, hidden, 1}, ActivationKind::GELU};
}

/// Graded lexicographic enumeration of exponent tuples: 1D -> 0..M,
/// 2D -> (0,0),(0,1),(1,0),(0,2),(1,1),(2,0),...
inline std::vector<std::array<int, 2>> graded_exponents(int dimension, int M) {
  if (M < 0) throw invalid_config("max degree must be >= 0");
  std::vector<std::array<int, 2>> out;
  if (dimension == 1) {
    for (int k = 0; k <= M; ++k) out.push_back({k, 0});
  } else if (dimension == 2) {
    for (int deg = 0; deg <= M; ++deg)
      for (int i = 0; i <= deg; ++i) out.push_back({i, deg - i});
  } else {
    throw invalid_config("dimension must be 1 or 2");
  }
  return out;
}

struct BasisLibrary {
  int dimension = 1;
  int max_degree = 0;
  Architecture arch;
  std::map<std::array<int, 2>, BasisNet> nets;
  std::uint32_t format_version = 1;
  std::uint64_t config_digest = 0;
  std::uint64_t created_at = 0;  // unix seconds; 0 for reproducible builds

  const BasisNet& at(const std::array<int, 2>& exps) const {
    auto it = nets.find(exps);
    if (it == nets.end())
      throw invalid_config("basis library has no net for exponents (" +
                           std::to_string(exps[0]) + "," +
                           std::to_string(exps[1]) + ")");
    return it->second;
  }

  std::uint64_t digest() const {
    std::ostringstream os;
    os << dimension << '|' << max_degree << '|' << to_string(arch.activation);
    for (int w : arch.widths) os << ',' << w;
    os << '|' << config_digest << '|' << nets.size();
    return fnv1a(os.str());
  }
};

inline std::uint64_t train_config_digest(const TrainConfig& c) {
  std::ostringstream os;
  os << c.epochs << '|' << c.learning_rate << '|' << to_string(c.optimizer) << '|'
     << c.batch_size << '|' << c.n_samples << '|' << c.seed;
  for (const auto& [lo, hi] : c.domain) os << '|' << lo << ',' << hi;
  return fnv1a(os.str());
}

namespace detail {

/// Training samples for one basis spec: uniform random in 1D, uniform grid in 2D.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> basis_samples(
    const BasisSpec& spec, const TrainConfig& config) {
  Eigen::MatrixXd X;
  if (spec.dimension == 1) {
    X = sample_uniform_1d(config.n_samples, -1.0, 1.0, config.seed);
  } else {
    const int side = std::max(2, static_cast<int>(std::lround(
                                     std::sqrt(static_cast<double>(config.n_samples)))));
    X = sample_grid_2d(side, -1.0, 1.0, -1.0, 1.0);
  }
  Eigen::MatrixXd Y(X.rows(), 1);
  for (long i = 0; i < X.rows(); ++i) Y(i, 0) = spec.eval_exact(X.row(i));
  return {X, Y};
}

/// Replaces the linear output layer with its closed-form least-squares
/// optimum on (X, Y), holding the hidden layers fixed. The output layer is
/// linear in its parameters, so this is exact (rank-revealing QR) and
/// deterministic; it is idempotent on an already-polished net.
inline void polish_output_layer(ParamSet& params, const Architecture& arch,
                                const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Y) {
  detail::check_forward_shapes(params, arch, X);
  const int L = arch.n_layers();
  Eigen::MatrixXd h = X;
  for (int l = 0; l < L - 1; ++l) {
    Eigen::MatrixXd z = (h * params.layers[l].W.transpose()).rowwise() +
                        params.layers[l].b.transpose();
    Eigen::ArrayXXd za = z.array();
    activation_eval(arch.activation, za);
    h = za.matrix();
  }
  Eigen::MatrixXd A(h.rows(), h.cols() + 1);
  A << h, Eigen::VectorXd::Ones(h.rows());
  const Eigen::MatrixXd sol = A.colPivHouseholderQr().solve(Y);
  params.layers[L - 1].W = sol.topRows(h.cols()).transpose();
  params.layers[L - 1].b = sol.bottomRows(1).transpose();
}

}  // namespace detail

/// Trains one basis net against its exact monomial on [-1,1]^d.
inline BasisNet train_basis(const BasisSpec& spec, const TrainConfig& config,
                            const Architecture& arch,
                            std::optional<ParamSet> warm_start = std::nullopt) {
  spec.validate();
  config.validate();
  if (arch.input_width() != spec.dimension)
    throw invalid_config("architecture input width must equal basis dimension");

  ParamSet init;
  InitProvenance provenance;
  if (warm_start) {
    if (!warm_start->same_shape(arch))
      throw invalid_config("warm start does not match architecture");
    init = *warm_start;
    provenance = InitProvenance::Inherited;
  } else {
    init = init_params(arch, InitStrategy{InitKind::Kaiming, 1.0,
                                          config.seed ^ fnv1a(spec.label())});
    provenance = InitProvenance::Random;
  }

  auto [X, Y] = detail::basis_samples(spec, config);
  TrainResult tr;
  try {
    tr = train(std::move(init), arch, X, Y, config);
  } catch (const training_divergence& e) {
    throw training_divergence(
        "basis " + spec.label() + ": " + e.what(), e.epoch());
  }

  BasisNet net;
  net.spec = spec;
  net.arch = arch;
  net.raw_params = tr.params;
  net.params = std::move(tr.params);
  // Gradient training shapes the hidden features; the linear readout is then
  // set to its exact least-squares optimum over those features.
  detail::polish_output_layer(net.params, arch, X, Y);
  net.final_mse = mse_loss(net.params, arch, X, Y);
  net.epochs_used = static_cast<int>(tr.loss_history.size());
  net.seed = config.seed;
  net.provenance = provenance;
  return net;
}

inline BasisNet train_basis(const BasisSpec& spec, const TrainConfig& config,
                            std::optional<ParamSet> warm_start = std::nullopt) {
  return train_basis(spec, config, default_basis_arch(spec.dimension),
                     std::move(warm_start));
}

/// Builds the full library up to total degree M with progressive
/// initialization: the first net starts from random weights, every later net
/// is warm-started from its graded-lex predecessor. A net that diverges gets
/// one retry from random init before the chain aborts.
inline BasisLibrary progressive_pretrain(
    int dimension, int M, const TrainConfig& config,
    const Architecture& arch,
    const std::function<void(const BasisNet&)>& on_net = {}) {
  if (M < 0) throw invalid_config("max degree must be >= 0");
  if (arch.input_width() != dimension)
    throw invalid_config("architecture input width must equal dimension");

  BasisLibrary lib;
  lib.dimension = dimension;
  lib.max_degree = M;
  lib.arch = arch;
  lib.config_digest = train_config_digest(config);

  std::array<int, 2> prev{};
  bool have_prev = false;
  for (const auto& exps : graded_exponents(dimension, M)) {
    BasisSpec spec{dimension, exps};
    std::optional<ParamSet> warm;
    if (have_prev) {
      const BasisNet& p = lib.nets.at(prev);
      warm = p.raw_params.layers.empty() ? p.params : p.raw_params;
    }
    BasisNet net;
    try {
      net = train_basis(spec, config, arch, warm);
    } catch (const training_divergence&) {
      // Retry once from scratch; a bad warm start should not kill the chain.
      net = train_basis(spec, config, arch, std::nullopt);
    }
    if (have_prev && net.provenance == InitProvenance::Inherited)
      net.inherited_from = prev;
    if (on_net) on_net(net);
    lib.nets.emplace(exps, std::move(net));
    prev = exps;
    have_prev = true;
  }
  return lib;
}

inline BasisLibrary progressive_pretrain(int dimension, int M,
                                         const TrainConfig& config) {
  return progressive_pretrain(dimension, M, config, default_basis_arch(dimension));
}

/// Forward pass of a stored basis net on reference-domain points.
/// Points outside [-1,1]^d are allowed (extrapolation); the optional flag
/// reports whether any were seen.
inline Eigen::VectorXd eval_basis(const BasisLibrary& lib,
                                  const std::array<int, 2>& exps,
                                  const Eigen::MatrixXd& X_hat,
                                  bool* extrapolated = nullptr) {
  const BasisNet& net = lib.at(exps);
  if (extrapolated)
    *extrapolated = (X_hat.array().abs() > 1.0).any();
  return forward_scalar(net.params, net.arch, X_hat);
}

/// Rejects libraries whose recorded training error exceeds the contract bound.
inline void validate_library(const BasisLibrary& lib, double max_mse = 1e-5) {
  const auto expected = graded_exponents(lib.dimension, lib.max_degree);
  if (lib.nets.size() != expected.size())
    throw invalid_config("library is incomplete: expected " +
                         std::to_string(expected.size()) + " nets, found " +
                         std::to_string(lib.nets.size()));
  for (const auto& exps : expected) {
    const BasisNet& net = lib.at(exps);
    if (!(net.final_mse >= 0.0) || net.final_mse > max_mse)
      throw invalid_config("basis " + net.spec.label() +
                           " violates the accuracy contract: training MSE " +
                           std::to_string(net.final_mse));
  }
}

}  // namespace polybasis
