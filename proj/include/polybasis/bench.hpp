#pragma once

#include <atomic>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "polybasis/basis.hpp"
#include "polybasis/init.hpp"
#include "polybasis/metrics.hpp"
#include "polybasis/model_io.hpp"
#include "polybasis/projection.hpp"
#include "polybasis/report.hpp"
#include "polybasis/targets.hpp"
#include "polybasis/timing.hpp"
#include "polybasis/train.hpp"

namespace polybasis {

enum class ExperimentKind {
  InitSensitivity,
  WidthSweep,
  DepthSweep,
  MixedArchSweep,
  ActivationError,
  ActivationTiming,
  BasisVerify,
  Approx1D,
  Approx2D,
  ExtrapolationDemo,
};

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::InitSensitivity: return "init-sensitivity";
    case ExperimentKind::WidthSweep: return "width-sweep";
    case ExperimentKind::DepthSweep: return "depth-sweep";
    case ExperimentKind::MixedArchSweep: return "mixed-arch-sweep";
    case ExperimentKind::ActivationError: return "activation-error";
    case ExperimentKind::ActivationTiming: return "activation-timing";
    case ExperimentKind::BasisVerify: return "basis-verify";
    case ExperimentKind::Approx1D: return "approx-1d";
    case ExperimentKind::Approx2D: return "approx-2d";
    case ExperimentKind::ExtrapolationDemo: return "extrapolation-demo";
  }
  return "?";
}

inline const std::vector<ExperimentKind>& all_experiment_kinds() {
  static const std::vector<ExperimentKind> kinds = {
      ExperimentKind::InitSensitivity, ExperimentKind::WidthSweep,
      ExperimentKind::DepthSweep,      ExperimentKind::MixedArchSweep,
      ExperimentKind::ActivationError, ExperimentKind::ActivationTiming,
      ExperimentKind::BasisVerify,     ExperimentKind::Approx1D,
      ExperimentKind::Approx2D,        ExperimentKind::ExtrapolationDemo};
  return kinds;
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (ExperimentKind k : all_experiment_kinds())
    if (s == to_string(k)) return k;
  std::string names;
  for (ExperimentKind k : all_experiment_kinds())
    names += std::string(names.empty() ? "" : ", ") + to_string(k);
  throw invalid_config("unknown experiment kind '" + s +
                       "' (valid kinds: " + names + ")");
}

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::ActivationTiming;
  int n_seeds = 5;
  std::uint64_t base_seed = 0;
  TrainConfig train;       // schedule shared by training-based experiments
  std::vector<int> arch = {1, 64, 1};  // single-run architecture
  std::vector<std::vector<int>> arch_grid;  // sweep architectures
  std::vector<std::pair<InitKind, double>> init_grid = {
      {InitKind::Uniform, 0.5}, {InitKind::Uniform, 2.0},
      {InitKind::Uniform, 5.0}, {InitKind::Xavier, 1.0},
      {InitKind::Xavier, 10.0}, {InitKind::Xavier, 20.0},
      {InitKind::Kaiming, 1.0}, {InitKind::Kaiming, 10.0},
      {InitKind::Kaiming, 20.0}};
  std::vector<ActivationKind> activations{kAllActivations,
                                          kAllActivations + kActivationCount};
  long timing_iters = 1000;
  long timing_batch = 100000;
  int test_grid_1d = 2001;
  int test_grid_2d = 101;
  int jobs = 1;

  void validate() const {
    if (n_seeds < 1) throw invalid_config("need at least one seed");
    train.validate();
  }

  nlohmann::json echo() const {
    nlohmann::json j;
    j["experiment"] = to_string(kind);
    j["n_seeds"] = n_seeds;
    j["base_seed"] = base_seed;
    j["epochs"] = train.epochs;
    j["learning_rate"] = train.learning_rate;
    j["optimizer"] = to_string(train.optimizer);
    j["n_samples"] = train.n_samples;
    j["arch"] = arch;
    j["jobs"] = jobs;
    return j;
  }
};

namespace detail {

inline void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min(jobs, n);
  for (int t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

inline std::string arch_label(const std::vector<int>& widths) {
  std::string s = "[";
  for (std::size_t i = 0; i < widths.size(); ++i)
    s += (i ? "," : "") + std::to_string(widths[i]);
  return s + "]";
}

/// Trains y = x^3 on [-1,1] and evaluates on the extrapolation grid through
/// the domain-map pipeline: yhat(x) = 10^(3s) * net(x / 10^s).
inline MetricsReport cube_extrapolation_run(const Architecture& arch,
                                            const TrainConfig& cfg,
                                            double test_lo, double test_hi,
                                            int test_n) {
  const auto X = sample_uniform_1d(cfg.n_samples, -1.0, 1.0, cfg.seed);
  const Eigen::MatrixXd Y = X.array().cube();
  const auto p0 = init_params(arch, {InitKind::Kaiming, 1.0, cfg.seed});
  const auto tr = train(p0, arch, X, Y, cfg);

  const auto Xt = linspace_1d(test_n, test_lo, test_hi);
  Eigen::VectorXd y_true(test_n), y_pred(test_n);
  for (int i = 0; i < test_n; ++i) {
    const double x = Xt(i, 0);
    y_true[i] = x * x * x;
    const auto m = forward_map(x);
    Eigen::MatrixXd xh(1, 1);
    xh << m.x_hat;
    y_pred[i] =
        unmap_basis_value(forward(tr.params, arch, xh)(0, 0), 3, m.s);
  }
  return compute_metrics(y_true, y_pred);
}

}  // namespace detail

/// Initialization-sensitivity study: arch [2,64,64,64,1] against
/// sin(pi x) sin(4 pi y), one cell per (strategy, gain, seed), with per-epoch
/// loss curves.
inline ExperimentReport run_init_sensitivity(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.init_grid.empty()) throw invalid_config("empty init grid");
  ExperimentReport report;
  report.experiment = to_string(ExperimentKind::InitSensitivity);
  report.spec_echo = spec.echo();

  const Architecture arch{{2, 64, 64, 64, 1}, ActivationKind::GELU};
  const auto target = builtin_target("sin_pi_x_sin_4pi_y");
  const int side = std::max(2, static_cast<int>(std::lround(
                                   std::sqrt(static_cast<double>(spec.train.n_samples)))));
  const auto X = sample_grid_2d(side, -1, 1, -1, 1);
  const Eigen::MatrixXd Y = sample_target(target.f, X);

  struct Job {
    InitKind kind;
    double gain;
    int seed_idx;
  };
  std::vector<Job> jobs;
  for (const auto& [kind, gain] : spec.init_grid)
    for (int s = 0; s < spec.n_seeds; ++s) jobs.push_back({kind, gain, s});

  std::vector<CellResult> cells(jobs.size());
  std::vector<Curve> curves(jobs.size());
  detail::parallel_for(
      static_cast<int>(jobs.size()), spec.jobs, [&](int i) {
        const auto& job = jobs[i];
        const std::uint64_t seed = spec.base_seed + job.seed_idx;
        CellResult cell;
        cell.labels["strategy"] = to_string(job.kind);
        cell.labels["gain"] = detail::format_double(job.gain);
        cell.labels["seed"] = std::to_string(seed);
        try {
          auto cfg = spec.train;
          cfg.seed = seed;
          const auto p0 = init_params(arch, {job.kind, job.gain, seed});
          const auto tr = train(p0, arch, X, Y, cfg);
          const auto m = compute_metrics(
              Y.col(0), forward(tr.params, arch, X).col(0));
          cell.values["relative_l2"] = m.relative_l2;
          cell.values["mse"] = m.mse;
          cell.values["final_loss"] = tr.loss_history.back();
          Curve curve;
          curve.name = std::string("loss_") + to_string(job.kind) + "_g" +
                       detail::format_double(job.gain) + "_s" +
                       std::to_string(seed);
          curve.columns = {"epoch", "loss"};
          for (std::size_t e = 0; e < tr.loss_history.size(); ++e)
            curve.rows.push_back({static_cast<double>(e), tr.loss_history[e]});
          curves[i] = std::move(curve);
          cell.labels["status"] = "ok";
        } catch (const std::exception& e) {
          cell.labels["status"] = std::string("failed: ") + e.what();
        }
        cells[i] = std::move(cell);
      });
  report.cells = std::move(cells);
  for (auto& c : curves)
    if (!c.name.empty()) report.curves.push_back(std::move(c));
  return report;
}

/// Architecture sweeps over y = x^3: train on [-1,1], test on [-20,20].
inline ExperimentReport run_arch_sweep(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<std::vector<int>> archs = spec.arch_grid;
  if (archs.empty()) {
    switch (spec.kind) {
      case ExperimentKind::WidthSweep:
        archs = {{1, 8, 1},  {1, 16, 1},  {1, 32, 1},
                 {1, 64, 1}, {1, 128, 1}, {1, 256, 1}};
        break;
      case ExperimentKind::DepthSweep:
        archs = {{1, 8, 1},   {1, 8, 8, 1},   {1, 8, 8, 8, 8, 1},
                 {1, 128, 1}, {1, 128, 128, 1}, {1, 128, 128, 128, 128, 1}};
        break;
      case ExperimentKind::MixedArchSweep:
        archs = {{1, 8, 1},          {1, 8, 8, 1},        {1, 8, 16, 1},
                 {1, 8, 32, 1},      {1, 8, 64, 1},       {1, 8, 128, 1},
                 {1, 8, 256, 1},     {1, 8, 8, 8, 8, 1},  {1, 8, 16, 32, 64, 1},
                 {1, 8, 16, 32, 128, 1}, {1, 8, 16, 32, 256, 1},
                 {1, 8, 16, 64, 128, 1}, {1, 8, 16, 64, 256, 1},
                 {1, 8, 16, 128, 256, 1}, {1, 8, 32, 64, 128, 1},
                 {1, 8, 32, 64, 256, 1}, {1, 8, 32, 128, 256, 1},
                 {1, 8, 64, 128, 256, 1}};
        break;
      default:
        throw invalid_config("arch sweep requires a sweep experiment kind");
    }
  }
  if (archs.empty()) throw invalid_config("sweep over 0 architectures");

  ExperimentReport report;
  report.experiment = to_string(spec.kind);
  report.spec_echo = spec.echo();

  struct Job {
    const std::vector<int>* widths;
    int seed_idx;
  };
  std::vector<Job> jobs;
  for (const auto& a : archs)
    for (int s = 0; s < spec.n_seeds; ++s) jobs.push_back({&a, s});
  std::vector<CellResult> cells(jobs.size());
  detail::parallel_for(
      static_cast<int>(jobs.size()), spec.jobs, [&](int i) {
        const auto& job = jobs[i];
        CellResult cell;
        cell.labels["arch"] = detail::arch_label(*job.widths);
        cell.labels["seed"] = std::to_string(spec.base_seed + job.seed_idx);
        try {
          Architecture arch{*job.widths, ActivationKind::GELU};
          auto cfg = spec.train;
          cfg.seed = spec.base_seed + job.seed_idx;
          const auto m = detail::cube_extrapolation_run(arch, cfg, -20.0, 20.0,
                                                        spec.test_grid_1d);
          cell.values["mse"] = m.mse;
          cell.values["r_squared"] = m.r_squared;
          cell.labels["status"] = "ok";
        } catch (const std::exception& e) {
          cell.labels["status"] = std::string("failed: ") + e.what();
        }
        cells[i] = std::move(cell);
      });
  report.cells = std::move(cells);
  return report;
}

/// Per-activation approximation error on y = x^3 (fixed architecture and
/// schedule) plus a separate elementwise timing pass.
inline ExperimentReport run_activation_study(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport report;
  report.experiment = to_string(spec.kind);
  report.spec_echo = spec.echo();

  if (spec.kind == ExperimentKind::ActivationTiming) {
    for (ActivationKind kind : spec.activations) {
      const auto t = time_activation(kind, spec.timing_iters, spec.timing_batch);
      CellResult cell;
      cell.labels["activation"] = to_string(kind);
      cell.values["forward_ns"] = static_cast<double>(t.forward_ns);
      cell.values["backward_ns"] = static_cast<double>(t.backward_ns);
      cell.values["n_iters"] = static_cast<double>(t.n_iters);
      cell.values["batch_size"] = static_cast<double>(t.batch_size);
      report.cells.push_back(std::move(cell));
    }
    return report;
  }

  struct Job {
    ActivationKind kind;
    int seed_idx;
  };
  std::vector<Job> jobs;
  for (ActivationKind kind : spec.activations)
    for (int s = 0; s < spec.n_seeds; ++s) jobs.push_back({kind, s});
  std::vector<CellResult> cells(jobs.size());
  detail::parallel_for(
      static_cast<int>(jobs.size()), spec.jobs, [&](int i) {
        const auto& job = jobs[i];
        CellResult cell;
        cell.labels["activation"] = to_string(job.kind);
        cell.labels["seed"] = std::to_string(spec.base_seed + job.seed_idx);
        try {
          Architecture arch{spec.arch, job.kind};
          auto cfg = spec.train;
          cfg.seed = spec.base_seed + job.seed_idx;
          const auto m = detail::cube_extrapolation_run(arch, cfg, -20.0, 20.0,
                                                        spec.test_grid_1d);
          cell.values["mse"] = m.mse;
          cell.values["r_squared"] = m.r_squared;
          cell.labels["status"] = "ok";
        } catch (const std::exception& e) {
          cell.labels["status"] = std::string("failed: ") + e.what();
        }
        cells[i] = std::move(cell);
      });
  report.cells = std::move(cells);
  return report;
}

/// Evaluates every net of a pretrained library against its exact monomial on
/// an extended grid ([-10,10]^d), with plot-ready curves in 1D.
inline ExperimentReport run_basis_verify(const ExperimentSpec& spec,
                                         const BasisLibrary& lib) {
  ExperimentReport report;
  report.experiment = to_string(ExperimentKind::BasisVerify);
  report.spec_echo = spec.echo();
  report.spec_echo["library_dimension"] = lib.dimension;
  report.spec_echo["library_max_degree"] = lib.max_degree;

  Eigen::MatrixXd X = lib.dimension == 1
                          ? linspace_1d(spec.test_grid_1d, -10.0, 10.0)
                          : sample_grid_2d(spec.test_grid_2d, -10, 10, -10, 10);
  const auto mapped = map_domain(X, MappingMode::Pointwise);

  for (const auto& [exps, net] : lib.nets) {
    const int deg = exps[0] + exps[1];
    Eigen::MatrixXd Xh(X.rows(), X.cols());
    for (long i = 0; i < X.rows(); ++i) Xh.row(i) = mapped[i].x_hat;
    const auto phi_hat = eval_basis(lib, exps, Xh);
    Eigen::VectorXd y_pred(X.rows()), y_true(X.rows());
    for (long i = 0; i < X.rows(); ++i) {
      y_pred[i] = unmap_basis_value(phi_hat[i], deg, mapped[i].s);
      y_true[i] = BasisSpec{lib.dimension, exps}.eval_exact(X.row(i));
    }
    CellResult cell;
    cell.labels["basis"] = BasisSpec{lib.dimension, exps}.label();
    const bool constant = deg == 0;
    cell.values["mse"] = mse(y_true, y_pred);
    if (!constant) cell.values["r_squared"] = r_squared(y_true, y_pred);
    cell.values["train_mse"] = net.final_mse;
    report.cells.push_back(std::move(cell));

    if (lib.dimension == 1) {
      Curve curve;
      curve.name = "basis_x" + std::to_string(exps[0]);
      curve.columns = {"x", "true", "predicted"};
      for (long i = 0; i < X.rows(); ++i)
        curve.rows.push_back({X(i, 0), y_true[i], y_pred[i]});
      report.curves.push_back(std::move(curve));
    }
  }
  return report;
}

/// End-to-end approximation suite over the builtin targets of one dimension,
/// with plot-ready (x, f, Pf) columns.
inline ExperimentReport run_approximation_suite(const ExperimentSpec& spec,
                                                int dimension,
                                                const BasisLibrary& lib) {
  if (dimension != lib.dimension)
    throw invalid_config("suite dimension does not match library dimension");
  ExperimentReport report;
  report.experiment = to_string(dimension == 1 ? ExperimentKind::Approx1D
                                               : ExperimentKind::Approx2D);
  report.spec_echo = spec.echo();

  for (const auto& target : builtin_targets()) {
    const bool suite_member =
        target.name.rfind(dimension == 1 ? "1d_f" : "2d_f", 0) == 0;
    if (!suite_member || target.dimension != dimension) continue;
    CellResult cell;
    cell.labels["target"] = target.name;
    cell.labels["degree"] = std::to_string(target.max_degree);
    try {
      FitConfig fit_cfg;
      fit_cfg.seed = spec.base_seed;
      const auto model = fit(&lib, target.max_degree, target.f, dimension,
                             target.domain, fit_cfg);
      const int grid = dimension == 1 ? spec.test_grid_1d : spec.test_grid_2d;
      const auto m = evaluate_fit(model, &lib, target.f, target.domain, grid);
      cell.values["mse"] = m.mse;
      cell.values["r_squared"] = m.r_squared;
      cell.values["relative_l2"] = m.relative_l2;
      cell.values["train_mse"] = model.train_metrics.mse;
      cell.values["condition_estimate"] = model.condition_estimate;
      cell.labels["status"] = "ok";

      if (dimension == 1) {
        Curve curve;
        curve.name = "fit_" + target.name;
        curve.columns = {"x", "f", "Pf"};
        const auto X = linspace_1d(spec.test_grid_1d, target.domain[0].first,
                                   target.domain[0].second);
        const auto pred = predict(model, &lib, X);
        for (long i = 0; i < X.rows(); ++i)
          curve.rows.push_back({X(i, 0), target.f(X.row(i)), pred[i]});
        report.curves.push_back(std::move(curve));
      }
    } catch (const std::exception& e) {
      cell.labels["status"] = std::string("failed: ") + e.what();
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

/// Two-arm extrapolation demo for y = x^3:
///   naive  — train on [-10,10] directly, evaluate on [-15,15];
///   mapped — train on the reference domain, map/unmap, evaluate on [-60,60].
inline ExperimentReport run_extrapolation_demo(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport report;
  report.experiment = to_string(ExperimentKind::ExtrapolationDemo);
  report.spec_echo = spec.echo();

  const Architecture arch{spec.arch, ActivationKind::GELU};
  auto cfg = spec.train;
  cfg.seed = spec.base_seed;

  {  // naive arm
    const auto X = sample_uniform_1d(cfg.n_samples, -10.0, 10.0, cfg.seed);
    const Eigen::MatrixXd Y = X.array().cube();
    const auto tr =
        train(init_params(arch, {InitKind::Kaiming, 1.0, cfg.seed}), arch, X, Y,
              cfg);
    const auto Xt = linspace_1d(spec.test_grid_1d, -15.0, 15.0);
    const auto m =
        compute_metrics(Xt.col(0).array().cube(), forward(tr.params, arch, Xt).col(0));
    CellResult cell;
    cell.labels["arm"] = "naive";
    cell.labels["train_domain"] = "[-10,10]";
    cell.labels["test_domain"] = "[-15,15]";
    cell.values["mse"] = m.mse;
    cell.values["r_squared"] = m.r_squared;
    report.cells.push_back(std::move(cell));
  }
  {  // mapped arm
    const auto m = detail::cube_extrapolation_run(arch, cfg, -60.0, 60.0,
                                                  spec.test_grid_1d);
    CellResult cell;
    cell.labels["arm"] = "mapped";
    cell.labels["train_domain"] = "[-1,1]";
    cell.labels["test_domain"] = "[-60,60]";
    cell.values["mse"] = m.mse;
    cell.values["r_squared"] = m.r_squared;
    report.cells.push_back(std::move(cell));
  }
  return report;
}

}  // namespace polybasis
