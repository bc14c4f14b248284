// polybasis_cli: pretrain basis libraries, fit targets by least-squares
// projection, predict from saved models, run benchmark experiments, and
// inspect stored artifacts.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polybasis/bench.hpp"

namespace fs = std::filesystem;
using namespace polybasis;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::vector<std::pair<double, double>> parse_domain(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      vals.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (...) {
      throw invalid_config("bad domain value '" + tok + "' in '" + s + "'");
    }
  }
  if (vals.size() == 2) return {{vals[0], vals[1]}};
  if (vals.size() == 4) return {{vals[0], vals[1]}, {vals[2], vals[3]}};
  throw invalid_config("--domain expects a,b (1D) or a,b,c,d (2D), got '" + s + "'");
}

std::vector<int> parse_arch(const std::string& s) {
  std::vector<int> widths;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    widths.push_back(std::stoi(tok));
  if (widths.size() < 2)
    throw invalid_config("--arch expects comma-separated widths, e.g. 1,1024,1");
  return widths;
}

/// Sample file: optional header line, then whitespace/comma separated columns
/// x[,y],f. Returns (points, values).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> read_samples(const std::string& path,
                                                         int dimension) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line)
      if (c == ',' || c == '\t') c = ' ';
    std::stringstream ss(line);
    std::vector<double> row;
    std::string tok;
    bool numeric = true;
    while (ss >> tok) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) numeric = false;
      } catch (...) {
        numeric = false;
      }
    }
    if (!numeric || row.empty()) continue;  // header or blank line
    if (static_cast<int>(row.size()) != dimension + 1)
      throw invalid_config("sample file row has " + std::to_string(row.size()) +
                           " columns; expected " + std::to_string(dimension + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw invalid_config("sample file has no data rows: " + path);
  Eigen::MatrixXd X(static_cast<long>(rows.size()), dimension);
  Eigen::VectorXd y(static_cast<long>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int d = 0; d < dimension; ++d) X(static_cast<long>(i), d) = rows[i][d];
    y[static_cast<long>(i)] = rows[i][dimension];
  }
  return {X, y};
}

void echo_config(const nlohmann::json& j) {
  std::cout << "config: " << j.dump() << "\n";
}

/// Expands `--config <file>` into flags: each `key=value` line becomes
/// `--key value` unless that flag is already present, so explicit flags
/// always override file values.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw invalid_config("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_config("config line is not key=value: " + line);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw invalid_config("config line has empty key: " + line);
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
    if (!present) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

// ---- pretrain ----

struct PretrainArgs {
  int dim = 1;
  int max_degree = 12;
  std::uint64_t seed = 0;
  int epochs = 5000;
  double lr = 1e-3;
  std::string activation = "gelu";
  std::string arch;
  int n_samples = 0;  // 0 = dimension default
  std::string out = "basis.lib";
};

int cmd_pretrain(const PretrainArgs& a) {
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  cfg.n_samples = a.n_samples > 0 ? a.n_samples : (a.dim == 1 ? 2048 : 4096);

  Architecture arch = default_basis_arch(a.dim);
  if (!a.arch.empty()) arch.widths = parse_arch(a.arch);
  arch.activation = activation_from_string(a.activation);
  arch.validate();

  nlohmann::json echo;
  echo["command"] = "pretrain";
  echo["dim"] = a.dim;
  echo["max_degree"] = a.max_degree;
  echo["seed"] = a.seed;
  echo["epochs"] = cfg.epochs;
  echo["lr"] = cfg.learning_rate;
  echo["n_samples"] = cfg.n_samples;
  echo["activation"] = to_string(arch.activation);
  echo["arch"] = arch.widths;
  echo["out"] = a.out;
  echo_config(echo);

  std::printf("%-12s %-10s %12s %8s\n", "basis", "init", "final_mse", "epochs");
  const auto lib = progressive_pretrain(
      a.dim, a.max_degree, cfg, arch, [](const BasisNet& net) {
        std::printf("%-12s %-10s %12.4e %8d\n", net.spec.label().c_str(),
                    to_string(net.provenance), net.final_mse, net.epochs_used);
        std::fflush(stdout);
      });
  save_library(lib, a.out);
  std::cout << "library: " << a.out << " (" << lib.nets.size() << " nets)\n";
  return kExitOk;
}

// ---- approx ----

struct ApproxArgs {
  std::string library;
  std::string target;
  std::string samples;
  int degree = -1;
  std::string domain;
  std::uint64_t seed = 0;
  std::string mapping = "pointwise";
  std::string basis_source = "network";
  std::string out = "model.json";
};

int cmd_approx(const ApproxArgs& a) {
  FitConfig fit_cfg;
  fit_cfg.seed = a.seed;
  fit_cfg.mode = mapping_mode_from_string(a.mapping);
  fit_cfg.source = basis_source_from_string(a.basis_source);

  BasisLibrary lib;
  const BasisLibrary* lib_ptr = nullptr;
  if (fit_cfg.source == BasisSource::Network) {
    if (a.library.empty())
      throw invalid_config("--library is required with --basis-source network");
    lib = load_library(a.library);
    lib_ptr = &lib;
  }

  FitModel model;
  MetricsReport held_out;
  nlohmann::json echo;
  echo["command"] = "approx";
  echo["seed"] = a.seed;
  echo["mapping"] = a.mapping;
  echo["basis_source"] = a.basis_source;
  echo["out"] = a.out;

  if (!a.samples.empty()) {
    const int dim = lib_ptr ? lib.dimension : (a.domain.empty() ? 1 : static_cast<int>(parse_domain(a.domain).size()));
    auto [X, y] = read_samples(a.samples, dim);
    const int K = a.degree >= 0 ? a.degree : 8;
    if (lib_ptr && K > lib.max_degree)
      throw invalid_config("requested degree K=" + std::to_string(K) +
                           " exceeds library max degree M=" +
                           std::to_string(lib.max_degree));
    const auto degrees = DegreeSet::graded(dim, K);
    const auto dm = build_design_matrix(lib_ptr, degrees, X, fit_cfg.mode,
                                        fit_cfg.source);
    const auto sol = solve_coefficients(dm, y);
    model.degrees = degrees;
    model.alpha = sol.alpha;
    model.mode = fit_cfg.mode;
    model.source = fit_cfg.source;
    model.library_digest = lib_ptr ? lib.digest() : 0;
    for (int d = 0; d < dim; ++d)
      model.domain.push_back({X.col(d).minCoeff(), X.col(d).maxCoeff()});
    model.train_metrics = compute_metrics(y, dm.phi * sol.alpha);
    model.condition_estimate = sol.condition_estimate;
    model.ill_conditioned = sol.condition_estimate > 1e12;
    model.rank_warning = sol.rank_warning;
    held_out = model.train_metrics;
    echo["samples"] = a.samples;
    echo["degree"] = K;
  } else {
    if (a.target.empty())
      throw invalid_config("approx needs --target <builtin> or --samples <file>");
    const auto target = builtin_target(a.target);
    const int K = a.degree >= 0 ? a.degree : target.max_degree;
    auto domain = target.domain;
    if (!a.domain.empty()) domain = parse_domain(a.domain);
    if (static_cast<int>(domain.size()) != target.dimension)
      throw invalid_config("domain rank does not match target dimension");
    model = fit(lib_ptr, K, target.f, target.dimension, domain, fit_cfg);
    held_out = evaluate_fit(model, lib_ptr, target.f, domain,
                            target.dimension == 1 ? 2001 : 101);
    echo["target"] = a.target;
    echo["degree"] = K;
    echo["domain"] = a.domain.empty() ? "(target default)" : a.domain;
  }
  echo_config(echo);

  save_model(model, a.out);
  std::printf("train    mse=%.6e  r_squared=%.8f  relative_l2=%.6e\n",
              model.train_metrics.mse, model.train_metrics.r_squared,
              model.train_metrics.relative_l2);
  std::printf("held-out mse=%.6e  r_squared=%.8f  relative_l2=%.6e\n",
              held_out.mse, held_out.r_squared, held_out.relative_l2);
  if (model.rank_warning)
    std::cout << "warning: rank-deficient design matrix; some coefficients were zeroed\n";
  if (model.ill_conditioned)
    std::printf("warning: ill-conditioned system (condition estimate %.3e)\n",
                model.condition_estimate);
  std::cout << "model: " << a.out << "\n";
  return kExitOk;
}

// ---- predict ----

struct PredictArgs {
  std::string model;
  std::string library;
  std::string points;
  std::string domain;
  int grid = 201;
  std::string out;
};

int cmd_predict(const PredictArgs& a) {
  const auto model = load_model(a.model);
  BasisLibrary lib;
  const BasisLibrary* lib_ptr = nullptr;
  if (model.source == BasisSource::Network) {
    if (a.library.empty())
      throw invalid_config("--library is required: the model uses a network basis");
    lib = load_library(a.library);
    lib_ptr = &lib;
  }
  const int dim = model.degrees.dimension;

  Eigen::MatrixXd X;
  if (!a.points.empty()) {
    std::ifstream in(a.points);
    if (!in) throw std::runtime_error("cannot open points file: " + a.points);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      for (char& c : line)
        if (c == ',' || c == '\t') c = ' ';
      std::stringstream ss(line);
      std::vector<double> row;
      double v;
      bool ok = true;
      std::string tok;
      while (ss >> tok) {
        try {
          std::size_t pos = 0;
          v = std::stod(tok, &pos);
          if (pos != tok.size()) ok = false;
        } catch (...) {
          ok = false;
        }
        row.push_back(v);
      }
      if (!ok || row.empty()) continue;
      if (static_cast<int>(row.size()) != dim)
        throw invalid_config("points row has " + std::to_string(row.size()) +
                             " columns; model dimension is " + std::to_string(dim));
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw invalid_config("points file has no data rows");
    X.resize(static_cast<long>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (int d = 0; d < dim; ++d) X(static_cast<long>(i), d) = rows[i][d];
  } else {
    auto domain = model.domain;
    if (!a.domain.empty()) domain = parse_domain(a.domain);
    if (static_cast<int>(domain.size()) != dim)
      throw invalid_config("domain rank does not match model dimension");
    X = dim == 1 ? linspace_1d(a.grid, domain[0].first, domain[0].second)
                 : sample_grid_2d(a.grid, domain[0].first, domain[0].second,
                                  domain[1].first, domain[1].second);
  }

  const auto y = predict(model, lib_ptr, X);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw std::runtime_error("cannot open for writing: " + a.out);
    os = &file;
  }
  os->precision(17);
  *os << (dim == 1 ? "x,Pf" : "x1,x2,Pf") << "\n";
  for (long i = 0; i < X.rows(); ++i) {
    for (int d = 0; d < dim; ++d) *os << X(i, d) << ",";
    *os << y[i] << "\n";
  }
  if (!a.out.empty()) std::cout << "predictions: " << a.out << "\n";
  return kExitOk;
}

// ---- bench ----

struct BenchArgs {
  std::string kind;
  std::string library;
  int seeds = 5;
  std::uint64_t seed = 0;
  int epochs = 5000;
  double lr = 1e-3;
  int n_samples = 2048;
  std::string arch;
  int jobs = 1;
  long timing_iters = 1000;
  long timing_batch = 100000;
  std::string out = "bench-out";
};

int cmd_bench(const BenchArgs& a) {
  ExperimentSpec spec;
  spec.kind = experiment_kind_from_string(a.kind);
  spec.n_seeds = a.seeds;
  spec.base_seed = a.seed;
  spec.train.epochs = a.epochs;
  spec.train.learning_rate = a.lr;
  spec.train.n_samples = a.n_samples;
  spec.train.seed = a.seed;
  if (!a.arch.empty()) spec.arch = parse_arch(a.arch);
  spec.jobs = a.jobs;
  spec.timing_iters = a.timing_iters;
  spec.timing_batch = a.timing_batch;

  ExperimentReport report;
  switch (spec.kind) {
    case ExperimentKind::InitSensitivity:
      report = run_init_sensitivity(spec);
      break;
    case ExperimentKind::WidthSweep:
    case ExperimentKind::DepthSweep:
    case ExperimentKind::MixedArchSweep:
      report = run_arch_sweep(spec);
      break;
    case ExperimentKind::ActivationError:
    case ExperimentKind::ActivationTiming:
      report = run_activation_study(spec);
      break;
    case ExperimentKind::BasisVerify: {
      if (a.library.empty())
        throw invalid_config("bench basis-verify requires --library");
      const auto lib = load_library(a.library);
      report = run_basis_verify(spec, lib);
      break;
    }
    case ExperimentKind::Approx1D:
    case ExperimentKind::Approx2D: {
      if (a.library.empty())
        throw invalid_config("bench " + a.kind + " requires --library");
      const auto lib = load_library(a.library);
      report = run_approximation_suite(
          spec, spec.kind == ExperimentKind::Approx1D ? 1 : 2, lib);
      break;
    }
    case ExperimentKind::ExtrapolationDemo:
      report = run_extrapolation_demo(spec);
      break;
  }
  echo_config(report.spec_echo);
  const auto dir = write_report(report, a.out);
  std::cout << "report: " << dir.string() << "\n";
  return kExitOk;
}

// ---- inspect ----

int cmd_inspect(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot open: " + path);
  char magic[4] = {};
  probe.read(magic, 4);
  probe.close();

  if (std::string(magic, 4) == "PBLB") {
    const auto lib = load_library(path);
    std::cout << "kind: basis library\n"
              << "dimension: " << lib.dimension << "\n"
              << "max_degree: " << lib.max_degree << "\n"
              << "architecture: " << detail::arch_label(lib.arch.widths) << " "
              << to_string(lib.arch.activation) << "\n"
              << "format_version: " << lib.format_version << "\n"
              << "config_digest: " << lib.config_digest << "\n"
              << "digest: " << lib.digest() << "\n"
              << "nets: " << lib.nets.size() << "\n";
    std::printf("%-12s %-10s %12s %8s\n", "basis", "init", "final_mse", "epochs");
    for (const auto& [exps, net] : lib.nets)
      std::printf("%-12s %-10s %12.4e %8d\n", net.spec.label().c_str(),
                  to_string(net.provenance), net.final_mse, net.epochs_used);
    return kExitOk;
  }

  const auto model = load_model(path);
  std::cout << "kind: fit model\n"
            << "dimension: " << model.degrees.dimension << "\n"
            << "basis_functions: " << model.degrees.size() << "\n"
            << "max_total_degree: " << model.degrees.max_total_degree() << "\n"
            << "mapping: " << to_string(model.mode) << "\n"
            << "basis_source: " << to_string(model.source) << "\n"
            << "library_digest: " << model.library_digest << "\n"
            << "train_mse: " << model.train_metrics.mse << "\n"
            << "train_r_squared: " << model.train_metrics.r_squared << "\n"
            << "condition_estimate: " << model.condition_estimate << "\n"
            << "rank_warning: " << (model.rank_warning ? "yes" : "no") << "\n";
  std::cout << "alpha:";
  for (long i = 0; i < model.alpha.size(); ++i) std::cout << " " << model.alpha[i];
  std::cout << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polybasis: neural polynomial-basis pretraining and "
               "least-squares function approximation"};
  app.require_subcommand(1);

  PretrainArgs pre;
  auto* sp = app.add_subcommand("pretrain",
                                "Train a basis library with progressive initialization");
  sp->add_option("--dim", pre.dim, "Input dimension (1 or 2)")
      ->check(CLI::Range(1, 2));
  sp->add_option("--max-degree", pre.max_degree, "Highest total degree M");
  sp->add_option("--seed", pre.seed, "RNG seed");
  sp->add_option("--epochs", pre.epochs, "Training epochs per basis net");
  sp->add_option("--lr", pre.lr, "Learning rate");
  sp->add_option("--activation", pre.activation, "Hidden activation");
  sp->add_option("--arch", pre.arch, "Widths, e.g. 1,1024,1");
  sp->add_option("--n-samples", pre.n_samples, "Training samples per net");
  sp->add_option("--out", pre.out, "Output library file");
  sp->add_option("--config", "Flat key=value config file; flags override");

  ApproxArgs apx;
  auto* sa = app.add_subcommand("approx",
                                "Fit a target by projection onto the mapped basis");
  sa->add_option("--library", apx.library, "Basis library file");
  sa->add_option("--target", apx.target, "Builtin target name");
  sa->add_option("--samples", apx.samples, "Sample file: columns x[,y],f");
  sa->add_option("--degree", apx.degree, "Projection degree K");
  sa->add_option("--domain", apx.domain, "a,b (1D) or a,b,c,d (2D)");
  sa->add_option("--seed", apx.seed, "RNG seed for fit sampling");
  sa->add_option("--mapping", apx.mapping, "pointwise|uniform");
  sa->add_option("--basis-source", apx.basis_source, "network|oracle");
  sa->add_option("--out", apx.out, "Output model file (JSON)");
  sa->add_option("--config", "Flat key=value config file; flags override");

  PredictArgs prd;
  auto* spr = app.add_subcommand("predict", "Evaluate a saved model");
  spr->add_option("--model", prd.model, "Model file (JSON)")->required();
  spr->add_option("--library", prd.library, "Basis library file");
  spr->add_option("--points", prd.points, "Points file, one point per row");
  spr->add_option("--domain", prd.domain, "Evaluation domain override");
  spr->add_option("--grid", prd.grid, "Grid resolution when no points file");
  spr->add_option("--out", prd.out, "Output CSV (default stdout)");
  spr->add_option("--config", "Flat key=value config file; flags override");

  BenchArgs ben;
  auto* sb = app.add_subcommand("bench", "Run a benchmark experiment");
  std::string kinds;
  for (ExperimentKind k : all_experiment_kinds())
    kinds += std::string(kinds.empty() ? "" : "|") + to_string(k);
  sb->add_option("kind", ben.kind, "One of: " + kinds)->required();
  sb->add_option("--library", ben.library, "Basis library (verify/approx kinds)");
  sb->add_option("--seeds", ben.seeds, "Seeds per grid cell");
  sb->add_option("--seed", ben.seed, "Base seed");
  sb->add_option("--epochs", ben.epochs, "Training epochs");
  sb->add_option("--lr", ben.lr, "Learning rate");
  sb->add_option("--n-samples", ben.n_samples, "Training samples");
  sb->add_option("--arch", ben.arch, "Widths, e.g. 1,64,1");
  sb->add_option("--jobs", ben.jobs, "Worker threads");
  sb->add_option("--timing-iters", ben.timing_iters, "Timing repetitions");
  sb->add_option("--timing-batch", ben.timing_batch, "Timing batch size");
  sb->add_option("--out", ben.out, "Report output root");
  sb->add_option("--config", "Flat key=value config file; flags override");

  std::string inspect_path;
  auto* si = app.add_subcommand("inspect", "Print library or model metadata");
  si->add_option("path", inspect_path, "Library or model file")->required();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config_file(args);
    std::reverse(args.begin(), args.end());  // CLI11 expects a reversed vector
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const invalid_config& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (sp->parsed()) return cmd_pretrain(pre);
    if (sa->parsed()) return cmd_approx(apx);
    if (spr->parsed()) return cmd_predict(prd);
    if (sb->parsed()) return cmd_bench(ben);
    if (si->parsed()) return cmd_inspect(inspect_path);
  } catch (const invalid_config& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
