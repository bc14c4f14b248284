#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "polybasis/model_io.hpp"
#include "polybasis/projection.hpp"

using namespace polybasis;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("oracle design matrix hand rows", "[projection]") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 1.0, 2.0;
  const auto dm = build_design_matrix(nullptr, DegreeSet::graded(1, 2), pts,
                                      MappingMode::Pointwise, BasisSource::Oracle);
  Eigen::MatrixXd expected(3, 3);
  expected << 1, 0, 0, 1, 1, 1, 1, 2, 4;
  CHECK((dm.phi - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("degree set {0} gives an all-ones column", "[projection]") {
  Eigen::MatrixXd pts(4, 1);
  pts << -3.0, 0.0, 17.0, 1234.5;
  DegreeSet ds{1, {{0, 0}}};
  const auto dm = build_design_matrix(nullptr, ds, pts, MappingMode::Pointwise,
                                      BasisSource::Oracle);
  CHECK((dm.phi.array() == 1.0).all());
}

TEST_CASE("orthonormal columns solve exactly", "[projection]") {
  DesignMatrix dm;
  dm.degrees = DegreeSet::graded(1, 1);
  dm.phi = Eigen::MatrixXd::Identity(4, 2);
  Eigen::VectorXd y(4);
  y << 3.0, -2.0, 0.0, 0.0;
  const auto sol = solve_coefficients(dm, y);
  CHECK_THAT(sol.alpha[0], WithinRel(3.0, 1e-14));
  CHECK_THAT(sol.alpha[1], WithinRel(-2.0, 1e-14));
  CHECK(sol.residual_norm < 1e-14);
  CHECK_FALSE(sol.rank_warning);
}

TEST_CASE("x^2 on [-1,9] with oracle basis recovers exact coefficients",
          "[projection]") {
  const auto X = sample_uniform_1d(200, -1.0, 9.0, 42);
  Eigen::VectorXd y = X.col(0).array().square();
  const auto dm = build_design_matrix(nullptr, DegreeSet::graded(1, 4), X,
                                      MappingMode::Pointwise, BasisSource::Oracle);
  const auto sol = solve_coefficients(dm, y);
  for (int k = 0; k <= 4; ++k) {
    CAPTURE(k);
    CHECK_THAT(sol.alpha[k], WithinAbs(k == 2 ? 1.0 : 0.0, 1e-10));
  }
}

TEST_CASE("duplicate column triggers a rank warning and is zeroed",
          "[projection]") {
  DesignMatrix dm;
  dm.degrees = DegreeSet{1, {{0, 0}, {1, 0}, {1, 0}}};
  const auto X = sample_uniform_1d(20, -1.0, 1.0, 7);
  dm.phi.resize(20, 3);
  dm.phi.col(0).setOnes();
  dm.phi.col(1) = X.col(0);
  dm.phi.col(2) = X.col(0);
  Eigen::VectorXd y = 2.0 * X.col(0);
  const auto sol = solve_coefficients(dm, y);
  CHECK(sol.rank_warning);
  CHECK(sol.rank == 2);
  CHECK((sol.alpha[1] == 0.0 || sol.alpha[2] == 0.0));
  CHECK(sol.residual_norm < 1e-12);
}

TEST_CASE("underdetermined and non-finite systems are rejected", "[projection]") {
  DesignMatrix dm;
  dm.degrees = DegreeSet::graded(1, 3);
  dm.phi = Eigen::MatrixXd::Random(3, 4);
  CHECK_THROWS_AS(solve_coefficients(dm, Eigen::VectorXd::Zero(3)),
                  invalid_config);
  dm.phi = Eigen::MatrixXd::Random(5, 2);
  dm.phi(1, 1) = std::nan("");
  CHECK_THROWS_AS(solve_coefficients(dm, Eigen::VectorXd::Zero(5)),
                  invalid_config);
}

TEST_CASE("polynomials up to degree 8 are recovered on [-1,1]", "[projection]") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  const auto X = sample_uniform_1d(300, -1.0, 1.0, 5);
  for (int K = 1; K <= 8; ++K) {
    std::vector<double> c(K + 1);
    for (auto& v : c) v = coeff(rng);
    Eigen::VectorXd y(X.rows());
    for (long i = 0; i < X.rows(); ++i) {
      double acc = 0.0, p = 1.0;
      for (int k = 0; k <= K; ++k) {
        acc += c[k] * p;
        p *= X(i, 0);
      }
      y[i] = acc;
    }
    const auto dm = build_design_matrix(nullptr, DegreeSet::graded(1, K), X,
                                        MappingMode::Pointwise,
                                        BasisSource::Oracle);
    const auto sol = solve_coefficients(dm, y);
    CAPTURE(K);
    CHECK(sol.residual_norm / y.norm() < 1e-10);
  }
}

TEST_CASE("training residual is non-increasing in K", "[projection]") {
  const auto X = sample_uniform_1d(400, -1.0, 1.0, 33);
  Eigen::VectorXd y(X.rows());
  for (long i = 0; i < X.rows(); ++i) y[i] = std::exp(std::sin(X(i, 0)));
  double prev = std::numeric_limits<double>::infinity();
  for (int K = 0; K <= 8; ++K) {
    const auto dm = build_design_matrix(nullptr, DegreeSet::graded(1, K), X,
                                        MappingMode::Pointwise,
                                        BasisSource::Oracle);
    const double res = solve_coefficients(dm, y).residual_norm;
    CHECK(res <= prev * (1.0 + 1e-12) + 1e-14);
    prev = res;
  }
}

namespace {

BasisLibrary tiny_library(int M) {
  TrainConfig cfg;
  cfg.epochs = 500;
  cfg.learning_rate = 1e-2;
  cfg.n_samples = 128;
  cfg.seed = 21;
  return progressive_pretrain(1, M, cfg, default_basis_arch(1, 32));
}

}  // namespace

TEST_CASE("network-basis fit of a cubic on [-1,1]", "[projection]") {
  const auto lib = tiny_library(3);
  const TargetFn cube = [](const Eigen::RowVectorXd& p) {
    return p[0] * p[0] * p[0];
  };
  FitConfig cfg;
  cfg.seed = 2;
  const auto model = fit(&lib, 3, cube, 1, {{-1.0, 1.0}}, cfg);
  CHECK(model.train_metrics.mse < 1e-3);
  CHECK(model.train_metrics.r_squared > 0.99);

  // Prediction at fit samples equals the design-matrix rows times alpha.
  const auto X = fit_sample_points(1, {{-1.0, 1.0}}, cfg);
  const auto dm = build_design_matrix(&lib, model.degrees, X, model.mode,
                                      model.source);
  const auto direct = predict(model, &lib, X);
  CHECK((direct - dm.phi * model.alpha).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fit is deterministic", "[projection]") {
  const auto lib = tiny_library(2);
  const TargetFn f = [](const Eigen::RowVectorXd& p) {
    return std::cos(p[0]);
  };
  FitConfig cfg;
  cfg.seed = 9;
  const auto a = fit(&lib, 2, f, 1, {{-1.0, 1.0}}, cfg);
  const auto b = fit(&lib, 2, f, 1, {{-1.0, 1.0}}, cfg);
  CHECK(a.alpha == b.alpha);
}

TEST_CASE("K above library max degree is rejected", "[projection]") {
  const auto lib = tiny_library(2);
  const TargetFn f = [](const Eigen::RowVectorXd& p) { return p[0]; };
  try {
    fit(&lib, 3, f, 1, {{-1.0, 1.0}});
    FAIL("expected invalid_config");
  } catch (const invalid_config& e) {
    const std::string msg = e.what();
    CHECK(msg.find("K=3") != std::string::npos);
    CHECK(msg.find("M=2") != std::string::npos);
  }
}

TEST_CASE("predict rejects a mismatched library", "[projection]") {
  const auto lib = tiny_library(2);
  const TargetFn f = [](const Eigen::RowVectorXd& p) { return p[0]; };
  const auto model = fit(&lib, 2, f, 1, {{-1.0, 1.0}});
  auto other = tiny_library(1);
  Eigen::MatrixXd X = linspace_1d(5, -1.0, 1.0);
  CHECK_THROWS_AS(predict(model, &other, X), invalid_config);
  CHECK_NOTHROW(predict(model, &lib, X));
}

TEST_CASE("constant model predicts a constant", "[projection]") {
  const auto lib = tiny_library(2);
  FitModel model;
  model.degrees = DegreeSet::graded(1, 2);
  model.alpha = Eigen::VectorXd::Zero(3);
  model.alpha[0] = 4.2;
  model.mode = MappingMode::Pointwise;
  model.source = BasisSource::Network;
  model.library_digest = lib.digest();
  const auto v = predict(model, &lib, linspace_1d(40, -1.0, 1.0));
  CHECK((v.array() - 4.2).abs().maxCoeff() < 0.1);
}

TEST_CASE("evaluate_fit reports the declared grid size", "[projection]") {
  const TargetFn f = [](const Eigen::RowVectorXd& p) { return p[0] * p[0]; };
  FitConfig cfg;
  cfg.source = BasisSource::Oracle;
  const auto model = fit(nullptr, 4, f, 1, {{-1.0, 9.0}}, cfg);
  const auto report = evaluate_fit(model, nullptr, f, {{-1.0, 9.0}}, 501);
  CHECK(report.n_samples == 501);
  CHECK(report.mse < 1e-18);
  CHECK(report.r_squared > 1.0 - 1e-12);
  CHECK_THROWS_AS(evaluate_fit(model, nullptr, f, {{-1.0, 9.0}}, 1),
                  invalid_config);
}

TEST_CASE("model JSON export round-trips", "[projection]") {
  const TargetFn f = [](const Eigen::RowVectorXd& p) {
    return std::sin(p[0]);
  };
  FitConfig cfg;
  cfg.source = BasisSource::Oracle;
  const auto model = fit(nullptr, 5, f, 1, {{-2.0, 2.0}}, cfg);
  const auto path =
      (std::filesystem::temp_directory_path() / "polybasis_model.json").string();
  save_model(model, path);
  const auto loaded = load_model(path);
  CHECK(loaded.alpha == model.alpha);
  CHECK(loaded.degrees.exponents == model.degrees.exponents);
  CHECK(loaded.domain == model.domain);
  CHECK(loaded.mode == model.mode);
  CHECK(loaded.source == model.source);
  CHECK(loaded.train_metrics.mse == model.train_metrics.mse);
  std::filesystem::remove(path);

  // Version and parse failures are distinct errors.
  auto j = model_to_json(model);
  j["format_version"] = 42;
  CHECK_THROWS_AS(model_from_json(j), version_mismatch_error);
}

TEST_CASE("design matrix overflow names the offender", "[projection]") {
  Eigen::MatrixXd pts(1, 1);
  pts << 1e300;
  try {
    build_design_matrix(nullptr, DegreeSet::graded(1, 8), pts,
                        MappingMode::Pointwise, BasisSource::Oracle);
    FAIL("expected range_error");
  } catch (const std::range_error& e) {
    CHECK(std::string(e.what()).find("exponents") != std::string::npos);
  }
}
