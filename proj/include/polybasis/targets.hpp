#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "polybasis/common.hpp"
#include "polybasis/projection.hpp"

namespace polybasis {

struct TargetFunction {
  std::string name;
  int dimension = 1;
  std::vector<std::pair<double, double>> domain;
  int max_degree = 0;  // projection degree used by the benchmark suite
  TargetFn f;

  double operator()(double x) const {
    Eigen::RowVectorXd p(1);
    p << x;
    return f(p);
  }
  double operator()(double x1, double x2) const {
    Eigen::RowVectorXd p(2);
    p << x1, x2;
    return f(p);
  }
};

namespace detail {

inline double piecewise_f6(double x) {
  if (x < -1.0) return x * x * x;
  if (x < 1.0) return std::sin(M_PI * x / 2.0);
  return x;
}

}  // namespace detail

inline std::vector<TargetFunction> builtin_targets() {
  auto s1 = [](auto fn) {
    return TargetFn([fn](const Eigen::RowVectorXd& p) { return fn(p[0]); });
  };
  auto s2 = [](auto fn) {
    return TargetFn([fn](const Eigen::RowVectorXd& p) { return fn(p[0], p[1]); });
  };
  return {
      {"1d_f1", 1, {{-1, 1}}, 6, s1([](double x) { return std::exp(std::sin(x)); })},
      {"1d_f2", 1, {{-1, 1}}, 8, s1([](double x) { return std::log(1.0 + x * x); })},
      {"1d_f3", 1, {{-1, 1}}, 8, s1([](double x) { return std::sin(std::exp(x)); })},
      {"1d_f4", 1, {{4, 9}}, 8, s1([](double x) { return std::cos(x); })},
      {"1d_f5", 1, {{-1, 9}}, 4, s1([](double x) { return x * x; })},
      {"1d_f6", 1, {{-6, 4}}, 12, s1(detail::piecewise_f6)},
      {"x3", 1, {{-1, 1}}, 3, s1([](double x) { return x * x * x; })},
      {"2d_f1", 2, {{-1, 1}, {-1, 1}}, 4,
       s2([](double a, double b) { return std::cos(a + b); })},
      {"2d_f2", 2, {{-1, 1}, {-1, 1}}, 6,
       s2([](double a, double) { return std::sin(std::exp(a)); })},
      {"2d_f3", 2, {{2, 3}, {2, 3}}, 6,
       s2([](double a, double b) { return std::pow(2.0, a + b); })},
      {"2d_f4", 2, {{-5, 8}, {-5, 8}}, 2,
       s2([](double a, double b) { return a * a + b * b; })},
      {"sin_pi_x_sin_4pi_y", 2, {{-1, 1}, {-1, 1}}, 0,
       s2([](double a, double b) {
         return std::sin(M_PI * a) * std::sin(4.0 * M_PI * b);
       })},
  };
}

inline TargetFunction builtin_target(const std::string& name) {
  const auto all = builtin_targets();
  for (const auto& t : all)
    if (t.name == name) return t;
  std::string names;
  for (const auto& t : all) names += (names.empty() ? "" : ", ") + t.name;
  throw invalid_config("unknown target '" + name + "' (available: " + names + ")");
}

}  // namespace polybasis
