#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>

#include "polybasis/domain_map.hpp"

using namespace polybasis;
using Catch::Matchers::WithinRel;

TEST_CASE("scale exponent hand cases", "[domain_map]") {
  CHECK(scale_exponent(0.0) == 0);
  CHECK(scale_exponent(0.5) == 0);
  CHECK(scale_exponent(-0.99) == 0);
  CHECK(scale_exponent(60.0) == 2);
  CHECK(scale_exponent(-60.0) == 2);
  CHECK(scale_exponent(9.5) == 1);   // floor(10.5) = 10 -> 10^1
  CHECK(scale_exponent(10.0) == 2);  // floor(11) = 11 -> 10^2
  CHECK(scale_exponent(1.0) == 1);   // floor(2) = 2
  CHECK(scale_exponent(8.99) == 1);
  CHECK(scale_exponent(999.0) == 3);
  CHECK_THROWS_AS(scale_exponent(std::nan("")), invalid_config);
  CHECK_THROWS_AS(scale_exponent(INFINITY), invalid_config);
}

// Independent oracle: digits of the decimal string of n = floor(|x|+1),
// minus one when n is an exact power of ten.
namespace {
int scale_exponent_oracle(double x) {
  const auto n = static_cast<unsigned long long>(std::floor(std::abs(x) + 1.0));
  const std::string digits = std::to_string(n);
  const bool power_of_ten =
      digits[0] == '1' && digits.find_first_not_of('0', 1) == std::string::npos;
  return static_cast<int>(digits.size()) - (power_of_ten ? 1 : 0);
}
}  // namespace

TEST_CASE("scale exponent agrees with the digit-string oracle", "[domain_map]") {
  for (int n = 0; n <= 1000000; ++n)
    if (scale_exponent(n) != scale_exponent_oracle(n)) {
      CAPTURE(n);
      REQUIRE(scale_exponent(n) == scale_exponent_oracle(n));
    }
  // Boundary values around powers of ten.
  for (int e = 0; e <= 9; ++e) {
    const double p = std::pow(10.0, e);
    for (double x : {p - 1e-9, p, p + 1e-9, p - 0.5, p + 0.5}) {
      CAPTURE(e, x);
      CHECK(scale_exponent(x) == scale_exponent_oracle(x));
    }
  }
  SUCCEED();
}

TEST_CASE("forward map hand cases", "[domain_map]") {
  auto m = forward_map(0.5);
  CHECK(m.s == 0);
  CHECK(m.x_hat == 0.5);
  m = forward_map(60.0);
  CHECK(m.s == 2);
  CHECK_THAT(m.x_hat, WithinRel(0.6, 1e-15));
  CHECK_THAT(inverse_map(0.6, 2), WithinRel(60.0, 1e-15));
}

TEST_CASE("forward map is odd in x", "[domain_map]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mag(0.0, 12.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, mag(rng));
    const auto pos = forward_map(x);
    const auto neg = forward_map(-x);
    CHECK(neg.s == pos.s);
    CHECK(neg.x_hat == -pos.x_hat);
  }
}

TEST_CASE("containment and round-trip over random magnitudes", "[domain_map]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mag(-1.0, 12.0);
  std::uniform_real_distribution<double> sign(-1.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double x = std::copysign(std::pow(10.0, mag(rng)), sign(rng));
    const auto m = forward_map(x);
    CHECK(std::abs(m.x_hat) <= 1.0);
    const double back = inverse_map(m.x_hat, m.s);
    CHECK(std::abs(back - x) <= std::abs(x) * 1e-15);
  }
}

TEST_CASE("unmap recovers monomial values", "[domain_map]") {
  // phi(x) = x^3 at x = 60: phi_hat = 0.6^3 = 0.216, s = 2.
  CHECK_THAT(unmap_basis_value(0.216, 3, 2), WithinRel(216000.0, 1e-12));
  CHECK(unmap_basis_value(0.42, 0, 7) == 0.42);
  CHECK(unmap_basis_value(0.42, 5, 0) == 0.42);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-100.0, 100.0);
  for (int rep = 0; rep < 2000; ++rep) {
    const double x = d(rng);
    for (int k = 0; k <= 12; ++k) {
      const auto m = forward_map(x);
      const double exact = std::pow(x, k);
      const double rec = unmap_basis_value(std::pow(m.x_hat, k), k, m.s);
      if (exact != 0.0) {
        CAPTURE(x, k);
        CHECK(std::abs(rec - exact) <= 1e-12 * std::abs(exact));
      }
    }
  }
}

TEST_CASE("unmap overflow is a range error", "[domain_map]") {
  CHECK_THROWS_AS(unmap_basis_value(1.0, 100, 100), std::range_error);
  CHECK_THROWS_AS(unmap_basis_value(1.0, -1, 0), invalid_config);
}

TEST_CASE("map_domain pointwise vs uniform", "[domain_map]") {
  Eigen::MatrixXd pts(2, 1);
  pts << 0.1, 0.9;
  for (auto mode : {MappingMode::Pointwise, MappingMode::Uniform}) {
    const auto mapped = map_domain(pts, mode);
    CHECK(mapped[0].s == 0);
    CHECK(mapped[1].s == 0);
    CHECK(mapped[0].x_hat[0] == 0.1);
    CHECK(mapped[1].x_hat[0] == 0.9);
  }

  pts << 0.5, 60.0;
  auto uniform = map_domain(pts, MappingMode::Uniform);
  CHECK(uniform[0].s == 2);
  CHECK(uniform[1].s == 2);
  CHECK_THAT(uniform[0].x_hat[0], WithinRel(0.005, 1e-15));
  CHECK_THAT(uniform[1].x_hat[0], WithinRel(0.6, 1e-15));

  auto pointwise = map_domain(pts, MappingMode::Pointwise);
  CHECK(pointwise[0].s == 0);
  CHECK(pointwise[1].s == 2);
  CHECK(pointwise[0].x_hat[0] == 0.5);
  CHECK_THAT(pointwise[1].x_hat[0], WithinRel(0.6, 1e-15));
}

TEST_CASE("2D points share the coordinate-wise max exponent", "[domain_map]") {
  Eigen::MatrixXd pts(1, 2);
  pts << 0.5, 60.0;
  const auto mapped = map_domain(pts, MappingMode::Pointwise);
  CHECK(mapped[0].s == 2);
  CHECK_THAT(mapped[0].x_hat[0], WithinRel(0.005, 1e-15));
  CHECK_THAT(mapped[0].x_hat[1], WithinRel(0.6, 1e-15));

  const auto per_coord = map_domain_per_coordinate(pts);
  CHECK(per_coord[0].s[0] == 0);
  CHECK(per_coord[0].s[1] == 2);
  CHECK(per_coord[0].x_hat[0] == 0.5);
}

TEST_CASE("map_domain rejects bad input", "[domain_map]") {
  Eigen::MatrixXd empty(0, 1);
  CHECK_THROWS_AS(map_domain(empty, MappingMode::Pointwise), invalid_config);
  Eigen::MatrixXd bad(1, 1);
  bad << std::nan("");
  CHECK_THROWS_AS(map_domain(bad, MappingMode::Pointwise), invalid_config);
}
