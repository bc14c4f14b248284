#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "polybasis/activation.hpp"

using namespace polybasis;

TEST_CASE("zero and threshold values", "[activations]") {
  CHECK(activation_eval(ActivationKind::Sigmoid, 0.0) == 0.5);
  CHECK(activation_eval(ActivationKind::ReLU, -2.0) == 0.0);
  CHECK(activation_eval(ActivationKind::ReLU, 3.0) == 3.0);
  CHECK(activation_eval(ActivationKind::Mish, 0.0) == 0.0);
  CHECK(activation_eval(ActivationKind::GELU, 0.0) == 0.0);
  CHECK(activation_eval(ActivationKind::SELU, 0.0) == 0.0);
  CHECK(activation_eval(ActivationKind::CELU, 0.0) == 0.0);
}

TEST_CASE("SELU at 1 equals lambda", "[activations]") {
  CHECK_THAT(activation_eval(ActivationKind::SELU, 1.0),
             Catch::Matchers::WithinRel(1.0507009873554805, 1e-12));
}

TEST_CASE("tanh is odd, sigmoid is shifted-odd", "[activations]") {
  for (double x : {0.1, 0.7, 2.3, 11.0}) {
    CHECK(activation_eval(ActivationKind::Tanh, -x) ==
          -activation_eval(ActivationKind::Tanh, x));
    CHECK_THAT(activation_eval(ActivationKind::Sigmoid, -x),
               Catch::Matchers::WithinAbs(
                   1.0 - activation_eval(ActivationKind::Sigmoid, x), 1e-15));
  }
}

TEST_CASE("finite values and gradients up to |x| = 700", "[activations]") {
  for (ActivationKind kind : kAllActivations) {
    for (double x : {-700.0, -100.0, -35.0, -1.0, 0.0, 1.0, 35.0, 100.0, 700.0}) {
      CAPTURE(to_string(kind), x);
      CHECK(std::isfinite(activation_eval(kind, x)));
      CHECK(std::isfinite(activation_grad(kind, x)));
    }
  }
}

TEST_CASE("asymptotic limits are exact, not overflowed", "[activations]") {
  CHECK(activation_eval(ActivationKind::Sigmoid, 700.0) == 1.0);
  CHECK_THAT(activation_eval(ActivationKind::Sigmoid, -700.0),
             Catch::Matchers::WithinAbs(0.0, 1e-290));
  CHECK(activation_eval(ActivationKind::Tanh, 700.0) == 1.0);
  // Mish(x) -> x for large x, -> 0 for very negative x.
  CHECK_THAT(activation_eval(ActivationKind::Mish, 700.0),
             Catch::Matchers::WithinRel(700.0, 1e-12));
  CHECK_THAT(activation_eval(ActivationKind::Mish, -700.0),
             Catch::Matchers::WithinAbs(0.0, 1e-290));
  // SELU/CELU saturate on the negative side.
  CHECK_THAT(activation_eval(ActivationKind::SELU, -700.0),
             Catch::Matchers::WithinRel(-1.0507009873554805 * 1.6732632423543772,
                                        1e-12));
  CHECK_THAT(activation_eval(ActivationKind::CELU, -700.0),
             Catch::Matchers::WithinRel(-1.0, 1e-12));
}

TEST_CASE("analytic derivative matches central differences", "[activations]") {
  const double h = 1e-6;
  for (ActivationKind kind : kAllActivations) {
    for (double x : {-4.3, -2.0, -0.9, -0.2, 0.3, 0.8, 1.7, 3.5}) {
      CAPTURE(to_string(kind), x);
      const double fd = (activation_eval(kind, x + h) -
                         activation_eval(kind, x - h)) / (2.0 * h);
      CHECK_THAT(activation_grad(kind, x), Catch::Matchers::WithinAbs(fd, 1e-7));
    }
  }
}

TEST_CASE("GELU matches the tanh approximation at reference points",
          "[activations]") {
  auto gelu_ref = [](double x) {
    return 0.5 * x *
           (1.0 + std::tanh(std::sqrt(2.0 / M_PI) *
                            (x + 0.044715 * x * x * x)));
  };
  for (double x : {-3.0, -1.0, -0.5, 0.5, 1.0, 3.0})
    CHECK_THAT(activation_eval(ActivationKind::GELU, x),
               Catch::Matchers::WithinRel(gelu_ref(x), 1e-14));
}

TEST_CASE("activation name round-trip", "[activations]") {
  for (ActivationKind kind : kAllActivations)
    CHECK(activation_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(activation_from_string("swish"), invalid_config);
}
