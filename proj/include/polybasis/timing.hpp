#pragma once

#include <chrono>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "polybasis/activation.hpp"
#include "polybasis/common.hpp"

namespace polybasis {

struct ActivationTiming {
  ActivationKind kind;
  long n_iters = 0;
  long batch_size = 0;
  std::uint64_t forward_ns = 0;
  std::uint64_t backward_ns = 0;
};

/// Times n_iters elementwise forward and gradient passes on a fixed random
/// batch. 10 untimed warm-up iterations; monotonic clock; totals reported.
inline ActivationTiming time_activation(ActivationKind kind, long n_iters,
                                        long batch_size = 100000) {
  if (n_iters < 1) throw invalid_config("time_activation: n_iters must be >= 1");
  if (batch_size < 1) throw invalid_config("time_activation: batch_size must be >= 1");

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  Eigen::ArrayXd x(batch_size), out(batch_size);
  for (long i = 0; i < batch_size; ++i) x[i] = d(rng);

  volatile double sink = 0.0;
  auto run_forward = [&] {
    for (long i = 0; i < batch_size; ++i) out[i] = activation_eval(kind, x[i]);
    sink = sink + out[0];
  };
  auto run_backward = [&] {
    for (long i = 0; i < batch_size; ++i) out[i] = activation_grad(kind, x[i]);
    sink = sink + out[0];
  };

  using clock = std::chrono::steady_clock;
  ActivationTiming t{kind, n_iters, batch_size, 0, 0};

  for (int i = 0; i < 10; ++i) run_forward();
  auto t0 = clock::now();
  for (long i = 0; i < n_iters; ++i) run_forward();
  t.forward_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count());

  for (int i = 0; i < 10; ++i) run_backward();
  t0 = clock::now();
  for (long i = 0; i < n_iters; ++i) run_backward();
  t.backward_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count());

  (void)sink;
  return t;
}

}  // namespace polybasis
