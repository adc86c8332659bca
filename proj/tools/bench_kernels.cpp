// Compares the serial reference kernels against the OpenMP backend on the
// hot loops of the solver: field maps, reductions, MAC stencils, one full
// momentum matvec and one transport step.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "homog/kernels.hpp"
#include "homog/microscale.hpp"
#include "homog/operators.hpp"
#include "homog/saddle.hpp"

using namespace homog;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

struct Case {
  std::string name;
  std::function<void()> body;
  int reps;
};

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 256;
  Grid g(2, {n, n, 1}, {1.0, 1.0, 1.0}, BcMode::periodic);
  std::printf("kernel benchmark on a %d x %d periodic grid\n", n, n);

  ScalarField a(g, Staggering::cell), b(g, Staggering::cell);
  SplitMix64 rng(7);
  for (auto& v : a.values) v = rng.uniform();
  for (auto& v : b.values) v = rng.uniform();
  VectorField vel = make_random_divfree_velocity(g, 11, 0.5);
  ScalarField k_cell = a;
  for (auto& v : k_cell.values) v += 1.0;  // keep positive
  SaddleSystem sys = build_saddle_system(g, k_cell, VectorField(g));
  const double dt = 0.4 * g.h(0) / 0.5;

  std::vector<Case> cases = {
      {"axpy", [&] { kernels::axpy(0.5, a.data(), b.data()); }, 200},
      {"dot", [&] { (void)kernels::dot(a.data(), b.data()); }, 200},
      {"divergence", [&] { (void)discrete_div(vel); }, 100},
      {"sym_gradient", [&] { (void)sym_gradient(vel); }, 100},
      {"momentum matvec", [&] { (void)apply_momentum(sys, vel); }, 50},
      {"upwind transport", [&] { (void)advect_indicator(a, vel, dt); }, 50},
  };

  std::printf("%-18s %12s %12s %9s\n", "kernel", "serial (ms)", "openmp (ms)", "speedup");
  for (auto& c : cases) {
    kernels::set_backend(kernels::Backend::serial);
    const double ts = time_ms(c.body, c.reps);
    kernels::set_backend(kernels::Backend::openmp);
    const double tp = time_ms(c.body, c.reps);
    std::printf("%-18s %12.4f %12.4f %8.2fx\n", c.name.c_str(), ts, tp, ts / tp);
  }

  // backend equivalence spot check
  kernels::set_backend(kernels::Backend::serial);
  ScalarField ds = discrete_div(vel);
  kernels::set_backend(kernels::Backend::openmp);
  ScalarField dp = discrete_div(vel);
  double diff = 0.0;
  for (std::size_t i = 0; i < ds.values.size(); ++i)
    diff = std::max(diff, std::abs(ds.values[i] - dp.values[i]));
  std::printf("backend max difference on divergence: %g\n", diff);
  return diff == 0.0 ? 0 : 1;
}
