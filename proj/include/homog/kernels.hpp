#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

// Data-parallel building blocks shared by every stencil loop in the solver.
//
// Two backends sit behind one dispatch point: a serial reference and an
// OpenMP version. Results are bitwise identical between backends and across
// thread counts: elementwise maps carry no reduction, and reductions
// accumulate fixed-size blocks in index order regardless of how the blocks
// were computed.

namespace homog::kernels {

enum class Backend { serial, openmp };

// Process-wide backend selection. Defaults to openmp when compiled in.
Backend backend();
void set_backend(Backend b);
Backend backend_from_string(const std::string& name);
std::string to_string(Backend b);

// Block size for deterministic reductions. Fixed so that sums are
// independent of thread count.
inline constexpr std::size_t reduction_block = 4096;

namespace detail {
void parallel_for_impl(std::size_t n, const std::function<void(std::size_t, std::size_t)>& range_fn);
}

// body(i) for i in [0, n). The OpenMP backend splits [0, n) into ranges.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  detail::parallel_for_impl(n, [&body](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) body(i);
  });
}

// Deterministic sum of accum(i) over [0, n): per-block serial accumulation,
// blocks summed in index order.
double block_sum(std::size_t n, const std::function<double(std::size_t)>& accum);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double max_abs(std::span<const double> a);

void axpy(double alpha, std::span<const double> x, std::span<double> y);   // y += alpha x
void scale(std::span<double> x, double alpha);
void copy(std::span<const double> src, std::span<double> dst);
void fill(std::span<double> x, double value);

}  // namespace homog::kernels
