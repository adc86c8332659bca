#include "homog/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#ifdef HOMOG_HAVE_OPENMP
#include <omp.h>
#endif

namespace homog::kernels {

namespace {
std::atomic<Backend> g_backend{
#ifdef HOMOG_HAVE_OPENMP
    Backend::openmp
#else
    Backend::serial
#endif
};
}

Backend backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
#ifndef HOMOG_HAVE_OPENMP
  b = Backend::serial;
#endif
  g_backend.store(b, std::memory_order_relaxed);
}

Backend backend_from_string(const std::string& name) {
  if (name == "serial") return Backend::serial;
  if (name == "openmp") return Backend::openmp;
  throw std::invalid_argument("unknown kernel backend '" + name + "' (serial|openmp)");
}

std::string to_string(Backend b) { return b == Backend::serial ? "serial" : "openmp"; }

namespace detail {

void parallel_for_impl(std::size_t n, const std::function<void(std::size_t, std::size_t)>& range_fn) {
  if (n == 0) return;
#ifdef HOMOG_HAVE_OPENMP
  if (backend() == Backend::openmp && n >= 2048) {
    const std::size_t nblocks = (n + reduction_block - 1) / reduction_block;
#pragma omp parallel for schedule(static)
    for (long long bi = 0; bi < static_cast<long long>(nblocks); ++bi) {
      const std::size_t lo = static_cast<std::size_t>(bi) * reduction_block;
      const std::size_t hi = std::min(lo + reduction_block, n);
      range_fn(lo, hi);
    }
    return;
  }
#endif
  range_fn(0, n);
}

}  // namespace detail

double block_sum(std::size_t n, const std::function<double(std::size_t)>& accum) {
  if (n == 0) return 0.0;
  const std::size_t nblocks = (n + reduction_block - 1) / reduction_block;
  std::vector<double> partial(nblocks, 0.0);
#ifdef HOMOG_HAVE_OPENMP
  if (backend() == Backend::openmp && n >= 2048) {
#pragma omp parallel for schedule(static)
    for (long long bi = 0; bi < static_cast<long long>(nblocks); ++bi) {
      const std::size_t lo = static_cast<std::size_t>(bi) * reduction_block;
      const std::size_t hi = std::min(lo + reduction_block, n);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += accum(i);
      partial[static_cast<std::size_t>(bi)] = s;
    }
  } else
#endif
  {
    for (std::size_t bi = 0; bi < nblocks; ++bi) {
      const std::size_t lo = bi * reduction_block;
      const std::size_t hi = std::min(lo + reduction_block, n);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += accum(i);
      partial[bi] = s;
    }
  }
  double total = 0.0;
  for (double p : partial) total += p;  // fixed order
  return total;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  return block_sum(a.size(), [pa, pb](std::size_t i) { return pa[i] * pb[i]; });
}

double sum(std::span<const double> a) {
  const double* pa = a.data();
  return block_sum(a.size(), [pa](std::size_t i) { return pa[i]; });
}

double max_abs(std::span<const double> a) {
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  const double* pa = a.data();
  const std::size_t nblocks = (n + reduction_block - 1) / reduction_block;
  std::vector<double> partial(nblocks, 0.0);
#ifdef HOMOG_HAVE_OPENMP
  if (backend() == Backend::openmp && n >= 2048) {
#pragma omp parallel for schedule(static)
    for (long long bi = 0; bi < static_cast<long long>(nblocks); ++bi) {
      const std::size_t lo = static_cast<std::size_t>(bi) * reduction_block;
      const std::size_t hi = std::min(lo + reduction_block, n);
      double m = 0.0;
      for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::fabs(pa[i]));
      partial[static_cast<std::size_t>(bi)] = m;
    }
  } else
#endif
  {
    for (std::size_t bi = 0; bi < nblocks; ++bi) {
      const std::size_t lo = bi * reduction_block;
      const std::size_t hi = std::min(lo + reduction_block, n);
      double m = 0.0;
      for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::fabs(pa[i]));
      partial[bi] = m;
    }
  }
  double m = 0.0;
  for (double p : partial) m = std::max(m, p);
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const double* px = x.data();
  double* py = y.data();
  parallel_for(x.size(), [=](std::size_t i) { py[i] += alpha * px[i]; });
}

void scale(std::span<double> x, double alpha) {
  double* px = x.data();
  parallel_for(x.size(), [=](std::size_t i) { px[i] *= alpha; });
}

void copy(std::span<const double> src, std::span<double> dst) {
  const double* ps = src.data();
  double* pd = dst.data();
  parallel_for(src.size(), [=](std::size_t i) { pd[i] = ps[i]; });
}

void fill(std::span<double> x, double value) {
  double* px = x.data();
  parallel_for(x.size(), [=](std::size_t i) { px[i] = value; });
}

}  // namespace homog::kernels
