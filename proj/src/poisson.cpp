#include "homog/poisson.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "homog/fft.hpp"
#include "homog/kernels.hpp"
#include "homog/operators.hpp"

namespace homog {

namespace {

ScalarField fft_poisson_periodic(const ScalarField& rhs) {
  const Grid& g = rhs.grid;
  const int nx = g.n[0], ny = g.n[1];
  const double hx = g.h(0), hy = g.h(1);
  std::vector<std::complex<double>> data(rhs.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = rhs.values[i];
  fft::transform2d(data, nx, ny, -1);
  for (int j = 0; j < ny; ++j) {
    const double sy = std::sin(std::numbers::pi * j / ny);
    for (int i = 0; i < nx; ++i) {
      const double sx = std::sin(std::numbers::pi * i / nx);
      const double lam = -4.0 * (sx * sx / (hx * hx) + sy * sy / (hy * hy));
      auto& v = data[static_cast<std::size_t>(j) * nx + i];
      v = (i == 0 && j == 0) ? 0.0 : v / lam;
    }
  }
  fft::transform2d(data, nx, ny, +1);
  ScalarField phi(g, Staggering::cell);
  for (std::size_t i = 0; i < data.size(); ++i) phi.values[i] = data[i].real();
  return phi;
}

// CG on -lap (SPD on the mean-free subspace), Jacobi-free; used for
// dirichlet-grid Neumann problems and non power-of-two grids.
ScalarField cg_poisson(const ScalarField& rhs, double tol, int& iters) {
  const Grid& g = rhs.grid;
  ScalarField x(g, Staggering::cell);
  ScalarField r = rhs;
  kernels::scale(r.data(), -1.0);  // solve (-lap) x = -rhs
  subtract_mean(r);
  ScalarField p = r;
  double rr = kernels::dot(r.data(), r.data());
  const double rr0 = rr;
  if (rr0 == 0.0) {
    iters = 0;
    return x;
  }
  const int cap = 20 * (g.n[0] + g.n[1]) + 200;
  for (iters = 0; iters < cap; ++iters) {
    ScalarField ap = discrete_laplacian(p);
    kernels::scale(ap.data(), -1.0);
    const double pap = kernels::dot(p.data(), ap.data());
    const double alpha = rr / pap;
    kernels::axpy(alpha, p.data(), x.data());
    kernels::axpy(-alpha, ap.data(), r.data());
    const double rr_new = kernels::dot(r.data(), r.data());
    if (rr_new <= tol * tol * rr0) {
      ++iters;
      break;
    }
    const double beta = rr_new / rr;
    double* pp = p.values.data();
    const double* pr = r.values.data();
    kernels::parallel_for(p.values.size(), [=](std::size_t i) { pp[i] = pr[i] + beta * pp[i]; });
    rr = rr_new;
  }
  return x;
}

}  // namespace

PoissonResult solve_neumann_poisson(const ScalarField& rhs, double tol, double rel_compat) {
  if (rhs.stag != Staggering::cell)
    throw std::invalid_argument("solve_neumann_poisson: expects cell field");
  const double m = mean(rhs);
  const double scale = max_abs(rhs);
  if (scale > 0.0 && std::fabs(m) > rel_compat * scale) {
    std::ostringstream os;
    os << "solve_neumann_poisson: incompatible rhs, mean = " << m << " (|rhs|_inf = " << scale
       << ")";
    throw std::invalid_argument(os.str());
  }

  PoissonResult res;
  if (scale == 0.0) {
    res.phi = ScalarField(rhs.grid, Staggering::cell);
    return res;
  }

  ScalarField b = rhs;
  subtract_mean(b);  // remove rounding-level mean before solving

  if (rhs.grid.periodic() && fft::is_pow2(rhs.grid.n[0]) && fft::is_pow2(rhs.grid.n[1])) {
    res.phi = fft_poisson_periodic(b);
    res.iterations = 1;
  } else {
    res.phi = cg_poisson(b, tol * 1e-2, res.iterations);
  }
  subtract_mean(res.phi);

  ScalarField check = discrete_laplacian(res.phi);
  kernels::axpy(-1.0, b.data(), check.data());
  res.residual_inf = max_abs(check);
  return res;
}

}  // namespace homog
