#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homog/kernels.hpp"
#include "homog/microscale.hpp"
#include "homog/operators.hpp"
#include "homog/saddle.hpp"

using namespace homog;

namespace {

Grid grid64(BcMode bc = BcMode::periodic) { return Grid(2, {64, 64, 1}, {1.0, 1.0, 1.0}, bc); }

ScalarField constant_cell(const Grid& g, double v) {
  ScalarField f(g, Staggering::cell);
  kernels::fill(f.data(), v);
  return f;
}

ScalarField laminate_coef(const Grid& g, double k1, double k2, int period_cells) {
  ScalarField f(g, Staggering::cell);
  const int stripe = period_cells / 2;
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i)
      f.at(i, j) = (i % period_cells) < stripe ? k1 : k2;
  return f;
}

// body force from a constant unit shear strain: div(k I^{12})
VectorField shear_unit_load(const Grid& g, const ScalarField& k_cell) {
  SymTensorField s(g);
  ScalarField kn = node_coefficient(k_cell);
  for (std::size_t i = 0; i < s.offdiag().values.size(); ++i)
    s.offdiag().values[i] = 0.5 * kn.values[i];
  return stress_divergence(s);
}

}  // namespace

TEST_CASE("zero rhs gives zero velocity and pressure") {
  Grid g = grid64();
  SaddleSystem sys = build_saddle_system(g, constant_cell(g, 1.0), VectorField(g));
  SaddleResult r = solve_saddle(sys);
  CHECK(l2_norm(r.v) == 0.0);
  CHECK(l2_norm(r.p) == 0.0);
}

TEST_CASE("single-mode body force reproduces the discrete profile") {
  // K == 1, f = (sin(2 pi y), 0): the stress operator is -div(e(v)), so the
  // x-independent mode obeys (1/2) * (discrete -d2/dy2) v = f
  Grid g = grid64();
  VectorField f(g);
  const double hy = g.h(1);
  for (int j = 0; j < f[0].ny(); ++j) {
    const double y = (j + 0.5) * hy;
    for (int i = 0; i < f[0].nx(); ++i)
      f[0].at(i, j) = std::sin(2.0 * std::numbers::pi * y);
  }
  SaddleSystem sys = build_saddle_system(g, constant_cell(g, 1.0), f);
  SaddleResult r = solve_saddle(sys);
  const double lam_h =
      2.0 * std::pow(std::sin(std::numbers::pi / g.n[1]), 2) * g.n[1] * g.n[1] / 1.0;
  const double amp = 1.0 / (0.5 * 2.0 * lam_h);
  for (int j = 0; j < 64; j += 7)
    for (int i = 0; i < 64; i += 7)
      CHECK(r.v[0].at(i, j) ==
            doctest::Approx(amp * std::sin(2.0 * std::numbers::pi * (j + 0.5) * hy)).epsilon(1e-7));
  // continuum amplitude sin(2 pi y)/(2 pi^2) within discretization error
  const double cont = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);
  CHECK(amp == doctest::Approx(cont).epsilon(2e-3));
  CHECK(max_abs(r.p) <= 1e-10);
  CHECK(r.div_inf <= 1e-10);
  CHECK(r.momentum_rel_residual <= 1e-9);
}

TEST_CASE("laminate shear cell problem hits the harmonic mean exactly") {
  Grid g = grid64();
  ScalarField k = laminate_coef(g, 1.0, 2.0, 16);
  SaddleSystem sys = build_saddle_system(g, k, shear_unit_load(g, k));
  SaddleResult r = solve_saddle(sys);
  // flux F = k (I^{12} + e(n)); node average of F12 = harmonic mean / 2
  SymTensorField en = sym_gradient(r.v);
  ScalarField kn = node_coefficient(k);
  double favg = 0.0;
  for (std::size_t i = 0; i < en.offdiag().values.size(); ++i)
    favg += kn.values[i] * (0.5 + en.offdiag().values[i]);
  favg /= static_cast<double>(en.offdiag().values.size());
  const double harm = 1.0 / (0.5 / 1.0 + 0.5 / 2.0);
  CHECK(favg == doctest::Approx(0.5 * harm).epsilon(1e-8));
  CHECK(r.div_inf <= 1e-8);
  // laminate correctors vary only along the lamination direction
  double transverse = 0.0;
  for (int j = 1; j < 64; ++j)
    for (int i = 0; i < 64; ++i)
      transverse = std::max(transverse, std::fabs(r.v[1].at(i, j) - r.v[1].at(i, 0)));
  CHECK(transverse <= 1e-8);
}

TEST_CASE("energy identity: rhs dot v equals the weighted Dirichlet energy") {
  Grid g = grid64();
  ScalarField k = laminate_coef(g, 1.0, 3.0, 16);
  VectorField f = shear_unit_load(g, k);
  SaddleSystem sys = build_saddle_system(g, k, f);
  SaddleResult r = solve_saddle(sys);
  const double work = face_inner(f, r.v);
  SymTensorField ev = sym_gradient(r.v);
  const double energy = tensor_energy_pairing(scale_tensor(ev, k, node_coefficient(k)), ev);
  CHECK(work == doctest::Approx(energy).epsilon(1e-8));
}

TEST_CASE("scale equivariance: scaling K and rhs by 4 leaves velocity unchanged") {
  Grid g = grid64();
  ScalarField k = laminate_coef(g, 1.0, 2.0, 16);
  VectorField f = shear_unit_load(g, k);
  SaddleSystem s1 = build_saddle_system(g, k, f);
  SaddleResult r1 = solve_saddle(s1);

  ScalarField k4 = k;
  kernels::scale(k4.data(), 4.0);
  VectorField f4 = f;
  for (int c = 0; c < 2; ++c) kernels::scale(f4[c].data(), 4.0);
  SaddleSystem s4 = build_saddle_system(g, k4, f4);
  SaddleResult r4 = solve_saddle(s4);

  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < r1.v[c].values.size(); ++i)
      CHECK(r1.v[c].values[i] == r4.v[c].values[i]);  // bitwise under power-of-two scaling
}

TEST_CASE("indefinite and degenerate coefficients rejected") {
  Grid g = grid64();
  ScalarField neg = constant_cell(g, 1.0);
  neg.at(3, 3) = -0.5;
  CHECK_THROWS_AS((void)build_saddle_system(g, neg, VectorField(g)), std::invalid_argument);
  ScalarField zero = constant_cell(g, 1.0);
  zero.at(3, 3) = 0.0;
  CHECK_THROWS_AS((void)build_saddle_system(g, zero, VectorField(g)), std::invalid_argument);
  // degenerate coefficient is fine with a mass term (combined implicit operator)
  VectorField mass(g);
  mass.fill(1.0);
  CHECK_NOTHROW((void)build_saddle_system(g, zero, VectorField(g), mass));
}

TEST_CASE("mass term system solves and converges (time-step operator)") {
  Grid g = grid64();
  ScalarField k = laminate_coef(g, 0.5, 2.0, 16);
  VectorField f = shear_unit_load(g, k);
  VectorField mass(g);
  mass.fill(100.0);
  SaddleSystem sys = build_saddle_system(g, k, f, mass);
  SaddleResult r = solve_saddle(sys);
  CHECK(r.div_inf <= 1e-10);
  CHECK(r.momentum_rel_residual <= 1e-8);
}

TEST_CASE("dirichlet mode: no-slip walls and clean divergence") {
  Grid g = grid64(BcMode::dirichlet);
  ScalarField k = constant_cell(g, 1.0);
  VectorField f(g);
  for (int j = 0; j < f[0].ny(); ++j)
    for (int i = 0; i < f[0].nx(); ++i)
      f[0].at(i, j) = std::sin(2.0 * std::numbers::pi * (j + 0.5) * g.h(1));
  enforce_velocity_bc(g, f);
  SaddleOptions opt;
  opt.precond = Preconditioner::diagonal;
  SaddleSystem sys = build_saddle_system(g, k, f);
  SaddleResult r = solve_saddle(sys, opt);
  CHECK(r.div_inf <= 1e-9);
  for (int j = 0; j < r.v[0].ny(); ++j) {
    CHECK(r.v[0].at(0, j) == 0.0);
    CHECK(r.v[0].at(r.v[0].nx() - 1, j) == 0.0);
  }
}

TEST_CASE("tensor-coefficient operator matches the scalar path for isotropic law") {
  Grid g = grid64();
  PairMatrix m{};
  for (int a = 0; a < 3; ++a) m[a][a] = 1.7;
  VectorField y = make_random_divfree_velocity(g, 5, 1.0);
  SaddleSystem st = build_saddle_system(g, m, VectorField(g));
  SaddleSystem ss = build_saddle_system(g, constant_cell(g, 1.7), VectorField(g));
  VectorField at = apply_momentum(st, y);
  VectorField as = apply_momentum(ss, y);
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < at[c].values.size(); ++i)
      CHECK(at[c].values[i] == doctest::Approx(as[c].values[i]).epsilon(1e-14));
}
