#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "homog/field.hpp"

namespace homog {

struct SolverError : std::runtime_error {
  double residual;
  SolverError(const std::string& msg, double res) : std::runtime_error(msg), residual(res) {}
};

// Pair matrix in the Mandel basis {e11, e22, sqrt(2) e12} (2D).
using PairMatrix = std::array<std::array<double, 3>, 3>;

// T = M ebar pointwise, with node<->cell interpolation for the couplings
// between diagonal and off-diagonal strain components.
SymTensorField apply_pair_matrix(const PairMatrix& m, const SymTensorField& e);

// Variable-coefficient Stokes-type saddle system
//   mass .* y - div(K e(y)) + grad p = rhs,   div y = 0,
// where K is either a scalar cell coefficient (harmonically averaged onto
// nodes) or a constant anisotropic pair matrix. `mass` holds optional
// per-face weights (rho/dt terms of implicit steps); empty means the pure
// elliptic cell-problem operator.
struct SaddleSystem {
  Grid grid;
  ScalarField k_cell;  // scalar coefficient, or a preconditioner proxy
  ScalarField k_node;
  std::optional<PairMatrix> k_tensor;
  std::optional<VectorField> mass;
  VectorField rhs;
};

SaddleSystem build_saddle_system(const Grid& g, const ScalarField& k_cell, VectorField rhs,
                                 std::optional<VectorField> mass = std::nullopt);
SaddleSystem build_saddle_system(const Grid& g, const PairMatrix& k_tensor, VectorField rhs,
                                 std::optional<VectorField> mass = std::nullopt);

enum class Preconditioner { fourier, diagonal, none };

struct SaddleOptions {
  double tol = 1e-10;          // relative residual target
  int iter_cap_per_n = 50;     // outer cap = this * max cells per axis
  Preconditioner precond = Preconditioner::fourier;
  bool throw_on_stall = true;
  // Reference for the Schur stopping test. Warm-started solves in a time
  // march pass the first (cold) residual here so later steps do not grind
  // relative to an already converged pressure; 0 uses the solve's own r0.
  double residual_scale = 0.0;
};

struct SaddleResult {
  VectorField v;
  ScalarField p;
  double div_inf = 0.0;
  double div_l2 = 0.0;
  double momentum_rel_residual = 0.0;
  double schur_r0 = 0.0;  // initial Schur residual of this solve
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
};

// Uzawa / pressure-Schur CG with a preconditioned inner momentum CG.
// Optional warm start from a previous pressure. Pressure returns mean-free.
// Throws SolverError (carrying the final residual) past the iteration cap,
// std::invalid_argument for an indefinite coefficient.
SaddleResult solve_saddle(const SaddleSystem& sys, const SaddleOptions& opt = {},
                          const ScalarField* p_warm = nullptr);

// Momentum operator application (exposed for tests and energy audits):
// out = mass .* y - div(k e(y)), boundary faces zeroed in dirichlet mode.
VectorField apply_momentum(const SaddleSystem& sys, const VectorField& y);

// Zero the constrained boundary faces (dirichlet mode no-op otherwise).
void enforce_velocity_bc(const Grid& g, VectorField& y);

}  // namespace homog
