#pragma once

#include "homog/field.hpp"

namespace homog {

struct PoissonResult {
  ScalarField phi;
  double residual_inf = 0.0;  // ||lap(phi) - rhs||_inf
  int iterations = 0;
};

// Solve lap(phi) = rhs for a cell field, grad(phi).nu = 0 on the boundary in
// dirichlet-grid mode, periodic otherwise; phi returned mean-free.
// rhs must be mean-free to rel_compat (relative to ||rhs||_inf), else throws
// std::invalid_argument reporting the mean.
PoissonResult solve_neumann_poisson(const ScalarField& rhs, double tol = 1e-12,
                                    double rel_compat = 1e-12);

}  // namespace homog
