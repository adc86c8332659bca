#pragma once

#include "homog/field.hpp"

namespace homog {

// Discrete MAC operators. Conventions (2D):
//   cell (i,j) spans [i hx,(i+1)hx] x [j hy,(j+1)hy]
//   u-face (i,j) at (i hx, (j+1/2) hy)   -- left face of cell (i,j)
//   v-face (i,j) at ((i+1/2) hx, j hy)
//   node  (i,j) at (i hx, j hy)
// Periodic grids wrap indices; dirichlet grids store boundary faces and
// impose v = 0 there, with no-slip reflection for tangential stencils.

// Conservative cell divergence of a face field.
ScalarField discrete_div(const VectorField& v);

// Face gradient of a cell field (exact negative adjoint of discrete_div on
// periodic grids; boundary faces get 0 in dirichlet mode).
VectorField discrete_grad(const ScalarField& p);

// e(u)_ab = (d_a u_b + d_b u_a) / 2; diagonals at cells, off-diagonal at
// nodes. Dirichlet mode uses no-slip ghost reflection at boundary nodes.
SymTensorField sym_gradient(const VectorField& u);

// Scalar 5-point Laplacian = discrete_div o discrete_grad (same stencil the
// Poisson solver inverts). Neumann in dirichlet-grid mode.
ScalarField discrete_laplacian(const ScalarField& p);

// Divergence of a symmetric stress field onto faces: (div S)_a at a-faces.
// The exact negative adjoint of sym_gradient under the MAC energy pairing.
VectorField stress_divergence(const SymTensorField& s);

// Coefficient samplings from a cell coefficient field.
//
// node_coefficient assigns each node the value of one adjacent cell
// (lower-left, wrapped), keeping every node inside a single phase: a
// two-phase laminate then stays a two-material discrete system, which the
// memory-kernel identification needs (harmonic node averages introduce a
// third interface class that splits the kernel into spurious modes).
ScalarField node_coefficient(const ScalarField& k_cell);
ScalarField node_coefficient_harmonic(const ScalarField& k_cell);
VectorField face_coefficient_arithmetic(const ScalarField& k_cell);

// Pointwise tensor scale: out_ab = k * e_ab with k sampled at cells
// (diagonals) and nodes (off-diagonal, harmonic sampling supplied).
SymTensorField scale_tensor(const SymTensorField& e, const ScalarField& k_cell,
                            const ScalarField& k_node);

// sum_cells a*b*h^d style integrals for the MAC energy pairing:
// <S, E> = sum_cells (S11 E11 + S22 E22) h^d + sum_nodes 2 S12 E12 h^d.
double tensor_energy_pairing(const SymTensorField& s, const SymTensorField& e);

// Face-weighted inner product sum_faces a.b h^d (both components).
double face_inner(const VectorField& a, const VectorField& b);

}  // namespace homog
