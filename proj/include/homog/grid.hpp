#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace homog {

enum class BcMode { periodic, dirichlet };

BcMode bc_mode_from_string(const std::string& s);
std::string to_string(BcMode m);

// Uniform Cartesian MAC grid: pressure and cell data at cell centers,
// velocity components on faces, mixed strain components on nodes.
// Cells per axis must be even so staggered layouts tile cleanly.
struct Grid {
  int dim = 2;
  std::array<int, 3> n{0, 0, 1};         // cells per axis (n[2]=1 in 2D)
  std::array<double, 3> length{1.0, 1.0, 1.0};
  BcMode bc = BcMode::periodic;

  Grid() = default;
  Grid(int dim_, std::array<int, 3> n_, std::array<double, 3> length_, BcMode bc_);

  double h(int axis) const { return length[axis] / n[axis]; }
  double cell_volume() const;
  std::size_t cell_count() const;
  // Face count for velocity component `axis`: periodic grids wrap, dirichlet
  // grids carry the physical boundary faces explicitly.
  std::size_t face_count(int axis) const;
  std::size_t node_count() const;  // 2D corner nodes

  int nfx(int axis) const;  // faces along `axis` direction for component axis
  int nnode(int axis) const;

  bool periodic() const { return bc == BcMode::periodic; }
  bool operator==(const Grid& o) const;
};

// Throws std::invalid_argument describing the violated invariant.
void validate(const Grid& g);

}  // namespace homog
