#include "homog/grid.hpp"

#include <stdexcept>

namespace homog {

BcMode bc_mode_from_string(const std::string& s) {
  if (s == "periodic") return BcMode::periodic;
  if (s == "dirichlet") return BcMode::dirichlet;
  throw std::invalid_argument("unknown bc mode '" + s + "' (periodic|dirichlet)");
}

std::string to_string(BcMode m) { return m == BcMode::periodic ? "periodic" : "dirichlet"; }

Grid::Grid(int dim_, std::array<int, 3> n_, std::array<double, 3> length_, BcMode bc_)
    : dim(dim_), n(n_), length(length_), bc(bc_) {
  if (dim == 2) {
    n[2] = 1;
    length[2] = 1.0;
  }
  validate(*this);
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= h(a);
  return v;
}

std::size_t Grid::cell_count() const {
  std::size_t c = 1;
  for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(n[a]);
  return c;
}

int Grid::nfx(int axis) const {
  // number of face positions along the component's own axis
  return periodic() ? n[axis] : n[axis] + 1;
}

int Grid::nnode(int axis) const { return periodic() ? n[axis] : n[axis] + 1; }

std::size_t Grid::face_count(int axis) const {
  std::size_t c = 1;
  for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(a == axis ? nfx(axis) : n[a]);
  return c;
}

std::size_t Grid::node_count() const {
  std::size_t c = 1;
  for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(nnode(a));
  return c;
}

bool Grid::operator==(const Grid& o) const {
  return dim == o.dim && n == o.n && length == o.length && bc == o.bc;
}

void validate(const Grid& g) {
  if (g.dim != 2 && g.dim != 3) throw std::invalid_argument("grid dim must be 2 or 3");
  for (int a = 0; a < g.dim; ++a) {
    if (g.n[a] < 8) throw std::invalid_argument("grid n must be >= 8 per axis");
    if (g.n[a] % 2 != 0) throw std::invalid_argument("grid n must be even per axis");
    if (!(g.length[a] > 0.0)) throw std::invalid_argument("grid length must be positive");
  }
}

}  // namespace homog
