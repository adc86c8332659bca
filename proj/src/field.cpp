#include "homog/field.hpp"

#include <cmath>
#include <stdexcept>

#include "homog/kernels.hpp"

namespace homog {

Staggering staggering_from_string(const std::string& s) {
  if (s == "cell") return Staggering::cell;
  if (s == "face") return Staggering::face;
  if (s == "node") return Staggering::node;
  throw std::invalid_argument("unknown staggering '" + s + "'");
}

std::string to_string(Staggering s) {
  switch (s) {
    case Staggering::cell: return "cell";
    case Staggering::face: return "face";
    case Staggering::node: return "node";
  }
  return "?";
}

ScalarField::ScalarField(const Grid& g, Staggering s, int axis) : grid(g), stag(s), face_axis(axis) {
  if (g.dim != 2) throw std::invalid_argument("2D field layout requested on non-2D grid");
  switch (s) {
    case Staggering::cell:
      nx_ = g.n[0];
      ny_ = g.n[1];
      break;
    case Staggering::node:
      nx_ = g.nnode(0);
      ny_ = g.nnode(1);
      break;
    case Staggering::face:
      if (axis == 0) {
        nx_ = g.nfx(0);
        ny_ = g.n[1];
      } else if (axis == 1) {
        nx_ = g.n[0];
        ny_ = g.nfx(1);
      } else {
        throw std::invalid_argument("face staggering needs component axis 0 or 1");
      }
      break;
  }
  values.assign(static_cast<std::size_t>(nx_) * ny_, 0.0);
}

VectorField::VectorField(const Grid& g) : grid(g) {
  if (g.dim != 2) throw std::invalid_argument("VectorField solver layout is 2D");
  comp.reserve(2);
  for (int a = 0; a < 2; ++a) comp.emplace_back(g, Staggering::face, a);
}

std::size_t VectorField::total_size() const {
  std::size_t s = 0;
  for (const auto& c : comp) s += c.values.size();
  return s;
}

void VectorField::fill(double v) {
  for (auto& c : comp) kernels::fill(c.data(), v);
}

void VectorField::gather(std::vector<double>& flat) const {
  flat.resize(total_size());
  std::size_t off = 0;
  for (const auto& c : comp) {
    kernels::copy(c.data(), std::span<double>(flat.data() + off, c.values.size()));
    off += c.values.size();
  }
}

void VectorField::scatter(std::span<const double> flat) {
  std::size_t off = 0;
  for (auto& c : comp) {
    kernels::copy(std::span<const double>(flat.data() + off, c.values.size()), c.data());
    off += c.values.size();
  }
}

SymTensorField::SymTensorField(const Grid& g) : grid(g) {
  if (g.dim != 2) throw std::invalid_argument("SymTensorField solver layout is 2D");
  comp.reserve(3);
  comp.emplace_back(g, Staggering::cell);
  comp.emplace_back(g, Staggering::cell);
  comp.emplace_back(g, Staggering::node);
}

void SymTensorField::fill(double v) {
  for (auto& c : comp) kernels::fill(c.data(), v);
}

std::vector<IndexPair> sym_pairs(int dim) {
  // Mandel/Voigt ordering: diagonal pairs first, then off-diagonals.
  std::vector<IndexPair> out;
  for (int p = 0; p < dim; ++p) out.push_back({p, p});
  for (int p = 0; p < dim; ++p)
    for (int q = p + 1; q < dim; ++q) out.push_back({p, q});
  return out;
}

void check_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

double l2_norm(const ScalarField& f) { return std::sqrt(kernels::dot(f.data(), f.data())); }

double l2_norm(const VectorField& f) {
  double s = 0.0;
  for (const auto& c : f.comp) s += kernels::dot(c.data(), c.data());
  return std::sqrt(s);
}

double max_abs(const ScalarField& f) { return kernels::max_abs(f.data()); }

double max_abs(const VectorField& f) {
  double m = 0.0;
  for (const auto& c : f.comp) m = std::max(m, kernels::max_abs(c.data()));
  return m;
}

double mean(const ScalarField& f) {
  if (f.values.empty()) return 0.0;
  return kernels::sum(f.data()) / static_cast<double>(f.values.size());
}

void subtract_mean(ScalarField& f) {
  const double m = mean(f);
  double* p = f.values.data();
  kernels::parallel_for(f.values.size(), [=](std::size_t i) { p[i] -= m; });
}

}  // namespace homog
