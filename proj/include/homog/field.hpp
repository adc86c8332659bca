#pragma once

#include <span>
#include <string>
#include <vector>

#include "homog/grid.hpp"

namespace homog {

enum class Staggering { cell, face, node };

Staggering staggering_from_string(const std::string& s);
std::string to_string(Staggering s);

// Scalar sample set on one staggering. Flat row-major storage, x fastest.
// Face staggering needs the component axis (sizes differ per axis).
struct ScalarField {
  Grid grid;
  Staggering stag = Staggering::cell;
  int face_axis = -1;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(const Grid& g, Staggering s, int face_axis = -1);

  double& at(int i, int j) { return values[idx(i, j)]; }
  double at(int i, int j) const { return values[idx(i, j)]; }
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  std::span<double> data() { return values; }
  std::span<const double> data() const { return values; }

 private:
  int nx_ = 0, ny_ = 0;
};

// MAC velocity-like field: one scalar array per component, each on its faces.
struct VectorField {
  Grid grid;
  std::vector<ScalarField> comp;  // comp[a] on face_a staggering

  VectorField() = default;
  explicit VectorField(const Grid& g);

  ScalarField& operator[](int a) { return comp[a]; }
  const ScalarField& operator[](int a) const { return comp[a]; }

  std::size_t total_size() const;
  void fill(double v);
  void gather(std::vector<double>& flat) const;
  void scatter(std::span<const double> flat);
};

// Symmetric tensor on the MAC layout: diagonal components at cells,
// off-diagonal at nodes (2D: comp = {e11, e22, e12}).
struct SymTensorField {
  Grid grid;
  std::vector<ScalarField> comp;

  SymTensorField() = default;
  explicit SymTensorField(const Grid& g);

  ScalarField& diag(int a) { return comp[a]; }
  const ScalarField& diag(int a) const { return comp[a]; }
  ScalarField& offdiag() { return comp[2]; }  // 2D only
  const ScalarField& offdiag() const { return comp[2]; }

  void fill(double v);
};

// Symmetric index pairs p <= q; 2D: (0,0),(1,1),(0,1).
struct IndexPair {
  int p, q;
  bool diagonal() const { return p == q; }
};
std::vector<IndexPair> sym_pairs(int dim);

void check_same_grid(const Grid& a, const Grid& b, const char* what);

double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& f);
double max_abs(const ScalarField& f);
double max_abs(const VectorField& f);
double mean(const ScalarField& f);
void subtract_mean(ScalarField& f);

}  // namespace homog
