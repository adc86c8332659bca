#include "homog/operators.hpp"

#include <stdexcept>

#include "homog/kernels.hpp"

namespace homog {

namespace {

inline int wrap(int i, int n) {
  if (i < 0) return i + n;
  if (i >= n) return i - n;
  return i;
}

struct Dims {
  int ncx, ncy;      // cells
  int nux, nuy;      // u faces
  int nvx, nvy;      // v faces
  int nnx, nny;      // nodes
  double hx, hy, vol;
  bool per;
};

Dims dims(const Grid& g) {
  Dims d;
  d.ncx = g.n[0];
  d.ncy = g.n[1];
  d.nux = g.nfx(0);
  d.nuy = g.n[1];
  d.nvx = g.n[0];
  d.nvy = g.nfx(1);
  d.nnx = g.nnode(0);
  d.nny = g.nnode(1);
  d.hx = g.h(0);
  d.hy = g.h(1);
  d.vol = g.cell_volume();
  d.per = g.periodic();
  return d;
}

void require_face(const VectorField& v, const char* op) {
  if (v.comp.size() != 2 || v.comp[0].stag != Staggering::face)
    throw std::invalid_argument(std::string(op) + ": expects a face-staggered vector field");
}

}  // namespace

ScalarField discrete_div(const VectorField& v) {
  require_face(v, "discrete_div");
  const Grid& g = v.grid;
  const Dims d = dims(g);
  ScalarField out(g, Staggering::cell);
  const ScalarField& u = v[0];
  const ScalarField& w = v[1];
  double* po = out.values.data();
  kernels::parallel_for(out.values.size(), [&, po](std::size_t c) {
    const int i = static_cast<int>(c % d.ncx);
    const int j = static_cast<int>(c / d.ncx);
    const double ur = d.per ? u.at(wrap(i + 1, d.nux), j) : u.at(i + 1, j);
    const double ul = u.at(i, j);
    const double vt = d.per ? w.at(i, wrap(j + 1, d.nvy)) : w.at(i, j + 1);
    const double vb = w.at(i, j);
    po[c] = (ur - ul) / d.hx + (vt - vb) / d.hy;
  });
  return out;
}

VectorField discrete_grad(const ScalarField& p) {
  if (p.stag != Staggering::cell) throw std::invalid_argument("discrete_grad: expects cell field");
  const Grid& g = p.grid;
  const Dims d = dims(g);
  VectorField out(g);
  ScalarField& u = out[0];
  ScalarField& v = out[1];
  kernels::parallel_for(u.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.nux);
    const int j = static_cast<int>(c / d.nux);
    if (!d.per && (i == 0 || i == d.ncx)) {
      u.values[c] = 0.0;  // boundary faces carry no tangible gradient dof
      return;
    }
    const int il = d.per ? wrap(i - 1, d.ncx) : i - 1;
    u.values[c] = (p.at(i == d.ncx ? 0 : i, j) - p.at(il, j)) / d.hx;
  });
  kernels::parallel_for(v.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.nvx);
    const int j = static_cast<int>(c / d.nvx);
    if (!d.per && (j == 0 || j == d.ncy)) {
      v.values[c] = 0.0;
      return;
    }
    const int jb = d.per ? wrap(j - 1, d.ncy) : j - 1;
    v.values[c] = (p.at(i, j == d.ncy ? 0 : j) - p.at(i, jb)) / d.hy;
  });
  return out;
}

SymTensorField sym_gradient(const VectorField& y) {
  require_face(y, "sym_gradient");
  const Grid& g = y.grid;
  const Dims d = dims(g);
  SymTensorField e(g);
  const ScalarField& u = y[0];
  const ScalarField& v = y[1];

  ScalarField& e11 = e.diag(0);
  kernels::parallel_for(e11.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.ncx);
    const int j = static_cast<int>(c / d.ncx);
    const double ur = d.per ? u.at(wrap(i + 1, d.nux), j) : u.at(i + 1, j);
    e11.values[c] = (ur - u.at(i, j)) / d.hx;
  });
  ScalarField& e22 = e.diag(1);
  kernels::parallel_for(e22.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.ncx);
    const int j = static_cast<int>(c / d.ncx);
    const double vt = d.per ? v.at(i, wrap(j + 1, d.nvy)) : v.at(i, j + 1);
    e22.values[c] = (vt - v.at(i, j)) / d.hy;
  });

  ScalarField& e12 = e.offdiag();
  kernels::parallel_for(e12.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.nnx);
    const int j = static_cast<int>(c / d.nnx);
    double dudy, dvdx;
    if (d.per) {
      dudy = (u.at(i, j) - u.at(i, wrap(j - 1, d.nuy))) / d.hy;
      dvdx = (v.at(i, j) - v.at(wrap(i - 1, d.nvx), j)) / d.hx;
    } else {
      // no-slip ghost reflection: tangential velocity vanishes at the wall
      if (j == 0)
        dudy = 2.0 * u.at(i, 0) / d.hy;
      else if (j == d.ncy)
        dudy = -2.0 * u.at(i, d.ncy - 1) / d.hy;
      else
        dudy = (u.at(i, j) - u.at(i, j - 1)) / d.hy;
      if (i == 0)
        dvdx = 2.0 * v.at(0, j) / d.hx;
      else if (i == d.ncx)
        dvdx = -2.0 * v.at(d.ncx - 1, j) / d.hx;
      else
        dvdx = (v.at(i, j) - v.at(i - 1, j)) / d.hx;
    }
    e12.values[c] = 0.5 * (dudy + dvdx);
  });
  return e;
}

ScalarField discrete_laplacian(const ScalarField& p) {
  return discrete_div(discrete_grad(p));
}

VectorField stress_divergence(const SymTensorField& s) {
  const Grid& g = s.grid;
  const Dims d = dims(g);
  VectorField out(g);
  const ScalarField& s11 = s.diag(0);
  const ScalarField& s22 = s.diag(1);
  const ScalarField& s12 = s.offdiag();

  ScalarField& fu = out[0];
  kernels::parallel_for(fu.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.nux);
    const int j = static_cast<int>(c / d.nux);
    if (!d.per && (i == 0 || i == d.ncx)) {
      fu.values[c] = 0.0;
      return;
    }
    const int il = d.per ? wrap(i - 1, d.ncx) : i - 1;
    const int ic = (i == d.ncx) ? 0 : i;
    const double dxs11 = (s11.at(ic, j) - s11.at(il, j)) / d.hx;
    const int jt = d.per ? wrap(j + 1, d.nny) : j + 1;
    const double dys12 = (s12.at(i, jt) - s12.at(i, j)) / d.hy;
    fu.values[c] = dxs11 + dys12;
  });
  ScalarField& fv = out[1];
  kernels::parallel_for(fv.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.nvx);
    const int j = static_cast<int>(c / d.nvx);
    if (!d.per && (j == 0 || j == d.ncy)) {
      fv.values[c] = 0.0;
      return;
    }
    const int jb = d.per ? wrap(j - 1, d.ncy) : j - 1;
    const int jc = (j == d.ncy) ? 0 : j;
    const double dys22 = (s22.at(i, jc) - s22.at(i, jb)) / d.hy;
    const int ir = d.per ? wrap(i + 1, d.nnx) : i + 1;
    const double dxs12 = (s12.at(ir, j) - s12.at(i, j)) / d.hx;
    fv.values[c] = dys22 + dxs12;
  });
  return out;
}

ScalarField node_coefficient(const ScalarField& k_cell) {
  if (k_cell.stag != Staggering::cell)
    throw std::invalid_argument("node_coefficient: expects cell field");
  const Grid& g = k_cell.grid;
  const Dims d = dims(g);
  ScalarField out(g, Staggering::node);
  kernels::parallel_for(out.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.nnx);
    const int j = static_cast<int>(c / d.nnx);
    int ci = i - 1, cj = j - 1;
    if (d.per) {
      ci = wrap(ci, d.ncx);
      cj = wrap(cj, d.ncy);
    } else {
      ci = std::clamp(ci, 0, d.ncx - 1);
      cj = std::clamp(cj, 0, d.ncy - 1);
    }
    out.values[c] = k_cell.at(ci, cj);
  });
  return out;
}

ScalarField node_coefficient_harmonic(const ScalarField& k_cell) {
  if (k_cell.stag != Staggering::cell)
    throw std::invalid_argument("node_coefficient_harmonic: expects cell field");
  const Grid& g = k_cell.grid;
  const Dims d = dims(g);
  ScalarField out(g, Staggering::node);
  kernels::parallel_for(out.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.nnx);
    const int j = static_cast<int>(c / d.nnx);
    double inv = 0.0;
    int cnt = 0;
    for (int dj = -1; dj <= 0; ++dj) {
      for (int di = -1; di <= 0; ++di) {
        int ci = i + di, cj = j + dj;
        if (d.per) {
          ci = wrap(ci, d.ncx);
          cj = wrap(cj, d.ncy);
        } else {
          if (ci < 0 || ci >= d.ncx || cj < 0 || cj >= d.ncy) continue;
        }
        inv += 1.0 / k_cell.at(ci, cj);
        ++cnt;
      }
    }
    out.values[c] = static_cast<double>(cnt) / inv;
  });
  return out;
}

VectorField face_coefficient_arithmetic(const ScalarField& k_cell) {
  const Grid& g = k_cell.grid;
  const Dims d = dims(g);
  VectorField out(g);
  ScalarField& ku = out[0];
  kernels::parallel_for(ku.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.nux);
    const int j = static_cast<int>(c / d.nux);
    if (d.per) {
      ku.values[c] = 0.5 * (k_cell.at(wrap(i - 1, d.ncx), j) + k_cell.at(i, j));
    } else {
      if (i == 0)
        ku.values[c] = k_cell.at(0, j);
      else if (i == d.ncx)
        ku.values[c] = k_cell.at(d.ncx - 1, j);
      else
        ku.values[c] = 0.5 * (k_cell.at(i - 1, j) + k_cell.at(i, j));
    }
  });
  ScalarField& kv = out[1];
  kernels::parallel_for(kv.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % d.nvx);
    const int j = static_cast<int>(c / d.nvx);
    if (d.per) {
      kv.values[c] = 0.5 * (k_cell.at(i, wrap(j - 1, d.ncy)) + k_cell.at(i, j));
    } else {
      if (j == 0)
        kv.values[c] = k_cell.at(i, 0);
      else if (j == d.ncy)
        kv.values[c] = k_cell.at(i, d.ncy - 1);
      else
        kv.values[c] = 0.5 * (k_cell.at(i, j - 1) + k_cell.at(i, j));
    }
  });
  return out;
}

SymTensorField scale_tensor(const SymTensorField& e, const ScalarField& k_cell,
                            const ScalarField& k_node) {
  SymTensorField out(e.grid);
  for (int a = 0; a < 2; ++a) {
    const double* pe = e.diag(a).values.data();
    const double* pk = k_cell.values.data();
    double* po = out.diag(a).values.data();
    kernels::parallel_for(out.diag(a).values.size(),
                          [=](std::size_t c) { po[c] = pk[c] * pe[c]; });
  }
  const double* pe = e.offdiag().values.data();
  const double* pk = k_node.values.data();
  double* po = out.offdiag().values.data();
  kernels::parallel_for(out.offdiag().values.size(),
                        [=](std::size_t c) { po[c] = pk[c] * pe[c]; });
  return out;
}

double tensor_energy_pairing(const SymTensorField& s, const SymTensorField& e) {
  const Grid& g = s.grid;
  const Dims d = dims(g);
  double acc = 0.0;
  for (int a = 0; a < 2; ++a) acc += kernels::dot(s.diag(a).data(), e.diag(a).data());
  const ScalarField& s12 = s.offdiag();
  const ScalarField& e12 = e.offdiag();
  if (d.per) {
    acc += 2.0 * kernels::dot(s12.data(), e12.data());
  } else {
    // trapezoidal node weights so the pairing is the exact adjoint of
    // the ghost-reflected sym_gradient
    acc += 2.0 * kernels::block_sum(s12.values.size(), [&](std::size_t c) {
      const int i = static_cast<int>(c % d.nnx);
      const int j = static_cast<int>(c / d.nnx);
      double w = 1.0;
      if (i == 0 || i == d.ncx) w *= 0.5;
      if (j == 0 || j == d.ncy) w *= 0.5;
      return w * s12.values[c] * e12.values[c];
    });
  }
  return acc * d.vol;
}

double face_inner(const VectorField& a, const VectorField& b) {
  double acc = 0.0;
  for (int c = 0; c < 2; ++c) acc += kernels::dot(a[c].data(), b[c].data());
  return acc * a.grid.cell_volume();
}

}  // namespace homog
