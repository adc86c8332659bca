#include "homog/saddle.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "homog/fft.hpp"
#include "homog/kernels.hpp"
#include "homog/operators.hpp"
#include "homog/poisson.hpp"

namespace homog {

namespace {

void subtract_component_means(VectorField& y) {
  for (auto& c : y.comp) subtract_mean(c);
}

double vec_dot(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (int c = 0; c < 2; ++c) s += kernels::dot(a[c].data(), b[c].data());
  return s;
}

void vec_axpy(double alpha, const VectorField& x, VectorField& y) {
  for (int c = 0; c < 2; ++c) kernels::axpy(alpha, x[c].data(), y[c].data());
}

// Exact inverse of the constant-coefficient operator c_m + L(k_bar) in the
// staggered Fourier basis; the zero mode carries translations and inverts to
// zero when c_m vanishes.
class FourierMomentumPrecond {
 public:
  FourierMomentumPrecond(const Grid& g, double k_bar, double c_mass)
      : nx_(g.n[0]), ny_(g.n[1]), hx_(g.h(0)), hy_(g.h(1)), kbar_(k_bar), cm_(c_mass) {}

  void apply(const VectorField& r, VectorField& z) const {
    const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
    std::vector<std::complex<double>> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = r[0].values[i];
      v[i] = r[1].values[i];
    }
    fft::transform2d(u, nx_, ny_, -1);
    fft::transform2d(v, nx_, ny_, -1);
    for (int j = 0; j < ny_; ++j) {
      const double ty = 2.0 * std::numbers::pi * j / ny_;
      for (int i = 0; i < nx_; ++i) {
        const double tx = 2.0 * std::numbers::pi * i / nx_;
        const std::size_t id = static_cast<std::size_t>(j) * nx_ + i;
        const std::complex<double> dxf = (std::polar(1.0, tx) - 1.0) / hx_;
        const std::complex<double> dyf = (std::polar(1.0, ty) - 1.0) / hy_;
        const std::complex<double> dxb = (1.0 - std::polar(1.0, -tx)) / hx_;
        const std::complex<double> dyb = (1.0 - std::polar(1.0, -ty)) / hy_;
        const double a2 = std::norm(dxf);
        const double b2 = std::norm(dyf);
        const std::complex<double> auv = -0.5 * kbar_ * dyf * dxb;
        const std::complex<double> avu = -0.5 * kbar_ * dxf * dyb;
        const double auu = cm_ + kbar_ * (a2 + 0.5 * b2);
        const double avv = cm_ + kbar_ * (b2 + 0.5 * a2);
        const std::complex<double> det = auu * avv - auv * avu;
        if (std::abs(det) < 1e-300) {
          u[id] = 0.0;
          v[id] = 0.0;
        } else {
          const std::complex<double> ru = u[id], rv = v[id];
          u[id] = (avv * ru - auv * rv) / det;
          v[id] = (auu * rv - avu * ru) / det;
        }
      }
    }
    fft::transform2d(u, nx_, ny_, +1);
    fft::transform2d(v, nx_, ny_, +1);
    for (std::size_t i = 0; i < n; ++i) {
      z[0].values[i] = u[i].real();
      z[1].values[i] = v[i].real();
    }
  }

 private:
  int nx_, ny_;
  double hx_, hy_;
  double kbar_, cm_;
};

struct DiagMomentumPrecond {
  VectorField inv_diag;

  explicit DiagMomentumPrecond(const SaddleSystem& sys) : inv_diag(sys.grid) {
    const Grid& g = sys.grid;
    const double hx = g.h(0), hy = g.h(1);
    const bool per = g.periodic();
    const int ncx = g.n[0], ncy = g.n[1];
    const auto& kc = sys.k_cell;
    const auto& kn = sys.k_node;
    ScalarField& du = inv_diag[0];
    for (int j = 0; j < du.ny(); ++j)
      for (int i = 0; i < du.nx(); ++i) {
        if (!per && (i == 0 || i == ncx)) {
          du.at(i, j) = 1.0;
          continue;
        }
        const int il = per ? (i - 1 + ncx) % ncx : i - 1;
        const int ic = (i == ncx) ? 0 : i;
        const int jt = per ? (j + 1) % g.nnode(1) : j + 1;
        double d = (kc.at(il, j) + kc.at(ic, j)) / (hx * hx) +
                   (kn.at(i, j) + kn.at(i, jt)) / (2.0 * hy * hy);
        if (sys.mass) d += (*sys.mass)[0].at(i, j);
        du.at(i, j) = 1.0 / d;
      }
    ScalarField& dv = inv_diag[1];
    for (int j = 0; j < dv.ny(); ++j)
      for (int i = 0; i < dv.nx(); ++i) {
        if (!per && (j == 0 || j == ncy)) {
          dv.at(i, j) = 1.0;
          continue;
        }
        const int jb = per ? (j - 1 + ncy) % ncy : j - 1;
        const int jc = (j == ncy) ? 0 : j;
        const int ir = per ? (i + 1) % g.nnode(0) : i + 1;
        double d = (kc.at(i, jb) + kc.at(i, jc)) / (hy * hy) +
                   (kn.at(i, j) + kn.at(ir, j)) / (2.0 * hx * hx);
        if (sys.mass) d += (*sys.mass)[1].at(i, j);
        dv.at(i, j) = 1.0 / d;
      }
  }

  void apply(const VectorField& r, VectorField& z) const {
    for (int c = 0; c < 2; ++c) {
      const double* pr = r[c].values.data();
      const double* pd = inv_diag[c].values.data();
      double* pz = z[c].values.data();
      kernels::parallel_for(r[c].values.size(), [=](std::size_t i) { pz[i] = pd[i] * pr[i]; });
    }
  }
};

class MomentumSolver {
 public:
  MomentumSolver(const SaddleSystem& sys, const SaddleOptions& opt) : sys_(sys), opt_(opt) {
    use_fourier_ = opt.precond == Preconditioner::fourier && sys.grid.periodic() &&
                   fft::is_pow2(sys.grid.n[0]) && fft::is_pow2(sys.grid.n[1]);
    if (use_fourier_) {
      const double kbar = mean(sys.k_cell);
      fourier_.emplace(sys.grid, kbar, mass_mean(sys));
    } else if (opt.precond != Preconditioner::none) {
      diag_.emplace(sys);
    }
    singular_ = !sys.mass && sys.grid.periodic();
  }

  static double mass_mean(const SaddleSystem& sys) {
    if (!sys.mass) return 0.0;
    double s = 0.0;
    std::size_t n = 0;
    for (int c = 0; c < 2; ++c) {
      s += kernels::sum((*sys.mass)[c].data());
      n += (*sys.mass)[c].values.size();
    }
    return s / static_cast<double>(n);
  }

  int solve(const VectorField& rhs, VectorField& x, double rel_tol) const {
    const Grid& g = sys_.grid;
    x.fill(0.0);
    VectorField r = rhs;
    enforce_velocity_bc(g, r);
    if (singular_) subtract_component_means(r);
    VectorField z(g), p(g), ap(g);
    apply_precond(r, z);
    if (singular_) subtract_component_means(z);
    p = z;
    double rz = vec_dot(r, z);
    const double r0 = std::sqrt(vec_dot(r, r));
    if (r0 == 0.0) return 0;
    const int cap = opt_.iter_cap_per_n * std::max(g.n[0], g.n[1]);
    int it = 0;
    for (; it < cap; ++it) {
      ap = apply_momentum(sys_, p);
      if (singular_) subtract_component_means(ap);
      const double pap = vec_dot(p, ap);
      const double alpha = rz / pap;
      vec_axpy(alpha, p, x);
      vec_axpy(-alpha, ap, r);
      const double rn = std::sqrt(vec_dot(r, r));
      if (rn <= rel_tol * r0) {
        ++it;
        break;
      }
      apply_precond(r, z);
      if (singular_) subtract_component_means(z);
      const double rz_new = vec_dot(r, z);
      const double beta = rz_new / rz;
      for (int c = 0; c < 2; ++c) {
        double* pp = p[c].values.data();
        const double* pz = z[c].values.data();
        kernels::parallel_for(p[c].values.size(),
                              [=](std::size_t i) { pp[i] = pz[i] + beta * pp[i]; });
      }
      rz = rz_new;
    }
    if (singular_) subtract_component_means(x);
    return it;
  }

 private:
  void apply_precond(const VectorField& r, VectorField& z) const {
    if (use_fourier_) {
      fourier_->apply(r, z);
    } else if (diag_) {
      diag_->apply(r, z);
    } else {
      for (int c = 0; c < 2; ++c) kernels::copy(r[c].data(), z[c].data());
    }
    enforce_velocity_bc(sys_.grid, z);
  }

  const SaddleSystem& sys_;
  const SaddleOptions& opt_;
  bool use_fourier_ = false;
  bool singular_ = false;
  std::optional<FourierMomentumPrecond> fourier_;
  std::optional<DiagMomentumPrecond> diag_;
};

}  // namespace

void enforce_velocity_bc(const Grid& g, VectorField& y) {
  if (g.periodic()) return;
  ScalarField& u = y[0];
  for (int j = 0; j < u.ny(); ++j) {
    u.at(0, j) = 0.0;
    u.at(u.nx() - 1, j) = 0.0;
  }
  ScalarField& v = y[1];
  for (int i = 0; i < v.nx(); ++i) {
    v.at(i, 0) = 0.0;
    v.at(i, v.ny() - 1) = 0.0;
  }
}

SymTensorField apply_pair_matrix(const PairMatrix& m, const SymTensorField& e) {
  const Grid& g = e.grid;
  const bool per = g.periodic();
  const int ncx = g.n[0], ncy = g.n[1];
  const double sq2 = std::numbers::sqrt2;
  SymTensorField out(g);

  const ScalarField& e12 = e.offdiag();
  auto e12_at_cell = [&](int i, int j) {
    const int ir = per ? (i + 1) % g.nnode(0) : i + 1;
    const int jt = per ? (j + 1) % g.nnode(1) : j + 1;
    return 0.25 * (e12.at(i, j) + e12.at(ir, j) + e12.at(i, jt) + e12.at(ir, jt));
  };
  for (int a = 0; a < 2; ++a) {
    ScalarField& t = out.diag(a);
    const double m0 = m[a][0], m1 = m[a][1], m2 = m[a][2] * sq2;
    const bool need12 = m2 != 0.0;
    kernels::parallel_for(t.values.size(), [&, m0, m1, m2, need12](std::size_t c) {
      const int i = static_cast<int>(c % ncx);
      const int j = static_cast<int>(c / ncx);
      double v = m0 * e.diag(0).values[c] + m1 * e.diag(1).values[c];
      if (need12) v += m2 * e12_at_cell(i, j);
      t.values[c] = v;
    });
  }
  {
    ScalarField& t = out.offdiag();
    auto diag_at_node = [&](const ScalarField& s, int i, int j) {
      auto cell = [&](int ci, int cj) {
        if (per) {
          ci = (ci + ncx) % ncx;
          cj = (cj + ncy) % ncy;
        } else {
          ci = std::clamp(ci, 0, ncx - 1);
          cj = std::clamp(cj, 0, ncy - 1);
        }
        return s.at(ci, cj);
      };
      return 0.25 * (cell(i - 1, j - 1) + cell(i, j - 1) + cell(i - 1, j) + cell(i, j));
    };
    const double m0 = m[2][0] / sq2, m1 = m[2][1] / sq2, m2 = m[2][2];
    const bool need_diag = m0 != 0.0 || m1 != 0.0;
    kernels::parallel_for(t.values.size(), [&, m0, m1, m2, need_diag](std::size_t c) {
      const int i = static_cast<int>(c % t.nx());
      const int j = static_cast<int>(c / t.nx());
      double v = m2 * e12.values[c];
      if (need_diag)
        v += m0 * diag_at_node(e.diag(0), i, j) + m1 * diag_at_node(e.diag(1), i, j);
      t.values[c] = v;
    });
  }
  return out;
}

SaddleSystem build_saddle_system(const Grid& g, const ScalarField& k_cell, VectorField rhs,
                                 std::optional<VectorField> mass) {
  double kmin = k_cell.values[0];
  for (double v : k_cell.values) kmin = std::min(kmin, v);
  if (kmin < 0.0) throw std::invalid_argument("saddle assembly: indefinite coefficient (k < 0)");
  if (kmin == 0.0 && !mass)
    throw std::invalid_argument(
        "saddle assembly: degenerate coefficient needs a mass term (combined implicit operator)");
  SaddleSystem sys;
  sys.grid = g;
  sys.k_cell = k_cell;
  sys.k_node = node_coefficient(k_cell);
  sys.mass = std::move(mass);
  sys.rhs = std::move(rhs);
  return sys;
}

SaddleSystem build_saddle_system(const Grid& g, const PairMatrix& k_tensor, VectorField rhs,
                                 std::optional<VectorField> mass) {
  double tr = (k_tensor[0][0] + k_tensor[1][1] + k_tensor[2][2]) / 3.0;
  if (!(tr > 0.0)) throw std::invalid_argument("saddle assembly: tensor coefficient not positive");
  ScalarField proxy(g, Staggering::cell);
  kernels::fill(proxy.data(), tr);
  SaddleSystem sys;
  sys.grid = g;
  sys.k_cell = std::move(proxy);
  sys.k_node = node_coefficient(sys.k_cell);
  sys.k_tensor = k_tensor;
  sys.mass = std::move(mass);
  sys.rhs = std::move(rhs);
  return sys;
}

VectorField apply_momentum(const SaddleSystem& sys, const VectorField& y) {
  SymTensorField e = sym_gradient(y);
  SymTensorField s = sys.k_tensor ? apply_pair_matrix(*sys.k_tensor, e)
                                  : scale_tensor(e, sys.k_cell, sys.k_node);
  VectorField out = stress_divergence(s);
  for (int c = 0; c < 2; ++c) kernels::scale(out[c].data(), -1.0);
  if (sys.mass) {
    for (int c = 0; c < 2; ++c) {
      const double* pm = (*sys.mass)[c].values.data();
      const double* py = y[c].values.data();
      double* po = out[c].values.data();
      kernels::parallel_for(out[c].values.size(), [=](std::size_t i) { po[i] += pm[i] * py[i]; });
    }
  }
  enforce_velocity_bc(sys.grid, out);
  return out;
}

SaddleResult solve_saddle(const SaddleSystem& sys, const SaddleOptions& opt,
                          const ScalarField* p_warm) {
  const Grid& g = sys.grid;
  MomentumSolver msolver(sys, opt);
  const double inner_tol = std::max(1e-13, opt.tol * 1e-2);

  SaddleResult res;
  res.p = ScalarField(g, Staggering::cell);
  if (p_warm) {
    res.p = *p_warm;
    subtract_mean(res.p);
  }

  // y = A^{-1}(f - G p)
  VectorField f = sys.rhs;
  enforce_velocity_bc(g, f);
  VectorField fp = f;
  if (p_warm) {
    VectorField gp = discrete_grad(res.p);
    vec_axpy(-1.0, gp, fp);
  }
  res.v = VectorField(g);
  res.inner_iterations += msolver.solve(fp, res.v, inner_tol);

  const bool has_mass = sys.mass.has_value();
  const double c_mass = MomentumSolver::mass_mean(sys);

  // Cahouet-Chabard style Schur preconditioner: k-weighted mass plus the
  // inverse Laplacian scaled by the mean mass coefficient.
  auto schur_precond = [&](const ScalarField& q) {
    ScalarField z(g, Staggering::cell);
    const double* pq = q.values.data();
    const double* pk = sys.k_cell.values.data();
    double* pz = z.values.data();
    kernels::parallel_for(z.values.size(), [=](std::size_t i) { pz[i] = pk[i] * pq[i]; });
    if (has_mass && c_mass > 0.0) {
      PoissonResult pr = solve_neumann_poisson(q, 1e-10, 1e-6);
      kernels::axpy(-c_mass, pr.phi.data(), z.data());
    }
    subtract_mean(z);
    return z;
  };

  // Schur CG: solve (-D A^{-1} G) p = -D y, tracking y alongside p.
  ScalarField r = discrete_div(res.v);
  kernels::scale(r.data(), -1.0);
  subtract_mean(r);
  const double r0 = l2_norm(r);
  res.schur_r0 = r0;
  const double r_ref = opt.residual_scale > 0.0 ? opt.residual_scale : r0;
  const int cap = opt.iter_cap_per_n * std::max(g.n[0], g.n[1]);
  double rn = r0;
  if (r0 > opt.tol * r_ref && r0 > 0.0) {
    ScalarField z = schur_precond(r);
    ScalarField s = z;
    double rz = kernels::dot(r.data(), z.data());
    VectorField zv(g);
    int it = 0;
    for (; it < cap; ++it) {
      ++res.outer_iterations;
      VectorField gs = discrete_grad(s);
      res.inner_iterations += msolver.solve(gs, zv, inner_tol);
      ScalarField w = discrete_div(zv);
      kernels::scale(w.data(), -1.0);
      subtract_mean(w);
      const double sw = kernels::dot(s.data(), w.data());
      const double alpha = rz / sw;
      kernels::axpy(alpha, s.data(), res.p.data());
      vec_axpy(-alpha, zv, res.v);
      kernels::axpy(-alpha, w.data(), r.data());
      rn = l2_norm(r);
      if (rn <= opt.tol * r_ref) break;
      ScalarField zn = schur_precond(r);
      const double rz_new = kernels::dot(r.data(), zn.data());
      const double beta = rz_new / rz;
      double* ps = s.values.data();
      const double* pz = zn.values.data();
      kernels::parallel_for(s.values.size(), [=](std::size_t i) { ps[i] = pz[i] + beta * ps[i]; });
      rz = rz_new;
    }
    if (rn > opt.tol * r_ref && opt.throw_on_stall)
      throw SolverError("saddle solve did not converge: div residual " + std::to_string(rn) +
                            " (target " + std::to_string(opt.tol * r_ref) + ")",
                        rn);
  }

  subtract_mean(res.p);
  ScalarField dv = discrete_div(res.v);
  res.div_inf = max_abs(dv);
  res.div_l2 = l2_norm(dv);

  VectorField mom = apply_momentum(sys, res.v);
  VectorField gp = discrete_grad(res.p);
  vec_axpy(1.0, gp, mom);
  vec_axpy(-1.0, f, mom);
  const double fn = std::sqrt(vec_dot(f, f));
  res.momentum_rel_residual =
      fn > 0.0 ? std::sqrt(vec_dot(mom, mom)) / fn : std::sqrt(vec_dot(mom, mom));
  res.converged = true;
  return res;
}

}  // namespace homog
