#include "homog/correctors.hpp"

#include <cmath>

#include "homog/kernels.hpp"
#include "homog/operators.hpp"
#include "homog/poisson.hpp"

namespace homog {

namespace {

// I^pq = (e_p (x) e_q + e_q (x) e_p)/2 as MAC component values.
std::array<double, 3> unit_strain(IndexPair pq) {
  if (pq.p == 0 && pq.q == 0) return {1.0, 0.0, 0.0};
  if (pq.p == 1 && pq.q == 1) return {0.0, 1.0, 0.0};
  return {0.0, 0.0, 0.5};
}

// coef-sampled constant tensor c * I^pq on the MAC staggering.
SymTensorField sampled_unit_stress(IndexPair pq, const ScalarField& c_cell,
                                   const ScalarField& c_node) {
  SymTensorField s(c_cell.grid);
  const auto I = unit_strain(pq);
  for (int a = 0; a < 2; ++a)
    if (I[a] != 0.0) {
      const double* pc = c_cell.values.data();
      double* ps = s.diag(a).values.data();
      const double w = I[a];
      kernels::parallel_for(s.diag(a).values.size(), [=](std::size_t i) { ps[i] = w * pc[i]; });
    }
  if (I[2] != 0.0) {
    const double* pc = c_node.values.data();
    double* ps = s.offdiag().values.data();
    const double w = I[2];
    kernels::parallel_for(s.offdiag().values.size(), [=](std::size_t i) { ps[i] = w * pc[i]; });
  }
  return s;
}

void tensor_axpy(double alpha, const SymTensorField& x, SymTensorField& y) {
  for (int c = 0; c < 3; ++c) kernels::axpy(alpha, x.comp[c].data(), y.comp[c].data());
}

VectorField negated(VectorField f) {
  for (int c = 0; c < 2; ++c) kernels::scale(f[c].data(), -1.0);
  return f;
}

struct Coefs {
  ScalarField a_cell, a_node, b_cell, b_node;
};

Coefs make_coefs(const PhaseField& theta0, const MaterialParams& mat) {
  Coefs c;
  c.a_cell = phase_coefficient(theta0.theta0, mat.mu1, mat.mu2);
  c.a_node = node_coefficient(c.a_cell);
  c.b_cell = phase_coefficient(theta0.theta0, mat.nu1, mat.nu2);
  c.b_node = node_coefficient(c.b_cell);
  return c;
}

}  // namespace

TensorAvg tensor_average(const SymTensorField& f) {
  TensorAvg out{};
  for (int c = 0; c < 3; ++c) out[c] = mean(f.comp[c]);
  return out;
}

double kernel_horizon_default(const MaterialParams& mat) {
  const double beta2 = mat.beta2();
  double alpha = mat.mat_case == MaterialCase::kelvin_voigt ? mat.alpha1() : 0.5 * mat.mu1;
  if (alpha <= 0.0) return 1.0;  // no elastic memory expected
  return 2.0 * beta2 / alpha;
}

StationarySolution solve_corrector_n(IndexPair pq, const PhaseField& theta0,
                                     const MaterialParams& mat, const SaddleOptions& opt) {
  mat.validate();
  if (mat.mat_case != MaterialCase::kelvin_voigt)
    throw std::invalid_argument("solve_corrector_n: fsi case uses solve_fsi_correctors");
  if (!(mat.alpha1() > 0.0))
    throw std::invalid_argument("solve_corrector_n: elastic tensor must be elliptic (min mu > 0)");
  const Coefs c = make_coefs(theta0, mat);
  SymTensorField s0 = sampled_unit_stress(pq, c.a_cell, c.a_node);
  VectorField rhs = stress_divergence(s0);
  SaddleSystem sys = build_saddle_system(theta0.grid, c.a_cell, std::move(rhs));
  SaddleResult sol = solve_saddle(sys, opt);

  StationarySolution out;
  out.field = std::move(sol.v);
  out.pressure = std::move(sol.p);
  kernels::scale(out.pressure.data(), -1.0);
  out.flux = s0;
  SymTensorField en = sym_gradient(out.field);
  tensor_axpy(1.0, scale_tensor(en, c.a_cell, c.a_node), out.flux);
  out.div_inf = sol.div_inf;
  return out;
}

StationarySolution solve_corrector_mT(IndexPair pq, const VectorField* n_pq,
                                      const PhaseField& theta0, const MaterialParams& mat,
                                      const SaddleOptions& opt) {
  mat.validate();
  const Coefs c = make_coefs(theta0, mat);
  StationarySolution out;
  if (mat.mat_case == MaterialCase::kelvin_voigt) {
    if (!n_pq) throw std::invalid_argument("solve_corrector_mT: KV case needs n_pq");
    // S = B(I^pq + e(n)); solve -div(B e(m_T)) + grad p = -div S
    SymTensorField s = sampled_unit_stress(pq, c.b_cell, c.b_node);
    tensor_axpy(1.0, scale_tensor(sym_gradient(*n_pq), c.b_cell, c.b_node), s);
    VectorField rhs = negated(stress_divergence(s));
    SaddleSystem sys = build_saddle_system(theta0.grid, c.b_cell, std::move(rhs));
    SaddleResult sol = solve_saddle(sys, opt);
    out.field = std::move(sol.v);
    out.pressure = std::move(sol.p);
    kernels::scale(out.pressure.data(), -1.0);
    out.flux = s;
    tensor_axpy(-1.0, scale_tensor(sym_gradient(out.field), c.b_cell, c.b_node), out.flux);
    out.div_inf = sol.div_inf;
  } else {
    // FSI second auxiliary problem: -div(B(I^pq + e(m_T))) - grad P2 = 0
    SymTensorField s0 = sampled_unit_stress(pq, c.b_cell, c.b_node);
    VectorField rhs = stress_divergence(s0);
    SaddleSystem sys = build_saddle_system(theta0.grid, c.b_cell, std::move(rhs));
    SaddleResult sol = solve_saddle(sys, opt);
    out.field = std::move(sol.v);
    out.pressure = std::move(sol.p);
    kernels::scale(out.pressure.data(), -1.0);
    out.flux = s0;
    tensor_axpy(1.0, scale_tensor(sym_gradient(out.field), c.b_cell, c.b_node), out.flux);
    for (int k = 0; k < 3; ++k) kernels::scale(out.flux.comp[k].data(), -1.0);
    out.div_inf = sol.div_inf;
  }
  return out;
}

MemoryMarch solve_memory_corrector(IndexPair, const VectorField& initial, const PhaseField& theta0,
                                   const MaterialParams& mat, int K, double ds, double orientation,
                                   bool keep_fields, bool crank_nicolson,
                                   const SaddleOptions& opt) {
  mat.validate();
  if (!(ds > 0.0)) throw std::invalid_argument("solve_memory_corrector: ds must be positive");
  if (K < 1) throw std::invalid_argument("solve_memory_corrector: K must be >= 1");
  const Grid& g = theta0.grid;
  const Coefs c = make_coefs(theta0, mat);

  MemoryMarch out;
  out.flux_avg.reserve(K + 1);
  out.sample_norms.reserve(K + 1);

  auto flux_of = [&](const VectorField& m, const VectorField& dm) {
    SymTensorField f = scale_tensor(sym_gradient(m), c.a_cell, c.a_node);
    tensor_axpy(1.0, scale_tensor(sym_gradient(dm), c.b_cell, c.b_node), f);
    if (orientation != 1.0)
      for (int k = 0; k < 3; ++k) kernels::scale(f.comp[k].data(), orientation);
    return f;
  };

  // exact initial rate: div(B e(dm0)) = grad p - div(A e(m0))
  VectorField m_prev = initial;
  enforce_velocity_bc(g, m_prev);
  {
    VectorField rhs = stress_divergence(scale_tensor(sym_gradient(m_prev), c.a_cell, c.a_node));
    SaddleSystem sys = build_saddle_system(g, c.b_cell, std::move(rhs));
    SaddleResult sol = solve_saddle(sys, opt);
    out.flux0 = flux_of(m_prev, sol.v);
    out.flux_avg.push_back(tensor_average(out.flux0));
    out.max_div = std::max(out.max_div, max_abs(discrete_div(m_prev)));
    out.sample_norms.push_back(l2_norm(m_prev));
    SymTensorField e0 = sym_gradient(m_prev);
    SymTensorField er = sym_gradient(sol.v);
    out.initial_enorm = std::sqrt(tensor_energy_pairing(e0, e0));
    out.initial_rate_enorm = std::sqrt(tensor_energy_pairing(er, er));
    if (keep_fields) out.samples.push_back(m_prev);
  }

  // implicit coefficient theta_cn*ds*A + B
  const double impl_w = crank_nicolson ? 0.5 * ds : ds;
  ScalarField k_impl = c.b_cell;
  {
    const double* pa = c.a_cell.values.data();
    double* pk = k_impl.values.data();
    kernels::parallel_for(k_impl.values.size(),
                          [=](std::size_t i) { pk[i] += impl_w * pa[i]; });
  }

  ScalarField p_warm(g, Staggering::cell);
  VectorField dm(g);
  SaddleOptions march_opt = opt;
  for (int k = 1; k <= K; ++k) {
    VectorField rhs(g);
    if (crank_nicolson) {
      ScalarField k_expl = c.b_cell;
      const double* pa = c.a_cell.values.data();
      double* pk = k_expl.values.data();
      const double w = 0.5 * ds;
      kernels::parallel_for(k_expl.values.size(), [=](std::size_t i) { pk[i] -= w * pa[i]; });
      rhs = negated(stress_divergence(
          scale_tensor(sym_gradient(m_prev), k_expl, node_coefficient(k_expl))));
    } else {
      rhs = negated(
          stress_divergence(scale_tensor(sym_gradient(m_prev), c.b_cell, c.b_node)));
    }
    SaddleSystem sys = build_saddle_system(g, k_impl, std::move(rhs));
    SaddleResult sol = solve_saddle(sys, march_opt, &p_warm);
    if (march_opt.residual_scale == 0.0 && sol.schur_r0 > 0.0)
      march_opt.residual_scale = sol.schur_r0;
    p_warm = sol.p;
    VectorField m_k = std::move(sol.v);
    for (int cc = 0; cc < 2; ++cc) {
      const double* pn = m_k[cc].values.data();
      const double* po = m_prev[cc].values.data();
      double* pd = dm[cc].values.data();
      const double inv = 1.0 / ds;
      kernels::parallel_for(dm[cc].values.size(),
                            [=](std::size_t i) { pd[i] = (pn[i] - po[i]) * inv; });
    }
    out.flux_avg.push_back(tensor_average(flux_of(m_k, dm)));
    out.max_div = std::max(out.max_div, sol.div_inf);
    out.sample_norms.push_back(l2_norm(m_k));
    if (keep_fields) out.samples.push_back(m_k);
    m_prev = std::move(m_k);
  }
  return out;
}

PairCorrectors solve_pair_kv(IndexPair pq, const PhaseField& theta0, const MaterialParams& mat,
                             const CorrectorOptions& opt) {
  PairCorrectors pc;
  pc.pq = pq;
  StationarySolution n = solve_corrector_n(pq, theta0, mat, opt.saddle);
  StationarySolution mt = solve_corrector_mT(pq, &n.field, theta0, mat, opt.saddle);
  pc.max_div = std::max(n.div_inf, mt.div_inf);
  pc.n = std::move(n.field);
  pc.P1 = std::move(n.pressure);
  pc.F1 = std::move(n.flux);
  pc.m_T = std::move(mt.field);
  pc.P2 = std::move(mt.pressure);
  pc.F2 = std::move(mt.flux);
  pc.F1_avg = tensor_average(pc.F1);
  pc.F2_avg = tensor_average(pc.F2);
  MemoryMarch mm = solve_memory_corrector(pq, pc.m_T, theta0, mat, opt.K, opt.ds, -1.0,
                                          opt.keep_fields, opt.crank_nicolson, opt.saddle);
  pc.F3_avg = std::move(mm.flux_avg);
  pc.m_samples = std::move(mm.samples);
  pc.max_div = std::max(pc.max_div, mm.max_div);
  return pc;
}

PairCorrectors solve_fsi_correctors(IndexPair pq, const PhaseField& theta0,
                                    const MaterialParams& mat, const CorrectorOptions& opt) {
  if (mat.mat_case != MaterialCase::fsi)
    throw std::invalid_argument("solve_fsi_correctors: material case must be fsi");
  const Coefs c = make_coefs(theta0, mat);
  PairCorrectors pc;
  pc.pq = pq;

  // first auxiliary problem: div(A I^pq - B e(n_T)) - grad P1 = 0
  {
    SymTensorField s0a = sampled_unit_stress(pq, c.a_cell, c.a_node);
    VectorField rhs = negated(stress_divergence(s0a));
    SaddleSystem sys = build_saddle_system(theta0.grid, c.b_cell, std::move(rhs));
    SaddleResult sol = solve_saddle(sys, opt.saddle);
    pc.n = std::move(sol.v);
    pc.P1 = std::move(sol.p);
    kernels::scale(pc.P1.data(), -1.0);
    pc.F1 = s0a;
    tensor_axpy(-1.0, scale_tensor(sym_gradient(pc.n), c.b_cell, c.b_node), pc.F1);
    pc.max_div = std::max(pc.max_div, sol.div_inf);
  }
  {
    StationarySolution mt = solve_corrector_mT(pq, nullptr, theta0, mat, opt.saddle);
    pc.m_T = std::move(mt.field);
    pc.P2 = std::move(mt.pressure);
    pc.F2 = std::move(mt.flux);
    pc.max_div = std::max(pc.max_div, mt.div_inf);
  }
  pc.F1_avg = tensor_average(pc.F1);
  pc.F2_avg = tensor_average(pc.F2);

  MemoryMarch nm = solve_memory_corrector(pq, pc.n, theta0, mat, opt.K, opt.ds, -1.0,
                                          opt.keep_fields, opt.crank_nicolson, opt.saddle);
  pc.F3_avg = std::move(nm.flux_avg);
  pc.n_samples = std::move(nm.samples);
  pc.max_div = std::max(pc.max_div, nm.max_div);

  MemoryMarch mm = solve_memory_corrector(pq, pc.m_T, theta0, mat, opt.K, opt.ds, +1.0,
                                          opt.keep_fields, opt.crank_nicolson, opt.saddle);
  pc.F4_avg = std::move(mm.flux_avg);
  pc.m_samples = std::move(mm.samples);
  pc.max_div = std::max(pc.max_div, mm.max_div);
  return pc;
}

CorrectorSet solve_all_correctors(const PhaseField& theta0, const MaterialParams& mat,
                                  CorrectorOptions opt) {
  mat.validate();
  if (opt.horizon <= 0.0) opt.horizon = kernel_horizon_default(mat);
  if (opt.ds <= 0.0) opt.ds = opt.horizon / opt.K;
  CorrectorSet cs;
  cs.mat_case = mat.mat_case;
  cs.grid = theta0.grid;
  cs.ds = opt.ds;
  cs.K = opt.K;
  for (IndexPair pq : sym_pairs(theta0.grid.dim)) {
    cs.pairs.push_back(mat.mat_case == MaterialCase::kelvin_voigt
                           ? solve_pair_kv(pq, theta0, mat, opt)
                           : solve_fsi_correctors(pq, theta0, mat, opt));
  }
  return cs;
}

namespace {

// Interpolate one strain component of e(w) onto the faces of component a.
void add_scaled_strain_product(VectorField& y, const VectorField& corrector,
                               const SymTensorField& ew, int comp, double weight) {
  const Grid& g = y.grid;
  const bool per = g.periodic();
  const int ncx = g.n[0], ncy = g.n[1];
  const ScalarField& s = ew.comp[comp];
  // u faces
  {
    ScalarField& yu = y[0];
    const ScalarField& cu = corrector[0];
    kernels::parallel_for(yu.values.size(), [&](std::size_t idx) {
      const int i = static_cast<int>(idx % yu.nx());
      const int j = static_cast<int>(idx / yu.nx());
      double sv;
      if (comp < 2) {  // cell component: average the two adjacent cells
        const int il = per ? (i - 1 + ncx) % ncx : std::max(i - 1, 0);
        const int ic = per ? i % ncx : std::min(i, ncx - 1);
        sv = 0.5 * (s.at(il, j) + s.at(ic, j));
      } else {  // node component: average the two face-adjacent nodes
        const int jt = per ? (j + 1) % g.nnode(1) : j + 1;
        sv = 0.5 * (s.at(i, j) + s.at(i, jt));
      }
      yu.values[idx] += weight * cu.values[idx] * sv;
    });
  }
  // v faces
  {
    ScalarField& yv = y[1];
    const ScalarField& cv = corrector[1];
    kernels::parallel_for(yv.values.size(), [&](std::size_t idx) {
      const int i = static_cast<int>(idx % yv.nx());
      const int j = static_cast<int>(idx / yv.nx());
      double sv;
      if (comp < 2) {
        const int jb = per ? (j - 1 + ncy) % ncy : std::max(j - 1, 0);
        const int jc = per ? j % ncy : std::min(j, ncy - 1);
        sv = 0.5 * (s.at(i, jb) + s.at(i, jc));
      } else {
        const int ir = per ? (i + 1) % g.nnode(0) : i + 1;
        sv = 0.5 * (s.at(i, j) + s.at(ir, j));
      }
      yv.values[idx] += weight * cv.values[idx] * sv;
    });
  }
}

}  // namespace

TimeSampledField apply_corrector_operator(const TimeSampledField& w, const CorrectorSet& cs) {
  if (w.samples.empty()) throw std::invalid_argument("apply_corrector_operator: empty input");
  if (!(w.dt > 0.0)) throw std::invalid_argument("apply_corrector_operator: dt must be positive");
  const Grid& g = cs.grid;
  check_same_grid(w.samples.front().grid, g, "apply_corrector_operator");
  const double rstep = w.dt / cs.ds;
  if (std::fabs(rstep - std::lround(rstep)) > 1e-12 || std::lround(rstep) < 1)
    throw std::invalid_argument(
        "apply_corrector_operator: w sample step must be a multiple of the corrector ds");
  const int stride = static_cast<int>(std::lround(rstep));
  const int n = static_cast<int>(w.samples.size());
  const bool fsi = cs.mat_case == MaterialCase::fsi;
  for (const auto& pc : cs.pairs)
    if (pc.m_samples.empty())
      throw std::invalid_argument(
          "apply_corrector_operator: corrector set was built without keep_fields");

  // strain samples and strain-rate samples (second-order differences)
  std::vector<SymTensorField> ew, ewt;
  ew.reserve(n);
  for (const auto& s : w.samples) ew.push_back(sym_gradient(s));
  ewt.reserve(n);
  for (int i = 0; i < n; ++i) {
    VectorField wt(g);
    for (int c = 0; c < 2; ++c) {
      double* pd = wt[c].values.data();
      if (n == 1) break;
      const double inv = 1.0 / (2.0 * w.dt);
      const double* pm;
      const double* pp;
      if (i == 0) {
        pm = w.samples[0][c].values.data();
        pp = w.samples[1][c].values.data();
        const double* p2 = n > 2 ? w.samples[2][c].values.data() : pp;
        kernels::parallel_for(wt[c].values.size(), [=](std::size_t k) {
          pd[k] = (-3.0 * pm[k] + 4.0 * pp[k] - p2[k]) * inv;
        });
      } else if (i == n - 1) {
        pm = w.samples[n - 1][c].values.data();
        pp = w.samples[n - 2][c].values.data();
        const double* p2 = n > 2 ? w.samples[n - 3][c].values.data() : pp;
        kernels::parallel_for(wt[c].values.size(), [=](std::size_t k) {
          pd[k] = (3.0 * pm[k] - 4.0 * pp[k] + p2[k]) * inv;
        });
      } else {
        pm = w.samples[i - 1][c].values.data();
        pp = w.samples[i + 1][c].values.data();
        kernels::parallel_for(wt[c].values.size(),
                              [=](std::size_t k) { pd[k] = (pp[k] - pm[k]) * inv; });
      }
    }
    ewt.push_back(sym_gradient(wt));
  }

  TimeSampledField out;
  out.dt = w.dt;
  out.samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    VectorField y = w.samples[i];
    for (const auto& pc : cs.pairs) {
      const double pw = pc.pq.diagonal() ? 1.0 : 2.0;  // both (p,q) and (q,p)
      const int comp = pc.pq.diagonal() ? pc.pq.p : 2;  // e(w)_pq sample index
      // truncated trapezoid over tau in [t_i, T] with lag samples on the
      // corrector grid; an empty range contributes nothing
      const int jend = std::min(n - 1, i + cs.K / stride);
      auto convolve = [&](const std::vector<VectorField>& kern,
                          const std::vector<SymTensorField>& strain) {
        if (jend <= i) return;
        for (int j = i; j <= jend; ++j) {
          const int sigma = (j - i) * stride;
          const double tw = (j == i || j == jend) ? 0.5 : 1.0;
          add_scaled_strain_product(y, kern[sigma], strain[j], comp, pw * tw * w.dt);
        }
      };
      if (!fsi) {
        add_scaled_strain_product(y, pc.n, ew[i], comp, pw);
      } else {
        convolve(pc.n_samples, ew);  // FSI: instantaneous n becomes a convolution
      }
      convolve(pc.m_samples, ewt);
    }
    // divergence repair through the Neumann potential
    ScalarField r = discrete_div(y);
    if (max_abs(r) > 0.0) {
      PoissonResult pr = solve_neumann_poisson(r, 1e-12, 1.0);
      VectorField gphi = discrete_grad(pr.phi);
      for (int c = 0; c < 2; ++c) kernels::axpy(-1.0, gphi[c].data(), y[c].data());
    }
    out.samples.push_back(std::move(y));
  }
  return out;
}

}  // namespace homog
