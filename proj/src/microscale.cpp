#include "homog/microscale.hpp"

#include <cmath>
#include <numbers>

#include "homog/kernels.hpp"
#include "homog/operators.hpp"
#include "homog/poisson.hpp"

namespace homog {

MaterialCase material_case_from_string(const std::string& s) {
  if (s == "kelvin_voigt") return MaterialCase::kelvin_voigt;
  if (s == "fsi") return MaterialCase::fsi;
  throw std::invalid_argument("unknown material case '" + s + "' (kelvin_voigt|fsi)");
}

std::string to_string(MaterialCase c) {
  return c == MaterialCase::kelvin_voigt ? "kelvin_voigt" : "fsi";
}

ScalarField phase_coefficient(const ScalarField& theta0, double c1, double c2) {
  ScalarField out = theta0;
  double* p = out.values.data();
  kernels::parallel_for(out.values.size(),
                        [=](std::size_t i) { p[i] = c1 * p[i] + c2 * (1.0 - p[i]); });
  return out;
}

SymTensorField kv_stress(const VectorField& u, const VectorField& v, const PhaseField& theta0,
                         const MaterialParams& mat) {
  check_same_grid(u.grid, theta0.grid, "kv_stress");
  check_same_grid(v.grid, theta0.grid, "kv_stress");
  const ScalarField a_cell = phase_coefficient(theta0.theta0, mat.mu1, mat.mu2);
  const ScalarField b_cell = phase_coefficient(theta0.theta0, mat.nu1, mat.nu2);
  const ScalarField a_node = node_coefficient(a_cell);
  const ScalarField b_node = node_coefficient(b_cell);
  SymTensorField eu = sym_gradient(u);
  SymTensorField ev = sym_gradient(v);
  SymTensorField t = scale_tensor(eu, a_cell, a_node);
  SymTensorField tv = scale_tensor(ev, b_cell, b_node);
  for (int c = 0; c < 3; ++c) kernels::axpy(1.0, tv.comp[c].data(), t.comp[c].data());
  return t;
}

ScalarField advect_indicator(const ScalarField& field, const VectorField& v, double dt) {
  if (field.stag != Staggering::cell)
    throw std::invalid_argument("advect_indicator: expects a cell field");
  check_same_grid(field.grid, v.grid, "advect_indicator");
  const Grid& g = field.grid;
  const double hx = g.h(0), hy = g.h(1);
  const double vmax = max_abs(v);
  if (vmax * dt > std::min(hx, hy) * (1.0 + 1e-12)) {
    const double sug = 0.9 * std::min(hx, hy) / vmax;
    throw CflError("advect_indicator: CFL violated (max|v| dt = " + std::to_string(vmax * dt) +
                       " > h); suggested dt = " + std::to_string(sug),
                   sug);
  }
  if (vmax == 0.0 || dt == 0.0) return field;

  const int nx = g.n[0], ny = g.n[1];
  const bool per = g.periodic();
  const ScalarField& u = v[0];
  const ScalarField& w = v[1];
  ScalarField out = field;

  // flux-form upwind: exactly conservative, monotone at CFL <= 1
  kernels::parallel_for(out.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % nx);
    const int j = static_cast<int>(c / nx);
    auto q = [&](int ii, int jj) {
      if (per) {
        ii = (ii + nx) % nx;
        jj = (jj + ny) % ny;
      } else {
        ii = std::clamp(ii, 0, nx - 1);
        jj = std::clamp(jj, 0, ny - 1);
      }
      return field.at(ii, jj);
    };
    auto uface = [&](int ii, int jj) {  // u at face index ii of row jj
      if (per) ii = (ii + nx) % nx;
      return u.at(ii, jj);
    };
    auto wface = [&](int ii, int jj) {
      if (per) jj = (jj + ny) % ny;
      return w.at(ii, jj);
    };
    const double ul = uface(i, j), ur = uface(i + 1, j);
    const double wb = wface(i, j), wt = wface(i, j + 1);
    const double fxl = ul >= 0.0 ? ul * q(i - 1, j) : ul * q(i, j);
    const double fxr = ur >= 0.0 ? ur * q(i, j) : ur * q(i + 1, j);
    const double fyb = wb >= 0.0 ? wb * q(i, j - 1) : wb * q(i, j);
    const double fyt = wt >= 0.0 ? wt * q(i, j) : wt * q(i, j + 1);
    out.values[c] = field.values[c] - dt * ((fxr - fxl) / hx + (fyt - fyb) / hy);
  });
  return out;
}

VectorField Forcing::evaluate(const Grid& g, double t) const {
  VectorField f(g);
  if (!active()) return f;
  double amp = amplitude;
  if (ramp > 0.0) amp *= std::min(1.0, t / ramp);
  if (kind == Kind::shear_sine) {
    const double hy = g.h(1);
    ScalarField& fu = f[0];
    for (int j = 0; j < fu.ny(); ++j) {
      const double y = (j + 0.5) * hy;
      const double val = amp * std::sin(2.0 * std::numbers::pi * y / g.length[1]);
      for (int i = 0; i < fu.nx(); ++i) fu.at(i, j) = val;
    }
  }
  enforce_velocity_bc(g, f);
  return f;
}

MicroState make_initial_state(const PhaseField& theta0, const MaterialParams& mat,
                              const VectorField& v0) {
  mat.validate();
  MicroState s;
  s.t = 0.0;
  s.rho = density_field(theta0, mat);
  s.v = v0;
  enforce_velocity_bc(theta0.grid, s.v);
  s.u = VectorField(theta0.grid);
  s.theta = theta0.theta0;
  s.P = ScalarField(theta0.grid, Staggering::cell);
  return s;
}

namespace {

// Exact divergence cleanup; transport sees a field whose discrete divergence
// is at rounding level so the density bounds hold to 1e-12 over long runs.
void project_div_free(VectorField& v) {
  ScalarField d = discrete_div(v);
  if (max_abs(d) == 0.0) return;
  PoissonResult pr = solve_neumann_poisson(d, 1e-12, 1.0);
  VectorField gphi = discrete_grad(pr.phi);
  for (int c = 0; c < 2; ++c) kernels::axpy(-1.0, gphi[c].data(), v[c].data());
}

// Standard conservative MAC convection term div(rho v (x) v) sampled at faces.
VectorField convection_term(const ScalarField& rho, const VectorField& v) {
  const Grid& g = rho.grid;
  const double hx = g.h(0), hy = g.h(1);
  const int nx = g.n[0], ny = g.n[1];
  const bool per = g.periodic();
  const ScalarField& u = v[0];
  const ScalarField& w = v[1];
  VectorField out(g);

  auto rc = [&](int i, int j) {
    if (per) {
      i = (i + nx) % nx;
      j = (j + ny) % ny;
    } else {
      i = std::clamp(i, 0, nx - 1);
      j = std::clamp(j, 0, ny - 1);
    }
    return rho.at(i, j);
  };
  auto uat = [&](int i, int j) {
    if (per) {
      i = (i + u.nx()) % u.nx();
      j = (j + ny) % ny;
    } else {
      if (i < 0 || i >= u.nx()) return 0.0;
      j = std::clamp(j, 0, ny - 1);
    }
    return u.at(i, j);
  };
  auto wat = [&](int i, int j) {
    if (per) {
      i = (i + nx) % nx;
      j = (j + w.ny()) % w.ny();
    } else {
      if (j < 0 || j >= w.ny()) return 0.0;
      i = std::clamp(i, 0, nx - 1);
    }
    return w.at(i, j);
  };

  ScalarField& fu = out[0];
  kernels::parallel_for(fu.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % fu.nx());
    const int j = static_cast<int>(c / fu.nx());
    if (!per && (i == 0 || i == nx)) {
      fu.values[c] = 0.0;
      return;
    }
    // d/dx(rho u u) from cell-centered products
    auto ucc = [&](int ci) { return 0.5 * (uat(ci, j) + uat(ci + 1, j)); };
    const double fr = rc(i, j) * ucc(i) * ucc(i);
    const double fl = rc(i - 1, j) * ucc(i - 1) * ucc(i - 1);
    // d/dy(rho u w) from node products
    auto node = [&](int jn) {
      const double un = 0.5 * (uat(i, jn) + uat(i, jn - 1));
      const double wn = 0.5 * (wat(i, jn) + wat(i - 1, jn));
      const double rn = 0.25 * (rc(i, jn) + rc(i - 1, jn) + rc(i, jn - 1) + rc(i - 1, jn - 1));
      return rn * un * wn;
    };
    fu.values[c] = (fr - fl) / hx + (node(j + 1) - node(j)) / hy;
  });
  ScalarField& fv = out[1];
  kernels::parallel_for(fv.values.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % fv.nx());
    const int j = static_cast<int>(c / fv.nx());
    if (!per && (j == 0 || j == ny)) {
      fv.values[c] = 0.0;
      return;
    }
    auto wcc = [&](int cj) { return 0.5 * (wat(i, cj) + wat(i, cj + 1)); };
    const double ft = rc(i, j) * wcc(j) * wcc(j);
    const double fb = rc(i, j - 1) * wcc(j - 1) * wcc(j - 1);
    auto node = [&](int in) {
      const double un = 0.5 * (uat(in, j) + uat(in, j - 1));
      const double wn = 0.5 * (wat(in, j) + wat(in - 1, j));
      const double rn = 0.25 * (rc(in, j) + rc(in - 1, j) + rc(in, j - 1) + rc(in - 1, j - 1));
      return rn * un * wn;
    };
    fv.values[c] = (ft - fb) / hy + (node(i + 1) - node(i)) / hx;
  });
  return out;
}

}  // namespace

double kinetic_energy(const ScalarField& rho, const VectorField& v) {
  VectorField rf = face_coefficient_arithmetic(rho);
  double acc = 0.0;
  for (int c = 0; c < 2; ++c)
    acc += kernels::block_sum(v[c].values.size(), [&, c](std::size_t i) {
      return rf[c].values[i] * v[c].values[i] * v[c].values[i];
    });
  return 0.5 * acc * rho.grid.cell_volume();
}

double elastic_energy(const VectorField& u, const PhaseField& theta0, const MaterialParams& mat) {
  const ScalarField a_cell = phase_coefficient(theta0.theta0, mat.mu1, mat.mu2);
  const ScalarField a_node = node_coefficient(a_cell);
  SymTensorField eu = sym_gradient(u);
  SymTensorField s = scale_tensor(eu, a_cell, a_node);
  return 0.5 * tensor_energy_pairing(s, eu);
}

double total_mass(const ScalarField& rho, const Grid& g) {
  return kernels::sum(rho.data()) * g.cell_volume();
}

MicroState step_microscale(const MicroState& state, const PhaseField& theta0,
                           const MaterialParams& mat, double dt, const MicroStepOptions& opt,
                           const Forcing& forcing, StepDiagnostics* diag) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_microscale: dt must be positive");
  const double th = opt.theta_scheme;
  if (th < 0.5 || th > 1.0)
    throw std::invalid_argument("step_microscale: theta scheme parameter in [1/2, 1]");
  mat.validate();
  const Grid& g = state.rho.grid;

  MicroState next;
  next.t = state.t + dt;

  // (i) transport with the current velocity (divergence-cleaned copy)
  VectorField v_adv = state.v;
  project_div_free(v_adv);
  next.rho = advect_indicator(state.rho, v_adv, dt);
  next.theta = advect_indicator(state.theta, v_adv, dt);

  // (ii) implicit saddle solve for v^{n+1}
  const ScalarField a_cell = phase_coefficient(theta0.theta0, mat.mu1, mat.mu2);
  const ScalarField b_cell = phase_coefficient(theta0.theta0, mat.nu1, mat.nu2);
  ScalarField k_impl = b_cell;  // theta*B + theta^2*dt*A
  {
    const double* pa = a_cell.values.data();
    double* pk = k_impl.values.data();
    const double c1 = th, c2 = th * th * dt;
    kernels::parallel_for(k_impl.values.size(),
                          [=](std::size_t i) { pk[i] = c1 * pk[i] + c2 * pa[i]; });
  }
  VectorField mass = face_coefficient_arithmetic(next.rho);
  for (int c = 0; c < 2; ++c) kernels::scale(mass[c].data(), 1.0 / dt);

  // rhs: rho/dt v^n + explicit stress pieces + forcing - convection
  VectorField rhs(g);
  for (int c = 0; c < 2; ++c) {
    const double* pm = mass[c].values.data();
    const double* pv = state.v[c].values.data();
    double* pr = rhs[c].values.data();
    kernels::parallel_for(rhs[c].values.size(), [=](std::size_t i) { pr[i] = pm[i] * pv[i]; });
  }
  {
    // div(A e(u^n)) + (1-th) div(B e(v^n)) + th(1-th) dt div(A e(v^n))
    const ScalarField a_node = node_coefficient(a_cell);
    SymTensorField eu = sym_gradient(state.u);
    SymTensorField su = scale_tensor(eu, a_cell, a_node);
    VectorField du = stress_divergence(su);
    for (int c = 0; c < 2; ++c) kernels::axpy(1.0, du[c].data(), rhs[c].data());
    if (th < 1.0) {
      ScalarField k_expl = b_cell;
      const double* pa = a_cell.values.data();
      double* pk = k_expl.values.data();
      const double c1 = 1.0 - th, c2 = th * (1.0 - th) * dt;
      kernels::parallel_for(k_expl.values.size(),
                            [=](std::size_t i) { pk[i] = c1 * pk[i] + c2 * pa[i]; });
      SymTensorField ev = sym_gradient(state.v);
      SymTensorField sv = scale_tensor(ev, k_expl, node_coefficient(k_expl));
      VectorField dv = stress_divergence(sv);
      for (int c = 0; c < 2; ++c) kernels::axpy(1.0, dv[c].data(), rhs[c].data());
    }
  }
  const double t_mid = state.t + th * dt;
  VectorField f_ext(g);
  if (forcing.active()) {
    f_ext = forcing.evaluate(g, t_mid);
    for (int c = 0; c < 2; ++c) kernels::axpy(1.0, f_ext[c].data(), rhs[c].data());
  }
  if (opt.convection) {
    VectorField conv = convection_term(state.rho, state.v);
    for (int c = 0; c < 2; ++c) kernels::axpy(-1.0, conv[c].data(), rhs[c].data());
  }

  SaddleSystem sys = build_saddle_system(g, k_impl, std::move(rhs), std::move(mass));
  SaddleResult sol = solve_saddle(sys, opt.saddle, &state.P);
  next.v = std::move(sol.v);
  next.P = std::move(sol.p);

  // (iii) u^{n+1} = u^n + dt v^{n+theta}
  VectorField v_mid(g);
  for (int c = 0; c < 2; ++c) {
    const double* pn = next.v[c].values.data();
    const double* po = state.v[c].values.data();
    double* pm = v_mid[c].values.data();
    kernels::parallel_for(v_mid[c].values.size(),
                          [=](std::size_t i) { pm[i] = th * pn[i] + (1.0 - th) * po[i]; });
  }
  next.u = state.u;
  for (int c = 0; c < 2; ++c) kernels::axpy(dt, v_mid[c].data(), next.u[c].data());

  if (diag) {
    const ScalarField b_node = node_coefficient(b_cell);
    SymTensorField em = sym_gradient(v_mid);
    SymTensorField sm = scale_tensor(em, b_cell, b_node);
    diag->dissipation_increment = dt * tensor_energy_pairing(sm, em);
    diag->forcing_work = forcing.active() ? dt * face_inner(f_ext, v_mid) : 0.0;
    diag->div_inf = sol.div_inf;
    diag->schur_r0 = sol.schur_r0;
    diag->outer_iterations = sol.outer_iterations;
  }
  return next;
}

MicroTrace run_microscale(MicroState state, const PhaseField& theta0, const MaterialParams& mat,
                          const MicroRunConfig& cfg) {
  MicroTrace trace;
  double diss = 0.0, work = 0.0;
  trace.rows.push_back({state.t, kinetic_energy(state.rho, state.v),
                        elastic_energy(state.u, theta0, mat), 0.0, 0.0});
  trace.snapshots.push_back(state);
  trace.snapshot_times.push_back(state.t);
  MicroRunConfig rc = cfg;
  for (int s = 0; s < rc.steps; ++s) {
    StepDiagnostics d;
    state = step_microscale(state, theta0, mat, rc.dt, rc.step, rc.forcing, &d);
    if (rc.step.saddle.residual_scale == 0.0 && d.schur_r0 > 0.0)
      rc.step.saddle.residual_scale = d.schur_r0;
    diss += d.dissipation_increment;
    work += d.forcing_work;
    trace.rows.push_back({state.t, kinetic_energy(state.rho, state.v),
                          elastic_energy(state.u, theta0, mat), diss, work});
    const bool last = s + 1 == rc.steps;
    if (last || (rc.snapshot_every > 0 && (s + 1) % rc.snapshot_every == 0)) {
      trace.snapshots.push_back(state);
      trace.snapshot_times.push_back(state.t);
    }
  }
  return trace;
}

EnergyReport energy_report(const MicroTrace& trace, const PhaseField&, const MaterialParams&,
                           double rel_tol) {
  EnergyReport rep;
  if (trace.rows.empty()) return rep;
  const EnergyRow& first = trace.rows.front();
  const EnergyRow& last = trace.rows.back();
  rep.initial_total = first.kinetic + first.elastic;
  rep.kinetic = last.kinetic;
  rep.elastic = last.elastic;
  rep.dissipated = last.dissipated;
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& r : trace.rows) {
    const double slack = rep.initial_total + r.work - (r.kinetic + r.elastic + r.dissipated);
    min_slack = std::min(min_slack, slack);
  }
  rep.min_slack = min_slack;
  rep.tolerance = rel_tol * std::max(rep.initial_total, 1e-300);
  rep.inequality_holds = min_slack >= -rep.tolerance;
  return rep;
}

VectorField make_random_divfree_velocity(const Grid& g, std::uint64_t seed, double amplitude) {
  VectorField v(g);
  SplitMix64 rng(seed);
  for (int c = 0; c < 2; ++c)
    for (auto& x : v[c].values) x = 2.0 * rng.uniform() - 1.0;
  enforce_velocity_bc(g, v);
  // project onto the discretely divergence-free subspace
  ScalarField d = discrete_div(v);
  PoissonResult pr = solve_neumann_poisson(d, 1e-12, 1.0);
  VectorField gphi = discrete_grad(pr.phi);
  for (int c = 0; c < 2; ++c) kernels::axpy(-1.0, gphi[c].data(), v[c].data());
  const double m = max_abs(v);
  if (m > 0.0 && amplitude > 0.0)
    for (int c = 0; c < 2; ++c) kernels::scale(v[c].data(), amplitude / m);
  return v;
}

}  // namespace homog
