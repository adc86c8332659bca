#include "homog/validation.hpp"

#include <cmath>

#include "homog/kernels.hpp"
#include "homog/operators.hpp"

namespace homog {

std::complex<double> laminate_oracle(const MaterialParams& mat, double vf, double omega) {
  if (!(vf > 0.0 && vf < 1.0)) throw std::invalid_argument("laminate_oracle: vf in (0,1)");
  const std::complex<double> d1(mat.mu1, omega * mat.nu1);
  const std::complex<double> d2(mat.mu2, omega * mat.nu2);
  if (std::abs(d1) == 0.0 || std::abs(d2) == 0.0) return {0.0, 0.0};  // pure-fluid asymptote
  return 1.0 / (vf / d1 + (1.0 - vf) / d2);
}

double series_relaxation_rate(const MaterialParams& mat, double vf) {
  const double mu_sw = vf * mat.mu2 + (1.0 - vf) * mat.mu1;
  const double nu_sw = vf * mat.nu2 + (1.0 - vf) * mat.nu1;
  return mu_sw / nu_sw;
}

OracleSeries series_ode_oracle(const MaterialParams& mat, double vf, const StrainProgram& prog,
                               double T, double dt_fine) {
  if (!(vf > 0.0 && vf < 1.0)) throw std::invalid_argument("series_ode_oracle: vf in (0,1)");
  OracleSeries out;
  const double eps0 = prog.kind == StrainProgram::Kind::step ? prog.amplitude : 0.0;
  const double nu_sw = vf * mat.nu2 + (1.0 - vf) * mat.nu1;
  const double mu_sw = vf * mat.mu2 + (1.0 - vf) * mat.mu1;

  // instantaneous strain split after a step: common impulsive stress forces
  // nu1 de1 = nu2 de2
  double e1 = eps0 * mat.nu2 / nu_sw;
  auto rhs = [&](double e1v) {
    const double e2 = (eps0 - vf * e1v) / (1.0 - vf);
    return (1.0 - vf) * (mat.mu2 * e2 - mat.mu1 * e1v) / nu_sw;
  };
  auto sigma = [&](double e1v) { return mat.mu1 * e1v + mat.nu1 * rhs(e1v); };

  out.long_time = mu_sw > 0.0 ? mat.mu1 * mat.mu2 * eps0 / mu_sw : 0.0;

  const int n = std::max(2, static_cast<int>(std::ceil(T / dt_fine)));
  const double h = T / n;
  out.t.reserve(n + 1);
  out.stress.reserve(n + 1);
  out.t.push_back(0.0);
  out.stress.push_back(sigma(e1));
  for (int i = 0; i < n; ++i) {
    const double k1 = rhs(e1);
    const double k2 = rhs(e1 + 0.5 * h * k1);
    const double k3 = rhs(e1 + 0.5 * h * k2);
    const double k4 = rhs(e1 + h * k3);
    e1 += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.t.push_back((i + 1) * h);
    out.stress.push_back(sigma(e1));
  }

  // fitted decay rate of |stress - long_time| over its resolvable window
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  const double scale = std::fabs(out.stress.front() - out.long_time);
  for (std::size_t i = 0; i < out.stress.size(); ++i) {
    const double d = std::fabs(out.stress[i] - out.long_time);
    if (scale == 0.0 || d < 1e-8 * scale) break;
    const double x = out.t[i];
    const double y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt > 2) {
    const double denom = cnt * sxx - sx * sx;
    out.relaxation_rate = denom != 0.0 ? -(cnt * sxy - sx * sy) / denom : 0.0;
  }
  return out;
}

ConvergenceReport convergence_study(const ConvergenceScenario& sc,
                                    const std::vector<double>& eps_list) {
  ConvergenceReport rep;
  rep.scenario = sc.name;
  rep.eps_list = eps_list;
  if (eps_list.empty()) return rep;
  sc.mat.validate();

  for (double eps : eps_list) {
    const double cells = eps * sc.grid.n[0] / sc.grid.length[0];
    if (cells < 8.0)
      throw std::invalid_argument("convergence_study: eps " + std::to_string(eps) +
                                  " under-resolved (needs eps*n/length >= 8)");
  }

  const int steps = static_cast<int>(std::lround(sc.T / sc.dt));

  // effective law from the coarsest microstructure (laminate cell averages
  // are epsilon-independent); kernel sampled on the run's time grid
  StructureSpec ref = sc.structure;
  ref.epsilon = eps_list.front();
  PhaseField theta_ref = generate_phase_field(ref, sc.grid);
  CorrectorOptions copt;
  copt.K = steps;
  copt.ds = sc.dt;
  copt.saddle = sc.saddle;
  CorrectorSet cs = solve_all_correctors(theta_ref, sc.mat, copt);
  EffectiveLaw law = assemble_effective_law(cs);

  const double rho0 = measure_volume_fraction(theta_ref) * sc.mat.rho1 +
                      (1.0 - measure_volume_fraction(theta_ref)) * sc.mat.rho2;
  MacroStepOptions mopt;
  mopt.theta_scheme = sc.theta_scheme;
  mopt.saddle = sc.saddle;
  MacroState ms = make_initial_macro_state(sc.grid, rho0, VectorField(sc.grid), law);

  // store the macro velocity/displacement trace for the space-time error
  std::vector<VectorField> vbar, ubar;
  vbar.reserve(steps + 1);
  ubar.reserve(steps + 1);
  vbar.push_back(ms.v);
  ubar.push_back(ms.u);
  for (int s = 0; s < steps; ++s) {
    StepDiagnostics d;
    ms = step_effective(ms, law, sc.dt, mopt, sc.forcing, &d);
    if (mopt.saddle.residual_scale == 0.0 && d.schur_r0 > 0.0)
      mopt.saddle.residual_scale = d.schur_r0;
    vbar.push_back(ms.v);
    ubar.push_back(ms.u);
  }

  MicroStepOptions micro_opt;
  micro_opt.convection = false;
  micro_opt.theta_scheme = sc.theta_scheme;
  micro_opt.saddle = sc.saddle;

  auto l2_diff_sq = [&](const VectorField& a, const VectorField& b) {
    double acc = 0.0;
    for (int c = 0; c < 2; ++c)
      acc += kernels::block_sum(a[c].values.size(), [&, c](std::size_t i) {
        const double d = a[c].values[i] - b[c].values[i];
        return d * d;
      });
    return acc * sc.grid.cell_volume();
  };

  for (double eps : eps_list) {
    StructureSpec spec = sc.structure;
    spec.epsilon = eps;
    PhaseField theta = generate_phase_field(spec, sc.grid);
    MicroState st = make_initial_state(theta, sc.mat, VectorField(sc.grid));
    MicroStepOptions mo = micro_opt;
    double verr = 0.0, uerr = 0.0;
    // trapezoid in time
    verr += 0.5 * l2_diff_sq(st.v, vbar[0]);
    uerr += 0.5 * l2_diff_sq(st.u, ubar[0]);
    for (int s = 0; s < steps; ++s) {
      StepDiagnostics d;
      st = step_microscale(st, theta, sc.mat, sc.dt, mo, sc.forcing, &d);
      if (mo.saddle.residual_scale == 0.0 && d.schur_r0 > 0.0)
        mo.saddle.residual_scale = d.schur_r0;
      const double w = (s + 1 == steps) ? 0.5 : 1.0;
      verr += w * l2_diff_sq(st.v, vbar[s + 1]);
      uerr += w * l2_diff_sq(st.u, ubar[s + 1]);
    }
    rep.v_errors.push_back(std::sqrt(verr * sc.dt));
    rep.u_errors.push_back(std::sqrt(uerr * sc.dt));
  }

  rep.strictly_decreasing = true;
  for (std::size_t i = 1; i < rep.v_errors.size(); ++i)
    if (!(rep.v_errors[i] < rep.v_errors[i - 1])) rep.strictly_decreasing = false;
  return rep;
}

void merge(AuditReport& into, const AuditReport& from) {
  into.entries.insert(into.entries.end(), from.entries.begin(), from.entries.end());
}

AuditReport audit_divergence(const VectorField& v, double threshold, const std::string& name) {
  AuditReport rep;
  const double d = max_abs(discrete_div(v));
  rep.entries.push_back({name + ": discrete divergence", d <= threshold, d, threshold});
  return rep;
}

AuditReport audit_corrector_set(const CorrectorSet& cs, double div_threshold) {
  AuditReport rep;
  for (const auto& pc : cs.pairs) {
    const std::string tag =
        "corrector pair (" + std::to_string(pc.pq.p + 1) + "," + std::to_string(pc.pq.q + 1) + ")";
    rep.entries.push_back(
        {tag + ": max divergence over chain", pc.max_div <= div_threshold, pc.max_div,
         div_threshold});
    if (cs.grid.periodic()) {
      double mmean = 0.0;
      for (int c = 0; c < 2; ++c) mmean = std::max(mmean, std::fabs(mean(pc.n[c])));
      rep.entries.push_back({tag + ": zero-mean corrector", mmean <= 1e-10, mmean, 1e-10});
    }
  }
  return rep;
}

AuditReport audit_effective_law(const EffectiveLaw& law, const MaterialParams& mat, double sym_tol,
                                double eig_slack) {
  AuditReport rep;
  const double asymA = major_asymmetry(law.A);
  const double asymB = major_asymmetry(law.B);
  rep.entries.push_back({"A_bar major symmetry", asymA <= sym_tol, asymA, sym_tol});
  rep.entries.push_back({"B_bar major symmetry", asymB <= sym_tol, asymB, sym_tol});
  const double eigB = min_eigen_tracefree(law.B);
  const double bndB = mat.beta1() * (1.0 - eig_slack);
  rep.entries.push_back({"B_bar coercive on trace-free strains", eigB >= bndB, eigB, bndB});
  if (law.mat_case == MaterialCase::kelvin_voigt) {
    const double eigA = min_eigen_tracefree(law.A);
    const double bndA = mat.alpha1() * (1.0 - eig_slack);
    rep.entries.push_back({"A_bar coercive on trace-free strains", eigA >= bndA, eigA, bndA});
  }
  if (!law.C.empty()) {
    const double c0 = pair_matrix_inf_norm(law.C.front());
    double cmax = 0.0;
    for (const auto& ck : law.C) cmax = std::max(cmax, pair_matrix_inf_norm(ck));
    const double bound = c0 * (1.0 + 1e-6);
    rep.entries.push_back({"kernel samples bounded by C(0)", cmax <= bound || c0 == 0.0,
                           cmax, bound});
  }
  return rep;
}

AuditReport audit_energy(const MicroTrace& trace, const PhaseField& theta0,
                         const MaterialParams& mat, double rel_tol) {
  AuditReport rep;
  EnergyReport er = energy_report(trace, theta0, mat, rel_tol);
  rep.entries.push_back(
      {"energy inequality min slack", er.inequality_holds, er.min_slack, -er.tolerance});
  return rep;
}

AuditReport audit_mass_conservation(const MicroTrace& trace, const Grid& g, double rel_tol) {
  AuditReport rep;
  if (trace.snapshots.empty()) return rep;
  const double m0 = total_mass(trace.snapshots.front().rho, g);
  double worst = 0.0;
  for (const auto& s : trace.snapshots) {
    const double m = total_mass(s.rho, g);
    worst = std::max(worst, std::fabs(m - m0) / std::max(std::fabs(m0), 1e-300));
  }
  rep.entries.push_back({"total mass conservation (relative)", worst <= rel_tol, worst, rel_tol});
  return rep;
}

AuditReport audit_density_bounds(const MicroTrace& trace, const MaterialParams& mat, double tol) {
  AuditReport rep;
  const double lo = std::min(mat.rho1, mat.rho2);
  const double hi = std::max(mat.rho1, mat.rho2);
  double worst = 0.0;
  for (const auto& s : trace.snapshots)
    for (double r : s.rho.values)
      worst = std::max(worst, std::max(lo - r, r - hi));
  rep.entries.push_back({"density maximum principle", worst <= tol, worst, tol});
  return rep;
}

}  // namespace homog
