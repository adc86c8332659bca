#pragma once

#include <complex>
#include <string>
#include <vector>

#include "homog/effective.hpp"

namespace homog {

// Exact complex shear modulus of a two-phase series laminate:
// [vf/(mu1 + i w nu1) + (1-vf)/(mu2 + i w nu2)]^{-1}.
// Pure-fluid corner (both moduli zero at w = 0) reports the asymptote 0.
std::complex<double> laminate_oracle(const MaterialParams& mat, double vf, double omega);

struct StrainProgram {
  enum class Kind { zero, step } kind = Kind::step;
  double amplitude = 1.0;
};

// Two Kelvin-Voigt elements in series under common stress, integrated with
// fine RK4 steps. Used to pin kernel decay rates and relaxation curves.
struct OracleSeries {
  std::vector<double> t;
  std::vector<double> stress;
  double long_time = 0.0;        // analytic t -> infinity stress
  double relaxation_rate = 0.0;  // fitted decay rate of stress - long_time
};

OracleSeries series_ode_oracle(const MaterialParams& mat, double vf, const StrainProgram& prog,
                               double T, double dt_fine);

// Analytic relaxation rate of the series pair (common-stress internal mode).
double series_relaxation_rate(const MaterialParams& mat, double vf);

struct ConvergenceScenario {
  Grid grid;
  MaterialParams mat;
  StructureSpec structure;  // epsilon replaced per run
  Forcing forcing;
  double T = 0.25;
  double dt = 2.5e-3;
  double theta_scheme = 0.5;
  SaddleOptions saddle;
  std::string name = "laminate-shear";
};

struct ConvergenceReport {
  std::string scenario;
  std::vector<double> eps_list;
  std::vector<double> v_errors;  // ||v_eps - v_bar||_{L2(I x U)}
  std::vector<double> u_errors;
  bool strictly_decreasing = false;
};

// Runs the microscale per epsilon and the macroscale once from the assembled
// law; reports space-time L2 errors. Convection off (linear regime).
ConvergenceReport convergence_study(const ConvergenceScenario& sc,
                                    const std::vector<double>& eps_list);

struct AuditEntry {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
};

// Invariant audits over in-memory artifacts (the pipeline wraps these for
// on-disk runs). Never throws on failures; reports measured slack.
AuditReport audit_divergence(const VectorField& v, double threshold, const std::string& name);
AuditReport audit_corrector_set(const CorrectorSet& cs, double div_threshold = 1e-8);
AuditReport audit_effective_law(const EffectiveLaw& law, const MaterialParams& mat,
                                double sym_tol = 1e-8, double eig_slack = 1e-6);
AuditReport audit_energy(const MicroTrace& trace, const PhaseField& theta0,
                         const MaterialParams& mat, double rel_tol = 1e-10);
AuditReport audit_mass_conservation(const MicroTrace& trace, const Grid& g, double rel_tol = 1e-10);
AuditReport audit_density_bounds(const MicroTrace& trace, const MaterialParams& mat,
                                 double tol = 1e-12);

void merge(AuditReport& into, const AuditReport& from);

}  // namespace homog
