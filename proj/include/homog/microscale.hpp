#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "homog/material.hpp"
#include "homog/saddle.hpp"

namespace homog {

// Two-phase microscale state on the MAC grid. u is the time integral of v
// and starts at zero; theta is the advected copy of the indicator while the
// constitutive law keeps the frozen theta0.
struct MicroState {
  double t = 0.0;
  ScalarField rho;
  VectorField v;
  VectorField u;
  ScalarField theta;
  ScalarField P;
};

struct CflError : std::runtime_error {
  double suggested_dt;
  CflError(const std::string& msg, double dt) : std::runtime_error(msg), suggested_dt(dt) {}
};

// Deviatoric Kelvin-Voigt stress on the frozen interface:
// T = theta0 (mu1 e(u) + nu1 e(v)) + (1-theta0)(mu2 e(u) + nu2 e(v)).
SymTensorField kv_stress(const VectorField& u, const VectorField& v, const PhaseField& theta0,
                         const MaterialParams& mat);

// Conservative monotone upwind transport of a cell field by a face velocity.
// Rejects steps violating max|v| dt <= h with a suggested dt.
ScalarField advect_indicator(const ScalarField& field, const VectorField& v, double dt);

struct Forcing {
  enum class Kind { none, shear_sine } kind = Kind::none;
  double amplitude = 0.0;
  // time modulation: amplitude * (ramp ? min(1, t/ramp) : 1)
  double ramp = 0.0;

  bool active() const { return kind != Kind::none && amplitude != 0.0; }
  VectorField evaluate(const Grid& g, double t) const;
};

struct MicroStepOptions {
  bool convection = false;
  double theta_scheme = 0.5;  // 1/2 midpoint .. 1 backward Euler
  SaddleOptions saddle;
};

struct StepDiagnostics {
  double dissipation_increment = 0.0;  // dt * B-energy of v^{n+theta}
  double forcing_work = 0.0;           // dt * <f, v^{n+theta}>
  double div_inf = 0.0;
  double schur_r0 = 0.0;  // cold-start residual reference for warm marches
  int outer_iterations = 0;
};

MicroState make_initial_state(const PhaseField& theta0, const MaterialParams& mat,
                              const VectorField& v0);

// One semi-implicit step: transport rho/theta with v^n, explicit convection,
// implicit stress via the combined coefficient theta*B + theta^2*dt*A,
// then u += dt v^{n+theta}.
MicroState step_microscale(const MicroState& state, const PhaseField& theta0,
                           const MaterialParams& mat, double dt, const MicroStepOptions& opt,
                           const Forcing& forcing = {}, StepDiagnostics* diag = nullptr);

struct EnergyRow {
  double t;
  double kinetic;
  double elastic;
  double dissipated;  // cumulative
  double work;        // cumulative forcing work
};

struct MicroTrace {
  std::vector<EnergyRow> rows;  // one per step, including t = 0
  std::vector<MicroState> snapshots;
  std::vector<double> snapshot_times;
};

struct EnergyReport {
  double kinetic = 0.0;
  double elastic = 0.0;
  double dissipated = 0.0;
  double initial_total = 0.0;
  double min_slack = 0.0;  // min over steps of initial + work - (kin+el+diss)
  bool inequality_holds = false;
  double tolerance = 0.0;
};

double kinetic_energy(const ScalarField& rho, const VectorField& v);
double elastic_energy(const VectorField& u, const PhaseField& theta0, const MaterialParams& mat);

struct MicroRunConfig {
  int steps = 0;
  double dt = 0.0;
  MicroStepOptions step;
  Forcing forcing;
  int snapshot_every = 0;  // 0: endpoints only
};

MicroTrace run_microscale(MicroState state, const PhaseField& theta0, const MaterialParams& mat,
                          const MicroRunConfig& cfg);

// Inequality audit of a completed run; tolerance is relative to the initial
// total (per-step slack may be the tolerance more negative than -work).
EnergyReport energy_report(const MicroTrace& trace, const PhaseField& theta0,
                           const MaterialParams& mat, double rel_tol = 1e-10);

// Seeded divergence-free face field with max|v| = amplitude.
VectorField make_random_divfree_velocity(const Grid& g, std::uint64_t seed, double amplitude);

double total_mass(const ScalarField& rho, const Grid& g);

}  // namespace homog
