#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "homog/correctors.hpp"
#include "homog/microscale.hpp"

namespace homog {

using ComplexPairMatrix = std::array<std::array<std::complex<double>, 3>, 3>;
using MandelVec = std::array<double, 3>;

// Effective single-phase law: constant instantaneous tensors and sampled
// memory kernels, all as pair matrices in the Mandel basis.
struct EffectiveLaw {
  MaterialCase mat_case = MaterialCase::kelvin_voigt;
  int dim = 2;
  int K = 0;
  double ds = 0.0;
  PairMatrix A{}, B{};
  std::vector<PairMatrix> C;  // K+1 samples at s_k = k ds
  std::vector<PairMatrix> D;  // FSI only
};

// Flux averages -> Mandel pair matrices. The memory-kernel orientation was
// already folded into the corrector flux samples, so kernels read directly
// as averages here (FSI B needs the section-7 sign flip: B = -avg F2).
EffectiveLaw assemble_effective_law(const CorrectorSet& cs);

// Time-harmonic modulus: KV  M(w) = A + iw B + iw C^(w),
//                        FSI M(w) = A + iw B + C^(w) + iw D^(w),
// with ^ the trapezoid transform of the sampled kernel at frequency w.
ComplexPairMatrix complex_modulus(const EffectiveLaw& law, double omega);

double major_asymmetry(const PairMatrix& m);                 // ||M - M^T||_inf
double min_eigen_tracefree(const PairMatrix& m);             // on trace-free strains
double pair_matrix_inf_norm(const PairMatrix& m);
PairMatrix pair_matrix_diff(const PairMatrix& a, const PairMatrix& b);

// Pointwise constitutive response to a spatially uniform Mandel strain
// history (step dt): T_n = A eps_n + B deps_n + sum w_k C(s_k) deps(t-s_k)
// (FSI adds C * eps history and D * deps history). Rates are backward
// differences with eps(-dt) = 0.
std::vector<MandelVec> stress_response(const EffectiveLaw& law,
                                       const std::vector<MandelVec>& strain, double dt);

struct PronyFit {
  double coefficient = 0.0;  // c in c exp(-rate s)
  double rate = 0.0;
  double rel_l2_residual = 0.0;
  bool valid = false;
};

// Single-exponential fit, least squares in log space over samples above the
// relative floor.
PronyFit fit_prony(const std::vector<double>& samples, double ds, double floor_rel = 1e-8);

// Kernel entry extraction (Mandel indices).
std::vector<double> kernel_entry(const std::vector<PairMatrix>& k, int a, int b);

// ---- macroscale solver ----------------------------------------------------

struct MacroState {
  double t = 0.0;
  ScalarField rho;
  VectorField v;
  VectorField u;
  ScalarField P;
  // newest-first strain histories at solver steps (v-strain always; u-strain
  // kept for the FSI C convolution)
  std::vector<SymTensorField> ev_hist;
  std::vector<SymTensorField> eu_hist;
};

MacroState make_initial_macro_state(const Grid& g, double rho0, const VectorField& v0,
                                    const EffectiveLaw& law);

struct MacroStepOptions {
  double theta_scheme = 0.5;
  SaddleOptions saddle;
};

MacroState step_effective(const MacroState& state, const EffectiveLaw& law, double dt,
                          const MacroStepOptions& opt, const Forcing& forcing = {},
                          StepDiagnostics* diag = nullptr);

struct MacroRunResult {
  std::vector<double> times;
  std::vector<VectorField> velocities;  // one per step when store_velocities
  MacroState final_state;
};

MacroRunResult run_macro(MacroState state, const EffectiveLaw& law, int steps, double dt,
                         const MacroStepOptions& opt, const Forcing& forcing = {},
                         bool store_velocities = false);

// ---- serialization ---------------------------------------------------------

void write_effective_law(const std::string& path, const EffectiveLaw& law);
EffectiveLaw read_effective_law(const std::string& path);

}  // namespace homog
