#pragma once

#include <array>
#include <vector>

#include "homog/material.hpp"
#include "homog/saddle.hpp"

namespace homog {

// Averaged symmetric-tensor sample (2D components F11, F22, F12).
using TensorAvg = std::array<double, 3>;

TensorAvg tensor_average(const SymTensorField& f);

// Corrector chain for one symmetric index pair.
//
// Kelvin-Voigt chain:
//   n    : -div(A(I^pq + e(n))) - grad P1 = 0,            F1 = A(I^pq + e(n))
//   m_T  : -div(B(I^pq + e(n)) - B e(m_T)) - grad P2 = 0, F2 = B(I^pq + e(n) - e(m_T))
//   m(s) : forward march div(A e(m) + B e(m_s)) = grad P3 from m(0) = m_T
// FSI chain (A = A1 theta0, degenerate):
//   n_T  : div(A I^pq - B e(n_T)) - grad P1 = 0,          F1 = A I^pq - B e(n_T)
//   m_T  : -div(B(I^pq + e(m_T))) - grad P2 = 0,          F2 = -B(I^pq + e(m_T))
//   n(s) : march from n_T,   m(s): march from m_T
//
// Memory flux samples are recorded with the kernel orientation folded in, so
// that assembling the effective law reads kernels directly as averages:
//   KV:  F3[k] = -(A e(m_k) + B e(dm_k))         (C kernel)
//   FSI: F3[k] = -(A e(n_k) + B e(dn_k))         (C kernel)
//        F4[k] = +(A e(m_k) + B e(dm_k))         (D kernel)
// The sign asymmetry comes from the pairing: the C convolution in the FSI
// corrector acts on e(w) directly while the D (and KV C) convolution acts on
// e(w_t) and picks up a sign under the time integration by parts.
struct PairCorrectors {
  IndexPair pq{0, 0};
  VectorField n;  // KV stationary corrector, or FSI n_T
  ScalarField P1;
  SymTensorField F1;
  VectorField m_T;
  ScalarField P2;
  SymTensorField F2;
  TensorAvg F1_avg{}, F2_avg{};
  std::vector<TensorAvg> F3_avg;  // K+1 samples
  std::vector<TensorAvg> F4_avg;  // FSI only
  std::vector<VectorField> m_samples;  // kept when keep_fields (apply operator)
  std::vector<VectorField> n_samples;  // FSI memory corrector samples
  double max_div = 0.0;                // worst discrete divergence over the chain
};

struct CorrectorOptions {
  int K = 200;
  double ds = 0.0;          // 0: derived from horizon
  double horizon = 0.0;     // 0: default 2 * beta2/alpha1 estimate
  bool keep_fields = false; // retain memory-corrector field samples
  bool crank_nicolson = false;
  SaddleOptions saddle;
};

struct CorrectorSet {
  MaterialCase mat_case = MaterialCase::kelvin_voigt;
  Grid grid;
  double ds = 0.0;
  int K = 0;
  std::vector<PairCorrectors> pairs;  // sym_pairs(dim) order
};

// Individual operations (KV names per the chain above).
struct StationarySolution {
  VectorField field;
  ScalarField pressure;
  SymTensorField flux;
  double div_inf = 0.0;
};

StationarySolution solve_corrector_n(IndexPair pq, const PhaseField& theta0,
                                     const MaterialParams& mat, const SaddleOptions& opt = {});
StationarySolution solve_corrector_mT(IndexPair pq, const VectorField* n_pq,
                                      const PhaseField& theta0, const MaterialParams& mat,
                                      const SaddleOptions& opt = {});

struct MemoryMarch {
  std::vector<TensorAvg> flux_avg;       // K+1 samples, kernel orientation applied
  std::vector<VectorField> samples;      // kept when keep_fields
  std::vector<double> sample_norms;      // ||m(s_k)||_L2
  double max_div = 0.0;
  SymTensorField flux0;                  // flux field at s = 0 (consistency checks)
  double initial_enorm = 0.0;            // ||e(m(0))||
  double initial_rate_enorm = 0.0;       // ||e(m_s(0+))||
};

// March div(A e(m) + B e(m_s)) = grad P from m(0) = initial; flux samples are
// A e(m_k) + B e(dm_k) times `orientation`.
MemoryMarch solve_memory_corrector(IndexPair pq, const VectorField& initial,
                                   const PhaseField& theta0, const MaterialParams& mat, int K,
                                   double ds, double orientation, bool keep_fields = false,
                                   bool crank_nicolson = false, const SaddleOptions& opt = {});

PairCorrectors solve_pair_kv(IndexPair pq, const PhaseField& theta0, const MaterialParams& mat,
                             const CorrectorOptions& opt);
PairCorrectors solve_fsi_correctors(IndexPair pq, const PhaseField& theta0,
                                    const MaterialParams& mat, const CorrectorOptions& opt);

CorrectorSet solve_all_correctors(const PhaseField& theta0, const MaterialParams& mat,
                                  CorrectorOptions opt);

// Oscillating test function reconstruction: w supplied as uniform time
// samples (step ds, w[last] = 0), returns w_eps with the discrete divergence
// repaired exactly through a Neumann potential.
struct TimeSampledField {
  std::vector<VectorField> samples;
  double dt = 0.0;
  double time(int i) const { return i * dt; }
};

TimeSampledField apply_corrector_operator(const TimeSampledField& w, const CorrectorSet& cs);

double kernel_horizon_default(const MaterialParams& mat);

}  // namespace homog
