#pragma once

#include <cstdint>
#include <string>

#include "homog/field.hpp"

namespace homog {

enum class StructureKind { laminate, checkerboard, random_inclusions };

StructureKind structure_kind_from_string(const std::string& s);
std::string to_string(StructureKind k);

struct StructureSpec {
  StructureKind kind = StructureKind::laminate;
  double vf = 0.5;        // phase-1 volume fraction target
  double epsilon = 0.25;  // microstructural period / fineness scale
  int direction = 0;      // lamination normal axis
  std::uint64_t seed = 1;
  int min_gap = 2;        // cells between random inclusions
};

// Frozen-interface indicator of phase 1, cell-wise values in {0,1}.
struct PhaseField {
  Grid grid;
  ScalarField theta0;
  double epsilon = 0.0;
  StructureSpec descriptor;
};

// Throws std::invalid_argument for unresolvable epsilon (needs at least
// 4 cells per period) or out-of-range vf.
PhaseField generate_phase_field(const StructureSpec& spec, const Grid& grid);

double measure_volume_fraction(const PhaseField& phase);

// True when the theta0 = 0 phase is face-connected (flood fill honoring bc).
bool matrix_phase_connected(const PhaseField& phase);

// Exact lattice periodicity check: theta0(x + eps e_k) == theta0(x).
bool is_epsilon_periodic(const PhaseField& phase);

// Deterministic splitmix64 stream; identical across platforms.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next();
  double uniform();                  // [0,1)
  int uniform_int(int lo, int hi);   // inclusive bounds
};

}  // namespace homog
