#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homog/correctors.hpp"
#include "homog/microscale.hpp"
#include "homog/validation.hpp"

namespace homog {

struct ConfigError : std::runtime_error {
  int line;
  ConfigError(int line_, const std::string& msg)
      : std::runtime_error("config line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Plain INI-style configuration: [section] blocks of key = value pairs,
// '#' or ';' comments. Sections: grid, material, microstructure, time,
// solver, run.
struct SimConfig {
  // [grid]
  int dim = 2;
  std::array<int, 3> n{64, 64, 1};
  std::array<double, 3> length{1.0, 1.0, 1.0};
  // [material]
  MaterialParams material;
  // [microstructure]
  StructureSpec structure;
  // [time]
  double T = 0.1;
  double dt = 0.0;  // 0: diffusive default h^2 rho_min / (4 nu_max)
  int K = 200;
  double ds = 0.0;        // 0: horizon / K
  double horizon = 0.0;   // 0: material default
  double theta_scheme = 0.5;
  int snapshot_every = 0;
  // [solver]
  double tol = 1e-10;
  int iter_cap_per_n = 50;
  std::string mode = "periodic-cell";  // periodic-cell | dirichlet-rve
  std::string preconditioner = "fourier";
  std::string kernel_backend = "openmp";
  // [run]
  bool convection = false;
  std::string out = "runs/out";
  std::uint64_t seed = 1;
  std::string forcing = "none";  // none | shear_sine
  double forcing_amplitude = 0.0;
  double forcing_ramp = 0.0;
  std::string initial_velocity = "zero";  // zero | random | shear_sine
  double v0_amplitude = 0.0;
  std::vector<double> eps_list;  // convergence study scenario (validate stage)

  Grid make_grid() const;
  SaddleOptions saddle_options() const;
  Forcing make_forcing() const;
  VectorField make_initial_velocity(const Grid& g) const;
  double effective_dt(const Grid& g) const;
  CorrectorOptions corrector_options() const;
  int micro_steps(const Grid& g) const;
};

SimConfig parse_config_text(const std::string& text);
SimConfig parse_config_file(const std::string& path);
std::string serialize_config(const SimConfig& c);
std::uint64_t config_hash(const SimConfig& c);

}  // namespace homog
