#pragma once

#include <stdexcept>
#include <string>

#include "homog/field.hpp"
#include "homog/microstructure.hpp"

namespace homog {

enum class MaterialCase { kelvin_voigt, fsi };

MaterialCase material_case_from_string(const std::string& s);
std::string to_string(MaterialCase c);

// Phase moduli and densities; nondimensional throughout.
struct MaterialParams {
  double mu1 = 1.0, mu2 = 1.0;    // elastic moduli
  double nu1 = 1.0, nu2 = 1.0;    // viscosities
  double rho1 = 1.0, rho2 = 1.0;  // densities
  MaterialCase mat_case = MaterialCase::kelvin_voigt;

  double alpha1() const { return std::min(mu1, mu2); }
  double alpha2() const { return std::max(mu1, mu2); }
  double beta1() const { return std::min(nu1, nu2); }
  double beta2() const { return std::max(nu1, nu2); }

  // Moduli may vanish (the stepper degenerates to density-dependent Stokes);
  // the stationary corrector solve enforces ellipticity where it needs it.
  void validate() const {
    if (!(nu1 > 0.0) || !(nu2 > 0.0)) throw std::invalid_argument("viscosities must be positive");
    if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw std::invalid_argument("densities must be positive");
    if (mu1 < 0.0 || mu2 < 0.0) throw std::invalid_argument("moduli must be nonnegative");
    if (mat_case == MaterialCase::fsi && mu2 != 0.0)
      throw std::invalid_argument("fsi case requires mu2 = 0 (phase two is a Newtonian fluid)");
  }
};

// theta-weighted cell coefficient c1*theta0 + c2*(1-theta0).
ScalarField phase_coefficient(const ScalarField& theta0, double c1, double c2);

inline ScalarField elastic_coefficient(const PhaseField& ph, const MaterialParams& m) {
  return phase_coefficient(ph.theta0, m.mu1, m.mu2);
}
inline ScalarField viscous_coefficient(const PhaseField& ph, const MaterialParams& m) {
  return phase_coefficient(ph.theta0, m.nu1, m.nu2);
}
inline ScalarField density_field(const PhaseField& ph, const MaterialParams& m) {
  return phase_coefficient(ph.theta0, m.rho1, m.rho2);
}

}  // namespace homog
