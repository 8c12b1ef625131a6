#include "tline/material.hpp"

#include <cmath>
#include <string>

#include "tline/errors.hpp"

namespace tline {

namespace {

void check(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(key) + " must be positive", key);
}

}  // namespace

void validate(const MaterialProperties& p) {
  check(p.young_modulus, "young_modulus");
  check(p.damage_layer_width, "damage_layer_width");
  check(p.fracture_energy, "fracture_energy");
  check(p.density, "density");
  check(p.aging_coeff, "aging_coeff");
  check(p.thermal_conductivity, "thermal_conductivity");
  check(p.electrical_conductivity, "electrical_conductivity");
  check(p.resistivity_temp_coeff, "resistivity_temp_coeff");
  check(p.reference_temp, "reference_temp");
  check(p.air.density, "air_density");
  check(p.air.kinematic_viscosity, "kinematic_viscosity");
  check(p.air.thermal_conductivity, "air_thermal_conductivity");
  check(p.air.prandtl, "prandtl");
  check(p.ice.density, "ice_density");
  check(p.ice.resistivity, "ice_resistivity");
  check(p.ice.thermal_conductivity, "ice_thermal_conductivity");
  check(p.ice.latent_heat, "latent_heat");
}

}  // namespace tline
