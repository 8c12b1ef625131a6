#pragma once

// Aluminum conductor, air and ice constants. Units are SI except the aging
// coefficient, which carries years so that fatigue integrates in years.

namespace tline {

inline constexpr double kGravity = 9.81;               // m/s^2
inline constexpr double kStefanBoltzmann = 5.670e-8;   // W/(m^2 K^4)
inline constexpr double kSecondsPerYear = 365.25 * 24.0 * 3600.0;

struct AirProperties {
  double density = 1.225;                // kg/m^3
  double kinematic_viscosity = 15e-6;    // m^2/s
  double thermal_conductivity = 0.0295;  // W/(m K)
  double prandtl = 0.71;
};

struct IceProperties {
  double density = 917.0;                // kg/m^3
  double resistivity = 1e9;              // Ohm m
  double thermal_conductivity = 2.39;    // W/(m K)
  double latent_heat = 3.36e5;           // J/kg
};

struct MaterialProperties {
  double young_modulus = 69e9;            // Pa
  double damage_layer_width = 0.02;       // m
  double fracture_energy = 1e4;           // N/m
  double density = 2700.0;                // kg/m^3
  double aging_coeff = 1e-10;             // m^5/(yr kg)
  double thermal_conductivity = 237.0;    // W/(m K)
  double electrical_conductivity = 3.77e7;  // S/m at reference_temp
  double resistivity_temp_coeff = 3.9e-3;   // 1/K
  double reference_temp = 298.15;           // K
  AirProperties air;
  IceProperties ice;
};

/// Throws ValidationError naming the first non-positive or non-finite field.
void validate(const MaterialProperties& props);

}  // namespace tline
