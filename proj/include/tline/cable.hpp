#pragma once

// Parabolic sag/tension chain supplying the horizontal traction at the free
// end of the line, plus the wind and ice loads that enter the effective weight.

#include <numbers>
#include <optional>

#include "tline/environment.hpp"
#include "tline/material.hpp"

namespace tline {

struct SagParameters {
  double span = 200.0;                 // m
  double pretension = 30e3;            // N, 20% of ultimate by default
  double ultimate_strength = 150e3;    // N
  double unit_weight = 2700.0 * kGravity * std::numbers::pi * 0.04 * 0.04 / 4.0;  // N/m, 40 mm aluminum rod
  double thermal_expansion = 2.3e-5;   // 1/K
  double reference_temp = 298.15;      // K
};

void validate(const SagParameters& p);

struct WindLoadParams {
  double air_density = 1.225;           // kg/m^3
  double kinematic_viscosity = 15e-6;   // m^2/s
  double attack_angle = std::numbers::pi / 2.0;  // rad, wind normal to the line
  double span_factor = 0.6;
  double diameter = 0.04;               // m
};

void validate(const WindLoadParams& w);

double initial_sag(const SagParameters& p);

/// Piecewise smooth-cylinder drag curve, clamped to [0.3, 2.0].
double drag_coefficient(double reynolds);

/// Wind load per unit length (N/m); an ice layer widens the projected diameter to D + 2t.
double wind_load(const WindLoadParams& w, double wind_speed, const std::optional<IceLayer>& ice = std::nullopt);

/// rho_ice * pi * (D + t) * t * g.
double ice_load(double diameter, double thickness, double ice_density);

/// Horizontal tension after a temperature change `delta_theta` with the given
/// wind and ice. Throws DomainError when the conductor would be taut.
double tension_at_temperature(const SagParameters& p, const WindLoadParams& w, double delta_theta,
                              double wind_speed, const std::optional<IceLayer>& ice = std::nullopt,
                              double ice_density = IceProperties{}.density);

}  // namespace tline
