#include "tline/cable.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "tline/errors.hpp"

namespace tline {

namespace {

void require_positive(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(key) + " must be positive", key);
}

// (Re, C_D) knots; C_D is interpolated linearly in log10(Re).
constexpr std::array<std::pair<double, double>, 5> kDragKnots{{
    {1e2, 1.5849},
    {1e3, 1.0},
    {1e4, 1.2},
    {2e5, 1.2},
    {3.5e5, 0.3},
}};

}  // namespace

void validate(const SagParameters& p) {
  require_positive(p.span, "span");
  require_positive(p.pretension, "pretension");
  require_positive(p.ultimate_strength, "ultimate_strength");
  require_positive(p.unit_weight, "unit_weight");
  require_positive(p.thermal_expansion, "thermal_expansion");
  require_positive(p.reference_temp, "reference_temp");
  if (p.pretension >= p.ultimate_strength) {
    throw ValidationError("pretension must stay below the ultimate strength", "pretension");
  }
}

void validate(const WindLoadParams& w) {
  require_positive(w.air_density, "air_density");
  require_positive(w.kinematic_viscosity, "kinematic_viscosity");
  require_positive(w.diameter, "diameter");
  if (!(w.span_factor > 0.0 && w.span_factor <= 1.0)) {
    throw ValidationError("span_factor must lie in (0, 1]", "span_factor");
  }
  if (!std::isfinite(w.attack_angle)) throw ValidationError("attack_angle must be finite", "attack_angle");
}

double initial_sag(const SagParameters& p) {
  if (!(p.pretension > 0.0)) throw DomainError("initial sag needs a positive pretension");
  return p.unit_weight * p.span * p.span / (8.0 * p.pretension);
}

double drag_coefficient(double reynolds) {
  double cd = 0.3;
  if (!(reynolds > 0.0)) {
    cd = 2.0;
  } else if (reynolds <= kDragKnots.front().first) {
    cd = 10.0 * std::pow(reynolds, -0.4);
  } else if (reynolds >= kDragKnots.back().first) {
    cd = kDragKnots.back().second;
  } else {
    const double lr = std::log10(reynolds);
    for (std::size_t i = 1; i < kDragKnots.size(); ++i) {
      if (reynolds <= kDragKnots[i].first) {
        const double l0 = std::log10(kDragKnots[i - 1].first);
        const double l1 = std::log10(kDragKnots[i].first);
        const double s = (lr - l0) / (l1 - l0);
        cd = kDragKnots[i - 1].second + s * (kDragKnots[i].second - kDragKnots[i - 1].second);
        break;
      }
    }
  }
  return std::clamp(cd, 0.3, 2.0);
}

double wind_load(const WindLoadParams& w, double wind_speed, const std::optional<IceLayer>& ice) {
  if (wind_speed <= 0.0) return 0.0;
  const double d_eff = w.diameter + (ice ? 2.0 * ice->thickness : 0.0);
  const double pressure = 0.5 * w.air_density * wind_speed * wind_speed;
  const double cd = drag_coefficient(wind_speed * d_eff / w.kinematic_viscosity);
  const double s = std::sin(w.attack_angle);
  return pressure * cd * d_eff * s * s * w.span_factor;
}

double ice_load(double diameter, double thickness, double ice_density) {
  if (thickness < 0.0) throw ValidationError("ice thickness must be >= 0", "thickness");
  return ice_density * std::numbers::pi * (diameter + thickness) * thickness * kGravity;
}

double tension_at_temperature(const SagParameters& p, const WindLoadParams& w, double delta_theta,
                              double wind_speed, const std::optional<IceLayer>& ice, double ice_density) {
  const double sl = p.span;
  const double s0 = initial_sag(p);
  const double l0 = sl + 8.0 * s0 * s0 / (3.0 * sl);
  const double len = l0 * (1.0 + p.thermal_expansion * delta_theta);
  if (!(len > sl)) throw DomainError("conductor length at or below the span: taut line outside model validity");
  const double sag = std::sqrt(3.0 * sl * (len - sl) / 8.0);
  const double wi = ice ? ice_load(w.diameter, ice->thickness, ice_density) : 0.0;
  const double ww = wind_load(w, wind_speed, ice);
  const double weight = std::hypot(p.unit_weight + wi, ww);
  return weight * sl * sl / (8.0 * sag);
}

}  // namespace tline
