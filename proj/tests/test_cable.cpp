#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tline/cable.hpp"
#include "tline/errors.hpp"

using namespace tline;

TEST_CASE("initial sag of a parabolic span") {
  SagParameters p;
  p.span = 200.0;
  p.pretension = 30e3;
  p.unit_weight = 33.3;
  CHECK(initial_sag(p) == doctest::Approx(33.3 * 200.0 * 200.0 / (8.0 * 30e3)));
}

TEST_CASE("tension returns the pretension at the reference state") {
  const SagParameters p;
  const WindLoadParams w;
  CHECK(tension_at_temperature(p, w, 0.0, 0.0) == doctest::Approx(p.pretension).epsilon(1e-12));
}

TEST_CASE("tension follows the length-sag chain") {
  const SagParameters p;
  const WindLoadParams w;
  const double dth = 25.0;
  // Chain written out step by step.
  const double s0 = p.unit_weight * p.span * p.span / (8.0 * p.pretension);
  const double l0 = p.span + 8.0 * s0 * s0 / (3.0 * p.span);
  const double l1 = l0 * (1.0 + p.thermal_expansion * dth);
  const double s1 = std::sqrt(3.0 * p.span * (l1 - p.span) / 8.0);
  const double expected = p.unit_weight * p.span * p.span / (8.0 * s1);
  CHECK(tension_at_temperature(p, w, dth, 0.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(tension_at_temperature(p, w, dth, 0.0) < p.pretension);
  CHECK(tension_at_temperature(p, w, -dth, 0.0) > p.pretension);
}

TEST_CASE("wind and ice raise the tension through the resultant weight") {
  const SagParameters p;
  const WindLoadParams w;
  const double calm = tension_at_temperature(p, w, 0.0, 0.0);
  const double windy = tension_at_temperature(p, w, 0.0, 20.0);
  const double ww = wind_load(w, 20.0);
  CHECK(windy / calm == doctest::Approx(std::hypot(p.unit_weight, ww) / p.unit_weight).epsilon(1e-12));
  const IceLayer ice{0.00635, std::nullopt};
  const double wi = ice_load(w.diameter, ice.thickness, 917.0);
  const double iced = tension_at_temperature(p, w, 0.0, 0.0, ice, 917.0);
  CHECK(iced / calm == doctest::Approx((p.unit_weight + wi) / p.unit_weight).epsilon(1e-12));
}

TEST_CASE("taut line is outside the model") {
  const SagParameters p;
  CHECK_THROWS_AS(tension_at_temperature(p, WindLoadParams{}, -5000.0, 0.0), DomainError);
}

TEST_CASE("ice load of an annular shell") {
  const double d = 0.04, t = 0.0127;
  CHECK(ice_load(d, t, 917.0) == doctest::Approx(917.0 * std::numbers::pi * (d + t) * t * 9.81));
  CHECK(ice_load(d, 0.0, 917.0) == 0.0);
  CHECK_THROWS_AS(ice_load(d, -0.1, 917.0), ValidationError);
}

TEST_CASE("wind load from dynamic pressure and drag") {
  WindLoadParams w;
  w.span_factor = 0.6;
  w.attack_angle = std::numbers::pi / 2.0;
  const double v = 10.0;
  const double re = v * w.diameter / w.kinematic_viscosity;
  const double expected = 0.5 * w.air_density * v * v * drag_coefficient(re) * w.diameter * 0.6;
  CHECK(wind_load(w, v) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(wind_load(w, 0.0) == 0.0);
  w.attack_angle = std::numbers::pi / 6.0;
  CHECK(wind_load(w, v) == doctest::Approx(0.25 * expected).epsilon(1e-12));
  // An ice shell widens the projected diameter.
  w.attack_angle = std::numbers::pi / 2.0;
  CHECK(wind_load(w, v, IceLayer{0.01, std::nullopt}) > wind_load(w, v));
}

TEST_CASE("drag curve: bounded, plateau and crisis") {
  for (double re = 1.0; re < 1e7; re *= 1.7) {
    const double cd = drag_coefficient(re);
    CHECK(cd >= 0.3);
    CHECK(cd <= 2.0);
  }
  CHECK(drag_coefficient(5e4) == doctest::Approx(1.2));
  CHECK(drag_coefficient(1e6) == doctest::Approx(0.3));
  CHECK(drag_coefficient(2e5) > drag_coefficient(3e5));
  CHECK(drag_coefficient(0.0) == 2.0);
}

TEST_CASE("cable parameter validation") {
  SagParameters p;
  p.pretension = p.ultimate_strength * 2.0;
  CHECK_THROWS_AS(validate(p), ValidationError);
  WindLoadParams w;
  w.span_factor = 1.5;
  CHECK_THROWS_AS(validate(w), ValidationError);
}
