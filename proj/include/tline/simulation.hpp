#pragma once

// Staggered time loop: tension, displacement, history, damage, fatigue,
// temperature, voltage, then the limit-state check.

#include <optional>
#include <string>
#include <vector>

#include "tline/cable.hpp"
#include "tline/environment.hpp"
#include "tline/fem.hpp"
#include "tline/material.hpp"

namespace tline {

enum class SagTemperature { conductor_midspan, ambient };

struct SimulationConfig {
  ScenarioConfig scenario = scenario_presets(Region::amarillo_tx);
  MaterialProperties material;
  SagParameters sag;
  WindLoadParams wind;
  double area_spread = 1.25;     // A_sigma
  int n_elements = 1000;
  double dt = 0.01;              // years
  double horizon = 50.0;         // years
  double theta_limit = 373.0;    // K
  double phi_limit = 0.8;
  double h_min = 2.0;            // W/(m^2 K)
  double melt_duration = kSecondsPerYear / 12.0;  // s
  SagTemperature sag_temperature = SagTemperature::conductor_midspan;
  bool picard = false;
  int picard_max_iterations = 5;
  double picard_tolerance = 1e-6;
  bool record_snapshots = false;
  double snapshot_interval = 5.0;  // years

  double nominal_area() const;
  AreaProfile area_profile() const;
  std::size_t n_steps() const;
};

/// Throws ValidationError naming the first bad key.
void validate(const SimulationConfig& cfg);

/// Preset region with the default material, cable and mesh settings.
SimulationConfig default_config(Region region);

enum class FailureMode { temperature, damage };
std::string_view to_string(FailureMode mode);

struct FailureRecord {
  double time = 0.0;
  std::size_t step = 0;  // index into the result series
  FailureMode mode = FailureMode::damage;
};

struct Snapshot {
  double time = 0.0;
  FieldState state;
};

/// Series hold one entry per completed step at t_n = n dt, n = 1, 2, ...
/// They end at the failure step or at the first solver breakdown.
struct SimulationResult {
  std::vector<double> times, theta_max, phi_max, phi_mid, v_drop, tension;
  std::optional<FailureRecord> failure;
  std::vector<Snapshot> snapshots;
  std::optional<std::string> error;
  std::size_t horizon_steps = 0;
  std::vector<double> node_coords;
  FieldState final_state;
};

/// Tracks irreversibility across steps when supplied to run_deterministic.
struct MonotonicityMonitor {
  double max_phi_decrease = 0.0;
  double max_fatigue_decrease = 0.0;
  double max_history_decrease = 0.0;
  std::size_t steps_with_midspan_peak = 0;
  std::size_t steps = 0;
};

SimulationResult run_deterministic(const SimulationConfig& cfg, MonotonicityMonitor* monitor = nullptr);

/// g = limit - value_max; negative means failed.
inline double limit_state(double limit, double value_max) { return limit - value_max; }

/// Bernoulli step indicator over the full horizon: 0 before the failure
/// step, 1 from it on. Series past truncation are padded.
std::vector<double> failure_indicator(const SimulationResult& result, const SimulationConfig& cfg);

}  // namespace tline
