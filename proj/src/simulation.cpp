#include "tline/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tline/errors.hpp"

namespace tline {

namespace {

HeatExchangeSpec heat_spec(const SimulationConfig& cfg, const AmbientState& amb) {
  HeatExchangeSpec spec;
  spec.ambient_temp = amb.ambient_temp;
  spec.wind_speed = amb.wind_speed;
  spec.h_min = cfg.h_min;
  spec.melt_duration = cfg.melt_duration;
  if (amb.ice && amb.ice->thickness > 0.0) {
    spec.mode = HeatExchangeMode::ice_covered;
    spec.ice_thickness = amb.ice->thickness;
    spec.ice_temp = amb.ice->ice_temp.value_or(std::min(amb.ambient_temp, kFreezingPoint));
  } else if (amb.fire) {
    spec.mode = HeatExchangeMode::convective_plus_fire;
    spec.fire = *amb.fire;
  }
  return spec;
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

double relative_change(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace

double SimulationConfig::nominal_area() const { return std::numbers::pi * wind.diameter * wind.diameter / 4.0; }

AreaProfile SimulationConfig::area_profile() const { return AreaProfile(nominal_area(), area_spread, sag.span); }

std::size_t SimulationConfig::n_steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

void validate(const SimulationConfig& cfg) {
  validate(cfg.scenario);
  validate(cfg.material);
  validate(cfg.sag);
  validate(cfg.wind);
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ValidationError("dt must be positive", "dt");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
    throw ValidationError("horizon must be positive", "horizon");
  }
  const double steps = cfg.horizon / cfg.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw ValidationError("horizon must be an integer multiple of dt", "horizon");
  }
  if (cfg.n_elements < 2) throw ValidationError("n_elements must be at least 2", "n_elements");
  if (!(cfg.theta_limit > 0.0)) throw ValidationError("theta_limit must be positive", "theta_limit");
  if (!(cfg.phi_limit > 0.0 && cfg.phi_limit <= 1.0)) {
    throw ValidationError("phi_limit must lie in (0, 1]", "phi_limit");
  }
  if (!(cfg.h_min >= 0.0)) throw ValidationError("h_min must be >= 0", "h_min");
  if (!(cfg.melt_duration > 0.0)) throw ValidationError("melt_duration must be positive", "melt_duration");
  if (cfg.picard && cfg.picard_max_iterations < 1) {
    throw ValidationError("picard_max_iterations must be >= 1", "picard_max_iterations");
  }
  if (cfg.record_snapshots && !(cfg.snapshot_interval > 0.0)) {
    throw ValidationError("snapshot_interval must be positive", "snapshot_interval");
  }
  // Windows past the horizon are clipped away by the run itself.
  (void)cfg.area_profile();
}

SimulationConfig default_config(Region region) {
  SimulationConfig cfg;
  cfg.scenario = scenario_presets(region);
  return cfg;
}

std::string_view to_string(FailureMode mode) { return mode == FailureMode::temperature ? "temperature" : "damage"; }

SimulationResult run_deterministic(const SimulationConfig& cfg, MonotonicityMonitor* monitor) {
  validate(cfg);
  const Mesh mesh(cfg.sag.span, cfg.n_elements);
  const Discretization disc(mesh, cfg.area_profile());
  const MaterialProperties& props = cfg.material;
  const std::size_t n_steps = cfg.n_steps();
  const std::size_t mid = mesh.midspan_node();

  SimulationResult res;
  res.horizon_steps = n_steps;
  res.node_coords = mesh.node_coords;
  for (auto* v : {&res.times, &res.theta_max, &res.phi_max, &res.phi_mid, &res.v_drop, &res.tension}) {
    v->reserve(n_steps);
  }

  FieldState state(mesh.n_nodes(), ambient_at(cfg.scenario, 0.0).ambient_temp);
  const std::size_t snap_every =
      cfg.record_snapshots ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.snapshot_interval / cfg.dt)))
                           : 0;

  DamageOperator damage_op;
  for (std::size_t n = 1; n <= n_steps; ++n) {
    const double t = static_cast<double>(n) * cfg.dt;
    const AmbientState amb = ambient_at(cfg.scenario, t);
    const HeatExchangeSpec spec = heat_spec(cfg, amb);
    const double ice_t = spec.mode == HeatExchangeMode::ice_covered ? spec.ice_thickness : 0.0;
    const double current = current_demand(cfg.scenario.current, t);
    double tension = 0.0;
    std::vector<double> prev_phi, prev_fatigue, prev_history;
    if (monitor) {
      prev_phi = state.phi;
      prev_fatigue = state.fatigue;
      prev_history = state.history;
    }

    // One staggered pass in the order tension, u, history, phi, F, theta, V.
    const auto pass = [&](FieldState& s) {
      const double theta_ref =
          cfg.sag_temperature == SagTemperature::conductor_midspan ? s.theta[mid] : amb.ambient_temp;
      tension = tension_at_temperature(cfg.sag, cfg.wind, theta_ref - cfg.sag.reference_temp, amb.wind_speed,
                                       amb.ice, props.ice.density);
      solve_displacement(disc, props, s, tension, s.u);
      update_history(disc, props, s, s.history);
      damage_op.solve(disc, props, s, s.phi);
      step_fatigue(disc, props, s, cfg.dt, s.fatigue);
      solve_temperature(disc, props, s, spec, s.theta);
      solve_voltage(disc, props, s, current, ice_t, s.voltage);
    };

    try {
      if (!cfg.picard) {
        pass(state);
      } else {
        // History and fatigue restart from the step's start on every sweep.
        const std::vector<double> base_history = state.history;
        const std::vector<double> base_fatigue = state.fatigue;
        FieldState iter = state;
        for (int k = 0; k < cfg.picard_max_iterations; ++k) {
          FieldState next = iter;
          next.history = base_history;
          next.fatigue = base_fatigue;
          pass(next);
          const bool converged = k > 0 && relative_change(next.theta, iter.theta) < cfg.picard_tolerance &&
                                 relative_change(next.phi, iter.phi) < cfg.picard_tolerance;
          iter = std::move(next);
          if (converged) break;
        }
        state = std::move(iter);
      }
    } catch (const SolverError& err) {
      res.error = std::string(err.what()) + " at t = " + std::to_string(t);
      break;
    } catch (const DomainError& err) {
      res.error = std::string(err.what()) + " at t = " + std::to_string(t);
      break;
    }

    const double th_max = max_of(state.theta);
    const double ph_max = max_of(state.phi);
    res.times.push_back(t);
    res.theta_max.push_back(th_max);
    res.phi_max.push_back(ph_max);
    res.phi_mid.push_back(state.phi[mid]);
    res.v_drop.push_back(state.voltage.back() - state.voltage.front());
    res.tension.push_back(tension);

    if (monitor) {
      for (std::size_t i = 0; i < state.phi.size(); ++i) {
        monitor->max_phi_decrease = std::max(monitor->max_phi_decrease, prev_phi[i] - state.phi[i]);
        monitor->max_fatigue_decrease = std::max(monitor->max_fatigue_decrease, prev_fatigue[i] - state.fatigue[i]);
        monitor->max_history_decrease = std::max(monitor->max_history_decrease, prev_history[i] - state.history[i]);
      }
      if (ph_max > 0.0 && state.phi[mid] == ph_max) ++monitor->steps_with_midspan_peak;
      ++monitor->steps;
    }
    if (snap_every && n % snap_every == 0) res.snapshots.push_back({t, state});

    const double g_theta = limit_state(cfg.theta_limit, th_max);
    const double g_phi = limit_state(cfg.phi_limit, ph_max);
    if (g_theta <= 0.0 || g_phi <= 0.0) {
      FailureMode mode = FailureMode::damage;
      if (g_theta <= 0.0 && g_phi <= 0.0) {
        // Both limits crossed in one step: the larger relative exceedance wins.
        mode = th_max / cfg.theta_limit > ph_max / cfg.phi_limit ? FailureMode::temperature : FailureMode::damage;
      } else if (g_theta <= 0.0) {
        mode = FailureMode::temperature;
      }
      res.failure = FailureRecord{t, res.times.size() - 1, mode};
      break;
    }
  }
  res.final_state = std::move(state);
  return res;
}

std::vector<double> failure_indicator(const SimulationResult& result, const SimulationConfig& cfg) {
  const std::size_t n = std::max(result.horizon_steps, cfg.n_steps());
  std::vector<double> h(n, 0.0);
  if (result.failure) {
    for (std::size_t k = std::min(result.failure->step, n); k < n; ++k) h[k] = 1.0;
  }
  return h;
}

}  // namespace tline
