#include <doctest.h>

#include <algorithm>

#include "tline/errors.hpp"
#include "tline/simulation.hpp"

using namespace tline;

TEST_CASE("series hold one entry per step and start at ambient conditions") {
  SimulationConfig cfg = default_config(Region::amarillo_tx);
  cfg.horizon = 1.0;
  const SimulationResult r = run_deterministic(cfg);
  REQUIRE(r.times.size() == 100);
  CHECK(r.horizon_steps == 100);
  CHECK(r.times.front() == doctest::Approx(0.01));
  CHECK(r.times.back() == doctest::Approx(1.0));
  CHECK_FALSE(r.failure.has_value());
  CHECK_FALSE(r.error.has_value());
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    CHECK(r.phi_mid[k] == r.phi_max[k]);
    CHECK(r.v_drop[k] > 0.0);
    CHECK(r.tension[k] > 0.0);
    CHECK(r.theta_max[k] > 250.0);
  }
}

TEST_CASE("fields are irreversible over a year of cyclic loading") {
  SimulationConfig cfg = default_config(Region::bethel_ak);
  cfg.horizon = 2.0;
  MonotonicityMonitor mon;
  const SimulationResult r = run_deterministic(cfg, &mon);
  CHECK(mon.steps == r.times.size());
  CHECK(mon.max_phi_decrease <= 1e-12);
  CHECK(mon.max_fatigue_decrease <= 1e-12);
  CHECK(mon.max_history_decrease <= 1e-12);
  CHECK(mon.steps_with_midspan_peak == mon.steps);
}

TEST_CASE("runs are reproducible") {
  SimulationConfig cfg = default_config(Region::san_diego_ca);
  cfg.horizon = 0.5;
  const SimulationResult a = run_deterministic(cfg);
  const SimulationResult b = run_deterministic(cfg);
  CHECK(a.theta_max == b.theta_max);
  CHECK(a.phi_max == b.phi_max);
  CHECK(a.final_state.phi == b.final_state.phi);
}

TEST_CASE("failure stops the run and sets the indicator from the failure step") {
  SimulationConfig cfg = default_config(Region::bethel_ak);
  cfg.scenario.events = freezing_month_windows(cfg.scenario.temp_data, IceLayer{0.0127, std::nullopt});
  const SimulationResult r = run_deterministic(cfg);
  REQUIRE(r.failure.has_value());
  CHECK(r.failure->mode == FailureMode::damage);
  CHECK(r.failure->step == r.times.size() - 1);
  CHECK(r.phi_max.back() >= cfg.phi_limit);
  CHECK(r.phi_max[r.phi_max.size() - 2] < cfg.phi_limit);
  const auto h = failure_indicator(r, cfg);
  CHECK(h.size() == cfg.n_steps());
  CHECK(h[r.failure->step] == 1.0);
  CHECK(h.back() == 1.0);
  if (r.failure->step > 0) CHECK(h[r.failure->step - 1] == 0.0);
  CHECK(std::is_sorted(h.begin(), h.end()));
}

TEST_CASE("a surviving run has a zero indicator") {
  SimulationConfig cfg = default_config(Region::amarillo_tx);
  cfg.horizon = 0.3;
  const auto h = failure_indicator(run_deterministic(cfg), cfg);
  CHECK(h.size() == 30);
  CHECK(std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("limit state sign") {
  CHECK(limit_state(373.0, 300.0) > 0.0);
  CHECK(limit_state(0.8, 0.85) < 0.0);
}

TEST_CASE("snapshots are taken at the requested interval") {
  SimulationConfig cfg = default_config(Region::amarillo_tx);
  cfg.horizon = 1.0;
  cfg.record_snapshots = true;
  cfg.snapshot_interval = 0.25;
  const SimulationResult r = run_deterministic(cfg);
  REQUIRE(r.snapshots.size() == 4);
  CHECK(r.snapshots[0].time == doctest::Approx(0.25));
  CHECK(r.snapshots[3].state.phi == r.final_state.phi);
}

TEST_CASE("picard sweeps keep the staggered result close") {
  SimulationConfig cfg = default_config(Region::amarillo_tx);
  cfg.horizon = 0.5;
  const SimulationResult plain = run_deterministic(cfg);
  cfg.picard = true;
  const SimulationResult coupled = run_deterministic(cfg);
  REQUIRE(coupled.times.size() == plain.times.size());
  CHECK(coupled.phi_max.back() == doctest::Approx(plain.phi_max.back()).epsilon(1e-2));
  CHECK(coupled.theta_max.back() == doctest::Approx(plain.theta_max.back()).epsilon(1e-3));
}

TEST_CASE("configuration validation names the bad key") {
  const auto key_of = [](SimulationConfig cfg) {
    try {
      validate(cfg);
    } catch (const ValidationError& e) {
      return e.key();
    }
    return std::string();
  };
  SimulationConfig cfg = default_config(Region::amarillo_tx);
  CHECK(key_of(cfg).empty());
  SimulationConfig bad = cfg;
  bad.dt = -1.0;
  CHECK(key_of(bad) == "dt");
  bad = cfg;
  bad.horizon = 0.015;
  CHECK(key_of(bad) == "horizon");
  bad = cfg;
  bad.phi_limit = 1.5;
  CHECK(key_of(bad) == "phi_limit");
  bad = cfg;
  bad.area_spread = 0.1;
  CHECK(key_of(bad) == "area_spread");
  bad = cfg;
  bad.n_elements = 1;
  CHECK(key_of(bad) == "n_elements");
}
