#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "tline/config.hpp"
#include "tline/errors.hpp"

using namespace tline;

namespace {

RunConfig apply_text(const std::string& text, const std::filesystem::path& base = {}) {
  RunConfig rc;
  return apply_config(parse_config_text(text, base), rc);
}

std::string error_key(const std::string& text) {
  try {
    (void)apply_text(text);
  } catch (const ValidationError& e) {
    return e.key();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("sections, comments and typed values") {
  const RunConfig rc = apply_text(R"(
# a comment
[scenario]
preset = bethel_ak
current_base = 1400   ; trailing comment
[material]
fracture_energy = 12000
pretension = 25000
[simulation]
dt = 0.02
horizon = 10
picard = true
[stochastic]
space = xi3
points = 3
seed = 17
qoi = phi_max
)");
  CHECK(rc.sim.scenario.kind == ScenarioKind::icing);
  CHECK(rc.sim.scenario.current.base == 1400.0);
  CHECK(rc.sim.material.fracture_energy == 12000.0);
  CHECK(rc.sim.sag.pretension == 25000.0);
  CHECK(rc.sim.dt == 0.02);
  CHECK(rc.sim.picard);
  CHECK(rc.stochastic.space_name == "xi3");
  CHECK(rc.stochastic.points == 3);
  CHECK(rc.stochastic.seed == 17);
  CHECK(rc.stochastic.qoi == QoIKind::phi_max);
  CHECK(resolve_space(rc).size() == 5);
}

TEST_CASE("unknown or malformed entries name the key") {
  CHECK(error_key("[material]\nfracture_energi = 1\n") == "material.fracture_energi");
  CHECK(error_key("[weather]\nx = 1\n") == "weather");
  CHECK(error_key("[simulation]\ndt = fast\n") == "simulation.dt");
  CHECK(error_key("dt = 1\n") == "dt");
  CHECK(error_key("[scenario]\nwind = 1,2,3\n") == "scenario.wind");
  CHECK(error_key("[scenario]\npreset = mars\n") == "preset");
  CHECK(error_key("[events]\nflood = start=1\n") == "events.flood");
  CHECK(error_key("[events]\nwildfire = start=1 duration=0.1 colour=red\n") == "events.wildfire.colour");
  CHECK(error_key("[stochastic]\nqoi = volume\n") == "stochastic.qoi");
  CHECK(error_key("[simulation]\nn_elements = 1\n") == "simulation.n_elements");
}

TEST_CASE("events replace the preset list") {
  RunConfig rc = apply_text(R"(
[scenario]
preset = san_diego_ca
[events]
wildfire = start=2 duration=0.05 recurrence=1 view_factor=0.006
)");
  REQUIRE(rc.sim.scenario.events.size() == 1);
  const auto& e = rc.sim.scenario.events[0];
  CHECK(e.start == 2.0);
  CHECK(e.recurrence == 1.0);
  CHECK(std::get<Wildfire>(e.payload).view_factor == 0.006);

  rc = apply_text("[scenario]\npreset = bethel_ak\n[events]\nice = thickness=0.0127\n");
  CHECK(rc.sim.scenario.events.size() == 2);
  CHECK(std::get<IceLayer>(rc.sim.scenario.events[1].payload).thickness == 0.0127);

  rc = apply_text("[scenario]\npreset = amarillo_tx\nevents = none\n");
  CHECK(rc.sim.scenario.events.empty());
}

TEST_CASE("monthly data inline and from files") {
  const auto dir = std::filesystem::temp_directory_path() / "tline_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "temp.txt");
    for (int k = 1; k <= 12; ++k) f << k << " " << 280 + k << "\n";
  }
  const RunConfig rc = apply_text(
      "[scenario]\nwind = 10,11,12,13,14,15,16,17,18,19,20,21\ntemperature_file = temp.txt\n", dir);
  CHECK(rc.sim.scenario.wind_data.values[11] == 21.0);
  CHECK(rc.sim.scenario.temp_data.values[0] == 281.0);
  CHECK(evaluate_loading(rc.sim.scenario.wind_loading, 0.0) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(error_key("[scenario]\nwind_file = nowhere.txt\n") == "scenario.wind_file");
  std::filesystem::remove_all(dir);
}

TEST_CASE("digest ignores key order and formatting but tracks values") {
  const RunConfig a = apply_text("[material]\nfracture_energy = 11000\ndensity = 2700\n[simulation]\ndt = 0.01\n");
  const RunConfig b = apply_text("[simulation]\ndt=0.010\n\n[material]\ndensity = 2.7e3\nfracture_energy = 11000.0\n");
  CHECK(config_digest(a) == config_digest(b));
  const RunConfig c = apply_text("[material]\nfracture_energy = 11001\n");
  CHECK(config_digest(a) != config_digest(c));
  CHECK(config_digest(a).size() == 16);
  const auto lines = canonical_lines(a);
  CHECK(std::is_sorted(lines.begin(), lines.end()));
}

TEST_CASE("fnv-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("random parameter specs") {
  const SimulationConfig cfg = default_config(Region::amarillo_tx);
  const RandomParameter p = parse_parameter_spec("g_c:9500:10500", cfg);
  CHECK(p.lower == 9500.0);
  CHECK(p.upper == 10500.0);
  CHECK(parse_parameter_spec("a", cfg).upper == doctest::Approx(1.1e-10));
  CHECK_THROWS_AS(parse_parameter_spec("g_c:2:1", cfg), ValidationError);
  CHECK_THROWS_AS(parse_parameter_spec("g_c:1", cfg), ValidationError);
  RunConfig rc;
  CHECK_THROWS_AS(resolve_space(rc), ValidationError);
  rc.stochastic.params = {"g_c", "I_b:1400:1600"};
  CHECK(resolve_space(rc).size() == 2);
}
