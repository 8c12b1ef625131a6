#include <doctest.h>

#include "tline/environment.hpp"
#include "tline/errors.hpp"

using namespace tline;

TEST_CASE("event windows, single and recurring") {
  EventWindow once{10.0, 0.02, 0.0, Wildfire{}};
  CHECK_FALSE(once.contains(9.99));
  CHECK(once.contains(10.0));
  CHECK(once.contains(10.01));
  CHECK_FALSE(once.contains(10.02));
  CHECK_FALSE(once.contains(11.0));

  EventWindow yearly{1.0, 1.0 / 12.0, 1.0, ExtremeWind{}};
  CHECK_FALSE(yearly.contains(0.5));
  for (int y = 1; y < 50; ++y) {
    CHECK(yearly.contains(y + 0.01));
    CHECK_FALSE(yearly.contains(y + 0.5));
  }
}

TEST_CASE("event validation names the field") {
  const auto key_of = [](const EventWindow& e) {
    try {
      validate(e);
    } catch (const ValidationError& err) {
      return err.key();
    }
    return std::string();
  };
  CHECK(key_of(EventWindow{-1.0, 1.0, 0.0, ExtremeWind{}}) == "start");
  CHECK(key_of(EventWindow{0.0, 0.0, 0.0, ExtremeWind{}}) == "duration");
  CHECK(key_of(EventWindow{0.0, 2.0, 1.0, ExtremeWind{}}) == "duration");
  CHECK(key_of(EventWindow{0.0, 1.0, 0.0, ExtremeWind{-3.0}}) == "w_max");
  CHECK(key_of(EventWindow{0.0, 1.0, 0.0, Wildfire{1400.0, 1.5, 0.9, 0.9}}) == "view_factor");
  CHECK(key_of(EventWindow{0.0, 1.0, 0.0, IceLayer{-0.01, std::nullopt}}) == "thickness");
  CHECK(key_of(EventWindow{0.0, 1.0, 0.0, IceLayer{}}).empty());
}

TEST_CASE("ambient state applies base scales and events") {
  ScenarioConfig sc = scenario_presets(Region::amarillo_tx);
  const AmbientState calm = ambient_at(sc, 0.5);
  CHECK_FALSE(calm.extreme_wind_active);
  CHECK(calm.wind_speed == doctest::Approx(evaluate_loading(sc.wind_loading, 0.5) * kFeetToMeters));
  CHECK(calm.ambient_temp == doctest::Approx(evaluate_loading(sc.temp_loading, 0.5)));

  const AmbientState storm = ambient_at(sc, 3.02);
  CHECK(storm.extreme_wind_active);
  CHECK(storm.wind_speed == doctest::Approx(100.0 * kFeetToMeters));

  sc.wind_base_scale = 1.1;
  sc.temp_base_scale = 0.9;
  const AmbientState scaled = ambient_at(sc, 0.5);
  CHECK(scaled.wind_speed == doctest::Approx(1.1 * calm.wind_speed));
  CHECK(scaled.ambient_temp == doctest::Approx(0.9 * calm.ambient_temp));
}

TEST_CASE("ice follows the sub-freezing months and takes the colder temperature") {
  const ScenarioConfig ak = scenario_presets(Region::bethel_ak);
  // Jan-Apr and Oct-Dec average below 273.15 K.
  const std::array<bool, 12> frozen{true, true, true, true, false, false, false, false, false, true, true, true};
  for (int year = 0; year < 3; ++year) {
    for (std::size_t m = 0; m < 12; ++m) {
      const double t = year + (static_cast<double>(m) + 0.5) / 12.0;
      const AmbientState a = ambient_at(ak, t);
      CHECK(a.ice.has_value() == frozen[m]);
      if (a.ice) CHECK(*a.ice->ice_temp == doctest::Approx(std::min(a.ambient_temp, kFreezingPoint)));
    }
  }
  CHECK(ak.events.size() == 2);
}

TEST_CASE("wildfire is active only inside its window") {
  const ScenarioConfig ca = scenario_presets(Region::san_diego_ca);
  CHECK_FALSE(ambient_at(ca, 9.5).fire.has_value());
  CHECK(ambient_at(ca, 10.0).fire.has_value());
  CHECK_FALSE(ambient_at(ca, 10.5).fire.has_value());
  CHECK(ambient_at(without_events(ca), 10.0).fire == std::nullopt);
}

TEST_CASE("scenario validation") {
  ScenarioConfig sc = scenario_presets(Region::san_diego_ca);
  CHECK_NOTHROW(validate(sc));
  sc.events.push_back(EventWindow{1.0, 0.1, 0.0, IceLayer{}});
  CHECK_THROWS_AS(validate(sc), ValidationError);
  sc = scenario_presets(Region::amarillo_tx);
  sc.current.base = -1.0;
  CHECK_THROWS_AS(validate(sc), ValidationError);
}

TEST_CASE("preset and kind names") {
  CHECK(parse_region("bethel_ak") == Region::bethel_ak);
  CHECK(to_string(Region::san_diego_ca) == "san_diego_ca");
  CHECK(parse_scenario_kind(to_string(ScenarioKind::icing)) == ScenarioKind::icing);
  CHECK_THROWS_AS(parse_region("denver_co"), ValidationError);
  CHECK(scenario_presets(Region::san_diego_ca).kind == ScenarioKind::wildfire);
}
