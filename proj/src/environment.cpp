#include "tline/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tline/errors.hpp"

namespace tline {

namespace {

// Step times are n * dt; keep window edges from flickering on rounding.
constexpr double kTimeEps = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

MonthlySeries series(QuantityKind kind, std::array<double, 12> values) { return MonthlySeries{values, kind}; }

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::high_wind: return "high_wind";
    case ScenarioKind::wildfire: return "wildfire";
    case ScenarioKind::icing: return "icing";
  }
  return "unknown";
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::amarillo_tx: return "amarillo_tx";
    case Region::san_diego_ca: return "san_diego_ca";
    case Region::bethel_ak: return "bethel_ak";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view text) {
  if (text == "high_wind") return ScenarioKind::high_wind;
  if (text == "wildfire") return ScenarioKind::wildfire;
  if (text == "icing") return ScenarioKind::icing;
  throw ValidationError("unknown scenario kind '" + std::string(text) + "'", "kind");
}

Region parse_region(std::string_view text) {
  if (text == "amarillo_tx") return Region::amarillo_tx;
  if (text == "san_diego_ca") return Region::san_diego_ca;
  if (text == "bethel_ak") return Region::bethel_ak;
  throw ValidationError("unknown preset '" + std::string(text) + "' (amarillo_tx, san_diego_ca, bethel_ak)",
                        "preset");
}

bool EventWindow::contains(double t) const {
  const double local = t - start;
  if (local < -kTimeEps) return false;
  if (recurrence <= 0.0) return local < duration - kTimeEps;
  const double cycles = std::floor(local / recurrence + kTimeEps);
  const double phase = local - cycles * recurrence;
  return phase < duration - kTimeEps;
}

void validate(const EventWindow& event) {
  if (!std::isfinite(event.start) || event.start < 0.0) throw ValidationError("event start must be >= 0", "start");
  if (!(event.duration > 0.0)) throw ValidationError("event duration must be positive", "duration");
  if (event.recurrence < 0.0) throw ValidationError("event recurrence must be >= 0", "recurrence");
  if (event.recurrence > 0.0 && event.duration > event.recurrence) {
    throw ValidationError("event duration exceeds its recurrence period", "duration");
  }
  std::visit(Overloaded{
                 [](const ExtremeWind& w) {
                   if (!(w.w_max > 0.0)) throw ValidationError("w_max must be positive", "w_max");
                 },
                 [](const Wildfire& f) {
                   if (!(f.flame_temp > 0.0)) throw ValidationError("flame_temp must be positive", "flame_temp");
                   if (!(f.view_factor >= 0.0 && f.view_factor <= 1.0)) {
                     throw ValidationError("view_factor must lie in [0, 1]", "view_factor");
                   }
                   if (!(f.emissivity > 0.0 && f.emissivity <= 1.0)) {
                     throw ValidationError("emissivity must lie in (0, 1]", "emissivity");
                   }
                   if (!(f.transmissivity > 0.0 && f.transmissivity <= 1.0)) {
                     throw ValidationError("transmissivity must lie in (0, 1]", "transmissivity");
                   }
                 },
                 [](const IceLayer& ice) {
                   if (!(ice.thickness >= 0.0)) throw ValidationError("ice thickness must be >= 0", "thickness");
                   if (ice.ice_temp && !(*ice.ice_temp > 0.0)) {
                     throw ValidationError("ice_temp must be positive", "ice_temp");
                   }
                 },
             },
             event.payload);
}

void ScenarioConfig::set_monthly_data(const MonthlySeries& wind, const MonthlySeries& temperature) {
  wind_data = wind;
  temp_data = temperature;
  wind_loading = dft_coefficients(wind_data);
  temp_loading = dft_coefficients(temp_data);
}

void validate(const ScenarioConfig& cfg) {
  validate(cfg.wind_data);
  validate(cfg.temp_data);
  if (!(cfg.wind_base_scale > 0.0)) throw ValidationError("wind_base_scale must be positive", "wind_base_scale");
  if (!(cfg.temp_base_scale > 0.0)) throw ValidationError("temp_base_scale must be positive", "temp_base_scale");
  if (!(cfg.current.base >= 0.0)) throw ValidationError("current base must be >= 0", "current_base");
  if (!(cfg.current.amplitude >= 0.0)) throw ValidationError("current amplitude must be >= 0", "current_amplitude");
  bool fire = false;
  bool ice = false;
  for (const auto& e : cfg.events) {
    validate(e);
    fire = fire || std::holds_alternative<Wildfire>(e.payload);
    ice = ice || std::holds_alternative<IceLayer>(e.payload);
  }
  if (fire && ice) throw ValidationError("wildfire and ice events cannot share one scenario", "events");
}

AmbientState ambient_at(const ScenarioConfig& cfg, double t) {
  AmbientState s;
  s.wind_speed = std::max(0.0, cfg.wind_base_scale * evaluate_loading(cfg.wind_loading, t) * kFeetToMeters);
  s.ambient_temp = cfg.temp_base_scale * evaluate_loading(cfg.temp_loading, t);
  for (const auto& e : cfg.events) {
    if (!e.contains(t)) continue;
    std::visit(Overloaded{
                   [&](const ExtremeWind& w) {
                     s.extreme_wind_active = true;
                     s.wind_speed = std::max(s.wind_speed, w.w_max);
                   },
                   [&](const Wildfire& f) { s.fire = f; },
                   [&](const IceLayer& ice) { s.ice = ice; },
               },
               e.payload);
  }
  if (s.ice && !s.ice->ice_temp) s.ice->ice_temp = std::min(s.ambient_temp, kFreezingPoint);
  return s;
}

std::vector<EventWindow> freezing_month_windows(const MonthlySeries& temperature, const IceLayer& ice) {
  std::vector<EventWindow> out;
  std::size_t k = 0;
  while (k < 12) {
    if (temperature.values[k] >= kFreezingPoint) {
      ++k;
      continue;
    }
    const std::size_t first = k;
    while (k < 12 && temperature.values[k] < kFreezingPoint) ++k;
    EventWindow w;
    w.start = static_cast<double>(first) / 12.0;
    w.duration = static_cast<double>(k - first) / 12.0;
    w.recurrence = 1.0;
    w.payload = ice;
    out.push_back(w);
  }
  return out;
}

ScenarioConfig scenario_presets(Region region) {
  ScenarioConfig cfg;
  cfg.current = CurrentDemand{1500.0, 150.0};
  switch (region) {
    case Region::amarillo_tx: {
      cfg.kind = ScenarioKind::high_wind;
      cfg.set_monthly_data(series(QuantityKind::wind, {17.75, 18.92, 20.39, 21.56, 20.09, 20.39, 18.19, 16.72,
                                                       17.75, 18.33, 18.63, 17.89}),
                           series(QuantityKind::temperature, {276.87, 280.98, 284.76, 287.32, 290.43, 298.32,
                                                              301.37, 297.59, 295.15, 291.87, 284.37, 276.54}));
      cfg.events.push_back(EventWindow{1.0, 1.0 / 12.0, 1.0, ExtremeWind{}});
      break;
    }
    case Region::san_diego_ca: {
      cfg.kind = ScenarioKind::wildfire;
      cfg.set_monthly_data(
          series(QuantityKind::wind, {7.48, 8.95, 9.68, 10.56, 10.85, 10.56, 10.27, 9.97, 9.68, 8.36, 7.48, 7.19}),
          series(QuantityKind::temperature, {289.15, 290.43, 292.37, 291.93, 290.93, 293.65, 295.59, 297.09, 298.26,
                                             296.71, 290.54, 287.65}));
      cfg.events.push_back(EventWindow{10.0, 0.02, 0.0, Wildfire{}});
      break;
    }
    case Region::bethel_ak: {
      cfg.kind = ScenarioKind::icing;
      cfg.set_monthly_data(series(QuantityKind::wind, {20.68, 20.24, 18.77, 17.01, 15.55, 14.23, 14.08, 15.11,
                                                       15.40, 16.72, 18.04, 18.92}),
                           series(QuantityKind::temperature, {256.48, 261.82, 257.32, 268.98, 279.54, 283.65,
                                                              284.98, 284.93, 281.76, 272.87, 266.37, 256.82}));
      cfg.events = freezing_month_windows(cfg.temp_data, IceLayer{});
      break;
    }
  }
  return cfg;
}

ScenarioConfig without_events(ScenarioConfig cfg) {
  cfg.events.clear();
  return cfg;
}

}  // namespace tline
