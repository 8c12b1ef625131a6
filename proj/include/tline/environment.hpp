#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tline/loading.hpp"

namespace tline {

inline constexpr double kFeetToMeters = 0.3048;
inline constexpr double kInchToMeters = 0.0254;
inline constexpr double kFreezingPoint = 273.15;  // K

enum class ScenarioKind { high_wind, wildfire, icing };
enum class Region { amarillo_tx, san_diego_ca, bethel_ak };

std::string_view to_string(ScenarioKind kind);
std::string_view to_string(Region region);
ScenarioKind parse_scenario_kind(std::string_view text);
Region parse_region(std::string_view text);

struct ExtremeWind {
  double w_max = 100.0 * kFeetToMeters;  // m/s
};

struct Wildfire {
  double flame_temp = 1473.15;  // K
  double view_factor = 0.0125;
  double emissivity = 0.9;
  double transmissivity = 0.9;
};

struct IceLayer {
  double thickness = 0.25 * kInchToMeters;  // m
  std::optional<double> ice_temp;           // K; unset means min(ambient, freezing)
};

using EventPayload = std::variant<ExtremeWind, Wildfire, IceLayer>;

/// Active on [start, start + duration). With recurrence > 0 the window
/// repeats every `recurrence` years from `start` on.
struct EventWindow {
  double start = 0.0;
  double duration = 0.0;
  double recurrence = 0.0;
  EventPayload payload;

  bool contains(double t) const;
};

void validate(const EventWindow& event);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::high_wind;
  MonthlySeries wind_data{{}, QuantityKind::wind};               // ft/s
  MonthlySeries temp_data{{}, QuantityKind::temperature};        // K
  FourierLoading wind_loading;                                   // ft/s
  FourierLoading temp_loading;                                   // K
  CurrentDemand current;
  std::vector<EventWindow> events;
  double wind_base_scale = 1.0;
  double temp_base_scale = 1.0;

  /// Recomputes both loadings from the monthly data.
  void set_monthly_data(const MonthlySeries& wind, const MonthlySeries& temperature);
};

void validate(const ScenarioConfig& cfg);

struct AmbientState {
  double wind_speed = 0.0;    // m/s
  double ambient_temp = 0.0;  // K
  bool extreme_wind_active = false;
  std::optional<Wildfire> fire;
  std::optional<IceLayer> ice;  // ice_temp always resolved
};

AmbientState ambient_at(const ScenarioConfig& cfg, double t);

/// Regional monthly rows, the region's scenario kind and its default events.
ScenarioConfig scenario_presets(Region region);

/// One window per run of consecutive months whose mean temperature is below
/// freezing, recurring every year.
std::vector<EventWindow> freezing_month_windows(const MonthlySeries& temperature, const IceLayer& ice);

/// Retained copy with every event window removed.
ScenarioConfig without_events(ScenarioConfig cfg);

}  // namespace tline
