#include "tline/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tline/errors.hpp"

namespace tline {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string qualified(const ConfigEntry& e) { return e.section + "." + e.key; }

double parse_number(std::string_view text, const std::string& key) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ValidationError("'" + key + "' expects a number, got '" + t + "'", key);
  }
  return v;
}

long long parse_integer(std::string_view text, const std::string& key) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ValidationError("'" + key + "' expects an integer, got '" + t + "'", key);
  }
  return v;
}

bool parse_bool(std::string_view text, const std::string& key) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ValidationError("'" + key + "' expects true or false, got '" + t + "'", key);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto end = pos == std::string_view::npos ? s.size() : pos;
    out.push_back(trim(s.substr(start, end - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

MonthlySeries parse_monthly(std::string_view text, QuantityKind kind, const std::string& key) {
  const auto parts = split(text, ',');
  if (parts.size() != 12) {
    throw ValidationError("'" + key + "' needs 12 comma-separated monthly values, got " + std::to_string(parts.size()),
                          key);
  }
  MonthlySeries m{{}, kind};
  for (std::size_t i = 0; i < 12; ++i) m.values[i] = parse_number(parts[i], key);
  validate(m);
  return m;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <class T>
Setter number_into(T SimulationConfig::*member) {
  return [member](RunConfig& c, const std::string& v, const std::string& k) { c.sim.*member = parse_number(v, k); };
}

const std::map<std::string, Setter, std::less<>>& material_keys() {
  static const std::map<std::string, Setter, std::less<>> keys = [] {
    std::map<std::string, Setter, std::less<>> m;
    const auto mat = [&m](const char* name, double MaterialProperties::*field) {
      m[name] = [field](RunConfig& c, const std::string& v, const std::string& k) {
        c.sim.material.*field = parse_number(v, k);
      };
    };
    mat("young_modulus", &MaterialProperties::young_modulus);
    mat("damage_layer_width", &MaterialProperties::damage_layer_width);
    mat("fracture_energy", &MaterialProperties::fracture_energy);
    mat("density", &MaterialProperties::density);
    mat("aging_coeff", &MaterialProperties::aging_coeff);
    mat("thermal_conductivity", &MaterialProperties::thermal_conductivity);
    mat("electrical_conductivity", &MaterialProperties::electrical_conductivity);
    mat("resistivity_temp_coeff", &MaterialProperties::resistivity_temp_coeff);
    mat("reference_temp", &MaterialProperties::reference_temp);
    const auto air = [&m](const char* name, double AirProperties::*field) {
      m[name] = [field](RunConfig& c, const std::string& v, const std::string& k) {
        c.sim.material.air.*field = parse_number(v, k);
      };
    };
    air("air_density", &AirProperties::density);
    air("air_kinematic_viscosity", &AirProperties::kinematic_viscosity);
    air("air_thermal_conductivity", &AirProperties::thermal_conductivity);
    air("air_prandtl", &AirProperties::prandtl);
    const auto ice = [&m](const char* name, double IceProperties::*field) {
      m[name] = [field](RunConfig& c, const std::string& v, const std::string& k) {
        c.sim.material.ice.*field = parse_number(v, k);
      };
    };
    ice("ice_density", &IceProperties::density);
    ice("ice_resistivity", &IceProperties::resistivity);
    ice("ice_thermal_conductivity", &IceProperties::thermal_conductivity);
    ice("ice_latent_heat", &IceProperties::latent_heat);
    const auto sag = [&m](const char* name, double SagParameters::*field) {
      m[name] = [field](RunConfig& c, const std::string& v, const std::string& k) {
        c.sim.sag.*field = parse_number(v, k);
      };
    };
    sag("span", &SagParameters::span);
    sag("pretension", &SagParameters::pretension);
    sag("ultimate_strength", &SagParameters::ultimate_strength);
    sag("unit_weight", &SagParameters::unit_weight);
    sag("thermal_expansion", &SagParameters::thermal_expansion);
    sag("sag_reference_temp", &SagParameters::reference_temp);
    const auto wind = [&m](const char* name, double WindLoadParams::*field) {
      m[name] = [field](RunConfig& c, const std::string& v, const std::string& k) {
        c.sim.wind.*field = parse_number(v, k);
      };
    };
    wind("diameter", &WindLoadParams::diameter);
    wind("attack_angle", &WindLoadParams::attack_angle);
    wind("span_factor", &WindLoadParams::span_factor);
    wind("drag_air_density", &WindLoadParams::air_density);
    wind("drag_kinematic_viscosity", &WindLoadParams::kinematic_viscosity);
    return m;
  }();
  return keys;
}

const std::map<std::string, Setter, std::less<>>& simulation_keys() {
  static const std::map<std::string, Setter, std::less<>> keys = [] {
    std::map<std::string, Setter, std::less<>> m;
    m["dt"] = number_into(&SimulationConfig::dt);
    m["horizon"] = number_into(&SimulationConfig::horizon);
    m["area_spread"] = number_into(&SimulationConfig::area_spread);
    m["theta_limit"] = number_into(&SimulationConfig::theta_limit);
    m["phi_limit"] = number_into(&SimulationConfig::phi_limit);
    m["h_min"] = number_into(&SimulationConfig::h_min);
    m["melt_duration"] = number_into(&SimulationConfig::melt_duration);
    m["picard_tolerance"] = number_into(&SimulationConfig::picard_tolerance);
    m["snapshot_interval"] = number_into(&SimulationConfig::snapshot_interval);
    m["n_elements"] = [](RunConfig& c, const std::string& v, const std::string& k) {
      const long long n = parse_integer(v, k);
      if (n < 2 || n > 10'000'000) throw ValidationError("'" + k + "' must lie in [2, 1e7]", k);
      c.sim.n_elements = static_cast<int>(n);
    };
    m["picard"] = [](RunConfig& c, const std::string& v, const std::string& k) { c.sim.picard = parse_bool(v, k); };
    m["picard_max_iterations"] = [](RunConfig& c, const std::string& v, const std::string& k) {
      c.sim.picard_max_iterations = static_cast<int>(std::clamp<long long>(parse_integer(v, k), -1, 1000));
    };
    m["snapshots"] = [](RunConfig& c, const std::string& v, const std::string& k) {
      c.sim.record_snapshots = parse_bool(v, k);
    };
    m["sag_temperature"] = [](RunConfig& c, const std::string& v, const std::string& k) {
      const std::string t = trim(v);
      if (t == "conductor_midspan") {
        c.sim.sag_temperature = SagTemperature::conductor_midspan;
      } else if (t == "ambient") {
        c.sim.sag_temperature = SagTemperature::ambient;
      } else {
        throw ValidationError("'" + k + "' must be conductor_midspan or ambient", k);
      }
    };
    return m;
  }();
  return keys;
}

// Space-separated `name=value` tokens of one event line.
std::map<std::string, std::string, std::less<>> event_tokens(const ConfigEntry& e) {
  std::map<std::string, std::string, std::less<>> out;
  std::istringstream in(e.value);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("event token '" + tok + "' in " + qualified(e) + " is not name=value", qualified(e));
    }
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

std::vector<EventWindow> parse_event(const ConfigEntry& e, const ScenarioConfig& scenario) {
  auto tok = event_tokens(e);
  const std::string where = qualified(e);
  const auto take = [&](const char* name, double fallback) {
    const auto it = tok.find(name);
    if (it == tok.end()) return fallback;
    const double v = parse_number(it->second, where + "." + name);
    tok.erase(it);
    return v;
  };
  const bool timed = tok.count("start") || tok.count("duration");
  EventWindow w;
  w.start = take("start", 0.0);
  w.duration = take("duration", 0.0);
  w.recurrence = take("recurrence", 0.0);
  std::vector<EventWindow> out;
  if (e.key == "extreme_wind") {
    ExtremeWind p;
    p.w_max = take("w_max", p.w_max);
    w.payload = p;
    out.push_back(w);
  } else if (e.key == "wildfire") {
    Wildfire p;
    p.flame_temp = take("flame_temp", p.flame_temp);
    p.view_factor = take("view_factor", p.view_factor);
    p.emissivity = take("emissivity", p.emissivity);
    p.transmissivity = take("transmissivity", p.transmissivity);
    w.payload = p;
    out.push_back(w);
  } else if (e.key == "ice") {
    IceLayer p;
    p.thickness = take("thickness", p.thickness);
    if (tok.count("ice_temp")) p.ice_temp = take("ice_temp", 0.0);
    if (timed) {
      w.payload = p;
      out.push_back(w);
    } else {
      // Without explicit timing the layer follows the sub-freezing months.
      out = freezing_month_windows(scenario.temp_data, p);
    }
  } else {
    throw ValidationError("unknown event type '" + e.key + "' (expected extreme_wind, wildfire or ice)", where);
  }
  if (!tok.empty()) {
    throw ValidationError("unknown event setting '" + tok.begin()->first + "' in " + where,
                          where + "." + tok.begin()->first);
  }
  for (const auto& ev : out) validate(ev);
  return out;
}

void apply_scenario(RunConfig& c, const std::vector<const ConfigEntry*>& entries, const std::filesystem::path& base) {
  ScenarioConfig& sc = c.sim.scenario;
  // The preset resets everything else, so it goes first whatever its position.
  for (const auto* e : entries) {
    if (e->key == "preset") sc = scenario_presets(parse_region(trim(e->value)));
  }
  std::optional<MonthlySeries> wind, temp;
  for (const auto* e : entries) {
    const std::string k = qualified(*e);
    if (e->key == "preset") continue;
    if (e->key == "kind") {
      sc.kind = parse_scenario_kind(trim(e->value));
    } else if (e->key == "wind") {
      wind = parse_monthly(e->value, QuantityKind::wind, k);
    } else if (e->key == "temperature") {
      temp = parse_monthly(e->value, QuantityKind::temperature, k);
    } else if (e->key == "wind_file" || e->key == "temperature_file") {
      std::filesystem::path p = trim(e->value);
      if (p.is_relative()) p = base / p;
      try {
        if (e->key == "wind_file") {
          wind = load_monthly_file(p, QuantityKind::wind);
        } else {
          temp = load_monthly_file(p, QuantityKind::temperature);
        }
      } catch (const ValidationError& err) {
        throw ValidationError(std::string(err.what()) + " (" + k + ")", k);
      }
    } else if (e->key == "current_base") {
      sc.current.base = parse_number(e->value, k);
    } else if (e->key == "current_amplitude") {
      sc.current.amplitude = parse_number(e->value, k);
    } else if (e->key == "wind_base_scale") {
      sc.wind_base_scale = parse_number(e->value, k);
    } else if (e->key == "temp_base_scale") {
      sc.temp_base_scale = parse_number(e->value, k);
    } else if (e->key == "events") {
      const std::string v = trim(e->value);
      if (v == "none") {
        sc.events.clear();
      } else if (v != "preset") {
        throw ValidationError("'" + k + "' must be preset or none", k);
      }
    } else {
      throw ValidationError("unknown key '" + k + "'", k);
    }
  }
  if (wind || temp) sc.set_monthly_data(wind.value_or(sc.wind_data), temp.value_or(sc.temp_data));
}

void apply_stochastic(RunConfig& c, const ConfigEntry& e) {
  const std::string k = qualified(e);
  StochasticSettings& s = c.stochastic;
  if (e.key == "space") {
    s.space_name = trim(e.value);
    s.params.clear();
  } else if (e.key == "param") {
    if (s.space_name) s.space_name.reset();
    for (const auto& p : split(e.value, ',')) {
      if (!p.empty()) s.params.push_back(p);
    }
  } else if (e.key == "points") {
    const long long n = parse_integer(e.value, k);
    if (n < 1 || n > 100) throw ValidationError("'" + k + "' must lie in [1, 100]", k);
    s.points = static_cast<int>(n);
  } else if (e.key == "samples") {
    const long long n = parse_integer(e.value, k);
    if (n < 1) throw ValidationError("'" + k + "' must be >= 1", k);
    s.samples = static_cast<std::size_t>(n);
  } else if (e.key == "seed") {
    const long long n = parse_integer(e.value, k);
    if (n < 0) throw ValidationError("'" + k + "' must be >= 0", k);
    s.seed = static_cast<std::uint64_t>(n);
  } else if (e.key == "qoi") {
    try {
      s.qoi = parse_qoi(trim(e.value));
    } catch (const ValidationError&) {
      throw ValidationError("'" + k + "' must be theta_max, phi_max, phi_mid or h_B", k);
    }
  } else {
    throw ValidationError("unknown key '" + k + "'", k);
  }
}

std::string payload_line(const EventWindow& ev) {
  std::string s = "start=" + fmt_double(ev.start) + " duration=" + fmt_double(ev.duration) +
                  " recurrence=" + fmt_double(ev.recurrence);
  if (const auto* w = std::get_if<ExtremeWind>(&ev.payload)) {
    return "extreme_wind " + s + " w_max=" + fmt_double(w->w_max);
  }
  if (const auto* f = std::get_if<Wildfire>(&ev.payload)) {
    return "wildfire " + s + " flame_temp=" + fmt_double(f->flame_temp) + " view_factor=" +
           fmt_double(f->view_factor) + " emissivity=" + fmt_double(f->emissivity) + " transmissivity=" +
           fmt_double(f->transmissivity);
  }
  const auto& i = std::get<IceLayer>(ev.payload);
  return "ice " + s + " thickness=" + fmt_double(i.thickness) +
         (i.ice_temp ? " ice_temp=" + fmt_double(*i.ice_temp) : std::string());
}

}  // namespace

ConfigDocument parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  ConfigDocument doc;
  doc.base_dir = base_dir;
  static const std::vector<std::string> sections{"material", "scenario", "events", "stochastic", "simulation"};
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ValidationError("line " + std::to_string(line_no) + ": malformed section header", "section");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), section) == sections.end()) {
        throw ValidationError("line " + std::to_string(line_no) + ": unknown section [" + section + "]", section);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected key = value", "line " + std::to_string(line_no));
    }
    ConfigEntry e{section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
                  line_no};
    if (section.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": key '" + e.key + "' outside any section", e.key);
    }
    if (e.key.empty()) throw ValidationError("line " + std::to_string(line_no) + ": empty key", section);
    doc.entries.push_back(std::move(e));
  }
  return doc;
}

ConfigDocument load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string(), "scenario");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

RunConfig apply_config(const ConfigDocument& doc, RunConfig c) {
  std::vector<const ConfigEntry*> scenario, events;
  for (const auto& e : doc.entries) {
    if (e.section == "scenario") scenario.push_back(&e);
    if (e.section == "events") events.push_back(&e);
  }
  apply_scenario(c, scenario, doc.base_dir);
  if (!events.empty()) {
    c.sim.scenario.events.clear();
    for (const auto* e : events) {
      for (auto& w : parse_event(*e, c.sim.scenario)) c.sim.scenario.events.push_back(std::move(w));
    }
  }
  for (const auto& e : doc.entries) {
    const std::string k = qualified(e);
    if (e.section == "material") {
      const auto& keys = material_keys();
      const auto it = keys.find(e.key);
      if (it == keys.end()) throw ValidationError("unknown key '" + k + "'", k);
      it->second(c, e.value, k);
    } else if (e.section == "simulation") {
      const auto& keys = simulation_keys();
      const auto it = keys.find(e.key);
      if (it == keys.end()) throw ValidationError("unknown key '" + k + "'", k);
      it->second(c, e.value, k);
    } else if (e.section == "stochastic") {
      apply_stochastic(c, e);
    }
  }
  return c;
}

RandomParameter parse_parameter_spec(std::string_view spec, const SimulationConfig& cfg) {
  const auto parts = split(spec, ':');
  const ParamName name = parse_param_name(parts[0]);
  if (parts.size() == 1) return around_nominal(cfg, name);
  if (parts.size() != 3) {
    throw ValidationError("parameter spec '" + std::string(spec) + "' must be name or name:lower:upper",
                          std::string(parts[0]));
  }
  RandomParameter p{name, parse_number(parts[1], parts[0]), parse_number(parts[2], parts[0])};
  validate(p);
  return p;
}

RandomSpace resolve_space(const RunConfig& cfg) {
  if (cfg.stochastic.space_name) return space_preset(*cfg.stochastic.space_name, cfg.sim);
  if (cfg.stochastic.params.empty()) throw ValidationError("no random space given", "space");
  RandomSpace space;
  for (const auto& p : cfg.stochastic.params) space.push_back(parse_parameter_spec(p, cfg.sim));
  return space;
}

std::vector<std::string> canonical_lines(const RunConfig& c) {
  const SimulationConfig& s = c.sim;
  std::vector<std::string> out;
  const auto add = [&out](const std::string& k, const std::string& v) { out.push_back(k + " = " + v); };
  const auto num = [&add](const std::string& k, double v) { add(k, fmt_double(v)); };
  const auto series = [](const MonthlySeries& m) {
    std::string r;
    for (std::size_t i = 0; i < 12; ++i) r += (i ? "," : "") + fmt_double(m.values[i]);
    return r;
  };
  add("scenario.kind", std::string(to_string(s.scenario.kind)));
  add("scenario.wind", series(s.scenario.wind_data));
  add("scenario.temperature", series(s.scenario.temp_data));
  num("scenario.current_base", s.scenario.current.base);
  num("scenario.current_amplitude", s.scenario.current.amplitude);
  num("scenario.wind_base_scale", s.scenario.wind_base_scale);
  num("scenario.temp_base_scale", s.scenario.temp_base_scale);
  std::vector<std::string> events;
  for (const auto& ev : s.scenario.events) events.push_back(payload_line(ev));
  std::sort(events.begin(), events.end());
  for (std::size_t i = 0; i < events.size(); ++i) add("events." + std::to_string(i), events[i]);

  const MaterialProperties& m = s.material;
  num("material.young_modulus", m.young_modulus);
  num("material.damage_layer_width", m.damage_layer_width);
  num("material.fracture_energy", m.fracture_energy);
  num("material.density", m.density);
  num("material.aging_coeff", m.aging_coeff);
  num("material.thermal_conductivity", m.thermal_conductivity);
  num("material.electrical_conductivity", m.electrical_conductivity);
  num("material.resistivity_temp_coeff", m.resistivity_temp_coeff);
  num("material.reference_temp", m.reference_temp);
  num("material.air_density", m.air.density);
  num("material.air_kinematic_viscosity", m.air.kinematic_viscosity);
  num("material.air_thermal_conductivity", m.air.thermal_conductivity);
  num("material.air_prandtl", m.air.prandtl);
  num("material.ice_density", m.ice.density);
  num("material.ice_resistivity", m.ice.resistivity);
  num("material.ice_thermal_conductivity", m.ice.thermal_conductivity);
  num("material.ice_latent_heat", m.ice.latent_heat);
  num("material.span", s.sag.span);
  num("material.pretension", s.sag.pretension);
  num("material.ultimate_strength", s.sag.ultimate_strength);
  num("material.unit_weight", s.sag.unit_weight);
  num("material.thermal_expansion", s.sag.thermal_expansion);
  num("material.sag_reference_temp", s.sag.reference_temp);
  num("material.diameter", s.wind.diameter);
  num("material.attack_angle", s.wind.attack_angle);
  num("material.span_factor", s.wind.span_factor);
  num("material.drag_air_density", s.wind.air_density);
  num("material.drag_kinematic_viscosity", s.wind.kinematic_viscosity);

  num("simulation.dt", s.dt);
  num("simulation.horizon", s.horizon);
  num("simulation.area_spread", s.area_spread);
  num("simulation.theta_limit", s.theta_limit);
  num("simulation.phi_limit", s.phi_limit);
  num("simulation.h_min", s.h_min);
  num("simulation.melt_duration", s.melt_duration);
  add("simulation.n_elements", std::to_string(s.n_elements));
  add("simulation.sag_temperature",
      s.sag_temperature == SagTemperature::conductor_midspan ? "conductor_midspan" : "ambient");
  add("simulation.picard", s.picard ? "true" : "false");
  if (s.picard) {
    add("simulation.picard_max_iterations", std::to_string(s.picard_max_iterations));
    num("simulation.picard_tolerance", s.picard_tolerance);
  }
  add("simulation.snapshots", s.record_snapshots ? "true" : "false");
  if (s.record_snapshots) num("simulation.snapshot_interval", s.snapshot_interval);

  const StochasticSettings& st = c.stochastic;
  if (st.space_name) add("stochastic.space", *st.space_name);
  for (std::size_t i = 0; i < st.params.size(); ++i) add("stochastic.param." + std::to_string(i), st.params[i]);
  add("stochastic.points", std::to_string(st.points));
  add("stochastic.samples", std::to_string(st.samples));
  add("stochastic.seed", std::to_string(st.seed));
  if (st.qoi) add("stochastic.qoi", std::string(to_string(*st.qoi)));
  std::sort(out.begin(), out.end());
  return out;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string config_digest(const RunConfig& cfg) {
  std::string all;
  for (const auto& l : canonical_lines(cfg)) all += l + "\n";
  return fnv1a_hex(all);
}

}  // namespace tline
