#include "tline/stochastic.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <utility>

#include "tline/errors.hpp"
#include "tline/quadrature.hpp"

namespace tline {

namespace {

constexpr std::array<std::pair<ParamName, std::string_view>, 12> kParamNames{{
    {ParamName::g_c, "g_c"},
    {ParamName::a, "a"},
    {ParamName::gamma, "gamma"},
    {ParamName::A_sigma, "A_sigma"},
    {ParamName::theta_b, "theta_b"},
    {ParamName::w_b, "w_b"},
    {ParamName::I_b, "I_b"},
    {ParamName::I_A, "I_A"},
    {ParamName::w_max, "w_max"},
    {ParamName::T_fire, "T_fire"},
    {ParamName::V_f, "V_f"},
    {ParamName::t_ice, "t_ice"},
}};

template <class Payload, class F>
bool for_each_payload(std::vector<EventWindow>& events, F&& f) {
  bool any = false;
  for (auto& e : events) {
    if (auto* p = std::get_if<Payload>(&e.payload)) {
      f(*p);
      any = true;
    }
  }
  return any;
}

template <class Payload>
const Payload& first_payload(const SimulationConfig& cfg, ParamName p) {
  for (const auto& e : cfg.scenario.events) {
    if (const auto* q = std::get_if<Payload>(&e.payload)) return *q;
  }
  throw ValidationError("parameter " + std::string(to_string(p)) + " has no matching event in the scenario",
                        std::string(to_string(p)));
}

void require_grid_match(const QoIEnsemble& ens, const CollocationGrid& grid) {
  std::string missing;
  std::size_t count = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k >= ens.values.size() || ens.values[k].size() != ens.times.size()) {
      if (count < 10) missing += (missing.empty() ? "" : ", ") + std::to_string(k);
      ++count;
    }
  }
  if (ens.values.size() > grid.size()) {
    throw ValidationError("ensemble has more rows than the grid has nodes", "nodes");
  }
  if (count > 0) {
    if (count > 10) missing += ", ...";
    throw ValidationError("ensemble lacks values at " + std::to_string(count) + " grid node(s): " + missing, "nodes");
  }
}

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::string_view to_string(ParamName p) {
  for (const auto& [k, v] : kParamNames) {
    if (k == p) return v;
  }
  return "?";
}

ParamName parse_param_name(std::string_view s) {
  for (const auto& [k, v] : kParamNames) {
    if (v == s) return k;
  }
  if (s == "γ") return ParamName::gamma;
  throw ValidationError("unknown random parameter '" + std::string(s) + "'", "name");
}

void validate(const RandomParameter& p) {
  if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower < p.upper)) {
    throw ValidationError("parameter " + std::string(to_string(p.name)) + " needs lower < upper", "lower");
  }
}

double nominal_value(const SimulationConfig& cfg, ParamName p) {
  switch (p) {
    case ParamName::g_c: return cfg.material.fracture_energy;
    case ParamName::a: return cfg.material.aging_coeff;
    case ParamName::gamma: return cfg.material.damage_layer_width;
    case ParamName::A_sigma: return cfg.area_spread;
    case ParamName::theta_b: return cfg.scenario.temp_base_scale;
    case ParamName::w_b: return cfg.scenario.wind_base_scale;
    case ParamName::I_b: return cfg.scenario.current.base;
    case ParamName::I_A: return cfg.scenario.current.amplitude;
    case ParamName::w_max: return first_payload<ExtremeWind>(cfg, p).w_max;
    case ParamName::T_fire: return first_payload<Wildfire>(cfg, p).flame_temp;
    case ParamName::V_f: return first_payload<Wildfire>(cfg, p).view_factor;
    case ParamName::t_ice: return first_payload<IceLayer>(cfg, p).thickness;
  }
  return 0.0;
}

void apply_parameter(SimulationConfig& cfg, ParamName p, double value) {
  bool applied = true;
  auto& ev = cfg.scenario.events;
  switch (p) {
    case ParamName::g_c: cfg.material.fracture_energy = value; break;
    case ParamName::a: cfg.material.aging_coeff = value; break;
    case ParamName::gamma: cfg.material.damage_layer_width = value; break;
    case ParamName::A_sigma: cfg.area_spread = value; break;
    case ParamName::theta_b: cfg.scenario.temp_base_scale = value; break;
    case ParamName::w_b: cfg.scenario.wind_base_scale = value; break;
    case ParamName::I_b: cfg.scenario.current.base = value; break;
    case ParamName::I_A: cfg.scenario.current.amplitude = value; break;
    case ParamName::w_max: applied = for_each_payload<ExtremeWind>(ev, [&](ExtremeWind& w) { w.w_max = value; }); break;
    case ParamName::T_fire: applied = for_each_payload<Wildfire>(ev, [&](Wildfire& f) { f.flame_temp = value; }); break;
    case ParamName::V_f: applied = for_each_payload<Wildfire>(ev, [&](Wildfire& f) { f.view_factor = value; }); break;
    case ParamName::t_ice: applied = for_each_payload<IceLayer>(ev, [&](IceLayer& i) { i.thickness = value; }); break;
  }
  if (!applied) {
    throw ValidationError("parameter " + std::string(to_string(p)) + " has no matching event in the scenario",
                          std::string(to_string(p)));
  }
}

RandomParameter around_nominal(const SimulationConfig& cfg, ParamName p, double rel) {
  const double m = nominal_value(cfg, p);
  RandomParameter r{p, m * (1.0 - rel), m * (1.0 + rel)};
  if (r.lower > r.upper) std::swap(r.lower, r.upper);
  validate(r);
  return r;
}

std::vector<std::string> space_preset_names() { return {"xim", "xic", "xif1", "xif2", "xif3", "xi1", "xi2", "xi3"}; }

RandomSpace space_preset(std::string_view name, const SimulationConfig& cfg) {
  using P = ParamName;
  std::vector<P> names;
  if (name == "xim") {
    names = {P::A_sigma, P::gamma, P::g_c, P::a};
  } else if (name == "xic") {
    names = {P::g_c, P::a, P::theta_b, P::w_b, P::I_b, P::I_A};
  } else if (name == "xif1" || name == "xif2" || name == "xif3") {
    names = {P::g_c, P::a, P::w_b, P::I_b};
  } else if (name == "xi1") {
    names = {P::g_c, P::a, P::w_b, P::I_b, P::w_max};
  } else if (name == "xi2") {
    names = {P::g_c, P::a, P::w_b, P::I_b, P::T_fire, P::V_f};
  } else if (name == "xi3") {
    names = {P::g_c, P::a, P::w_b, P::I_b, P::t_ice};
  } else {
    throw ValidationError("unknown parameter space '" + std::string(name) + "'", "space");
  }
  RandomSpace space;
  for (P p : names) space.push_back(around_nominal(cfg, p));
  return space;
}

std::size_t CollocationGrid::index_along(std::size_t node, std::size_t dim) const {
  const auto n = static_cast<std::size_t>(points_per_dim);
  for (std::size_t d = dims.size(); d-- > dim + 1;) node /= n;
  return node % n;
}

CollocationGrid make_grid(const RandomSpace& space, int points_per_dim) {
  if (space.empty()) throw ValidationError("random space has no dimensions", "space");
  if (space.size() > kMaxDimensions) {
    throw ValidationError("tensor grids are limited to " + std::to_string(kMaxDimensions) + " dimensions (got " +
                              std::to_string(space.size()) + ")",
                          "space");
  }
  for (const auto& p : space) validate(p);
  const GaussRule rule = gauss_legendre_rule(points_per_dim);

  CollocationGrid grid;
  grid.dims = space;
  grid.points_per_dim = points_per_dim;
  grid.rule_points = rule.points;
  grid.rule_weights = rule.weights;
  std::size_t total = 1;
  for (std::size_t d = 0; d < space.size(); ++d) total *= static_cast<std::size_t>(points_per_dim);
  grid.nodes.reserve(total);
  grid.weights.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    std::vector<double> xi(space.size());
    double w = 1.0;
    for (std::size_t d = 0; d < space.size(); ++d) {
      const std::size_t i = grid.index_along(k, d);
      const auto& p = space[d];
      xi[d] = 0.5 * (p.lower + p.upper) + 0.5 * (p.upper - p.lower) * rule.points[i];
      w *= 0.5 * rule.weights[i];
    }
    grid.nodes.push_back(std::move(xi));
    grid.weights.push_back(w);
  }
  return grid;
}

std::string_view to_string(QoIKind k) {
  switch (k) {
    case QoIKind::theta_max: return "theta_max";
    case QoIKind::phi_max: return "phi_max";
    case QoIKind::phi_mid: return "phi_mid";
    case QoIKind::h_B: return "h_B";
  }
  return "?";
}

QoIKind parse_qoi(std::string_view s) {
  for (QoIKind k : {QoIKind::theta_max, QoIKind::phi_max, QoIKind::phi_mid, QoIKind::h_B}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown QoI '" + std::string(s) + "'", "qoi");
}

Moments pcm_moments(const QoIEnsemble& ens, const CollocationGrid& grid) {
  require_grid_match(ens, grid);
  const std::size_t nt = ens.times.size();
  Moments m;
  m.mean.assign(nt, 0.0);
  m.stddev.assign(nt, 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = grid.weights[k];
    for (std::size_t t = 0; t < nt; ++t) m.mean[t] += w * ens.values[k][t];
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = grid.weights[k];
    for (std::size_t t = 0; t < nt; ++t) {
      const double d = ens.values[k][t] - m.mean[t];
      m.stddev[t] += w * d * d;
    }
  }
  for (double& s : m.stddev) s = std::sqrt(s);
  return m;
}

std::vector<std::vector<double>> sobol_first_order(const QoIEnsemble& ens, const CollocationGrid& grid) {
  if (grid.dims.size() < 2 || grid.points_per_dim < 2) {
    throw ValidationError("Sobol indices need at least 2 dimensions and 2 points per dimension", "space");
  }
  const Moments m = pcm_moments(ens, grid);
  const std::size_t nt = ens.times.size();
  const auto n = static_cast<std::size_t>(grid.points_per_dim);
  std::vector<std::vector<double>> s(grid.dims.size(), std::vector<double>(nt, 0.0));
  std::vector<double> cond(n * nt);
  for (std::size_t d = 0; d < grid.dims.size(); ++d) {
    // Conditional mean at each node of dimension d: the mapped weights of the
    // remaining dimensions are w_k / (w_i / 2).
    std::fill(cond.begin(), cond.end(), 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const std::size_t i = grid.index_along(k, d);
      const double w = grid.weights[k] / (0.5 * grid.rule_weights[i]);
      for (std::size_t t = 0; t < nt; ++t) cond[i * nt + t] += w * ens.values[k][t];
    }
    for (std::size_t t = 0; t < nt; ++t) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dev = cond[i * nt + t] - m.mean[t];
        v += 0.5 * grid.rule_weights[i] * dev * dev;
      }
      const double total = m.stddev[t] * m.stddev[t];
      // A spread at roundoff level of the mean carries no sensitivity information.
      const double floor = std::max(1e-30, 1e-24 * m.mean[t] * m.mean[t]);
      s[d][t] = total < floor ? std::numeric_limits<double>::quiet_NaN() : std::clamp(v / total, 0.0, 1.0);
    }
  }
  return s;
}

std::vector<double> probability_of_failure(const QoIEnsemble& h_ens, const CollocationGrid& grid) {
  std::vector<double> p = pcm_moments(h_ens, grid).mean;
  for (double& x : p) x = std::clamp(x, 0.0, 1.0);
  return p;
}

std::vector<RunOutput> evaluate_all(const Model& model, const std::vector<std::vector<double>>& inputs, int jobs,
                                    const std::function<void(std::size_t)>& progress) {
  const std::size_t n = inputs.size();
  std::vector<RunOutput> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        out[i] = model(inputs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
      const std::size_t c = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(c);
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

QoIEnsemble qoi_ensemble(const std::vector<RunOutput>& runs, QoIKind kind, double dt) {
  if (kind == QoIKind::h_B) return indicator_ensemble(runs, dt);
  QoIEnsemble ens;
  ens.kind = kind;
  std::size_t len = runs.empty() ? 0 : std::numeric_limits<std::size_t>::max();
  for (const auto& r : runs) len = std::min(len, r.select(kind).size());
  for (const auto& r : runs) {
    const auto& s = r.select(kind);
    ens.values.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(len));
  }
  for (std::size_t i = 0; i < len; ++i) ens.times.push_back(static_cast<double>(i + 1) * dt);
  return ens;
}

QoIEnsemble indicator_ensemble(const std::vector<RunOutput>& runs, double dt) {
  QoIEnsemble ens;
  ens.kind = QoIKind::h_B;
  std::size_t len = 0;
  for (const auto& r : runs) len = std::max(len, r.indicator.size());
  for (const auto& r : runs) {
    std::vector<double> h = r.indicator;
    // A run stops at failure; its indicator stays at 1 afterwards.
    const double pad = h.empty() ? 0.0 : h.back();
    h.resize(len, pad);
    ens.values.push_back(std::move(h));
  }
  for (std::size_t i = 0; i < len; ++i) ens.times.push_back(static_cast<double>(i + 1) * dt);
  return ens;
}

namespace {

void check_space(const SimulationConfig& base, const RandomSpace& space) {
  validate(base);
  for (const auto& p : space) {
    validate(p);
    SimulationConfig probe = base;
    apply_parameter(probe, p.name, 0.5 * (p.lower + p.upper));
  }
}

RunOutput run_at(const SimulationConfig& base, const RandomSpace& space, std::span<const double> xi,
                 std::optional<QoIKind> kind) {
  SimulationConfig cfg = base;
  for (std::size_t d = 0; d < space.size(); ++d) apply_parameter(cfg, space[d].name, xi[d]);
  SimulationResult res = run_deterministic(cfg);
  RunOutput out;
  out.indicator = failure_indicator(res, cfg);
  if (res.error) {
    out.error = res.error;
    for (std::size_t k = res.times.size(); k < out.indicator.size(); ++k) out.indicator[k] = 1.0;
  }
  if (!kind) {
    out.by_kind = {std::move(res.theta_max), std::move(res.phi_max), std::move(res.phi_mid)};
    return out;
  }
  switch (*kind) {
    case QoIKind::theta_max: out.series = std::move(res.theta_max); break;
    case QoIKind::phi_max: out.series = std::move(res.phi_max); break;
    case QoIKind::phi_mid: out.series = std::move(res.phi_mid); break;
    case QoIKind::h_B: out.series = out.indicator; break;
  }
  return out;
}

}  // namespace

const std::vector<double>& RunOutput::select(QoIKind kind) const {
  if (kind == QoIKind::h_B) return indicator;
  const auto& s = by_kind[static_cast<std::size_t>(kind)];
  return s.empty() ? series : s;
}

Model simulation_model(const SimulationConfig& base, const RandomSpace& space, QoIKind kind) {
  check_space(base, space);
  return [base, space, kind](std::span<const double> xi) { return run_at(base, space, xi, kind); };
}

Model simulation_model_all(const SimulationConfig& base, const RandomSpace& space) {
  check_space(base, space);
  return [base, space](std::span<const double> xi) { return run_at(base, space, xi, std::nullopt); };
}

std::vector<std::vector<double>> monte_carlo_samples(const RandomSpace& space, std::size_t n, std::uint64_t seed) {
  for (const auto& p : space) validate(p);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> xs(n, std::vector<double>(space.size()));
  for (auto& x : xs) {
    for (std::size_t d = 0; d < space.size(); ++d) {
      x[d] = space[d].lower + (space[d].upper - space[d].lower) * unit_uniform(rng);
    }
  }
  return xs;
}

MonteCarloResult monte_carlo_moments(const RandomSpace& space, std::size_t n_samples, std::uint64_t seed,
                                     const Model& model, double dt, int jobs,
                                     const std::function<void(std::size_t)>& progress, QoIKind kind) {
  if (n_samples < 1) throw ValidationError("Monte Carlo needs at least one sample", "samples");
  const auto xs = monte_carlo_samples(space, n_samples, seed);
  return monte_carlo_statistics(evaluate_all(model, xs, jobs, progress), kind, dt);
}

MonteCarloResult monte_carlo_statistics(const std::vector<RunOutput>& runs, QoIKind kind, double dt) {
  if (runs.empty()) throw ValidationError("Monte Carlo needs at least one sample", "samples");
  const std::size_t n_samples = runs.size();
  const QoIEnsemble q = qoi_ensemble(runs, kind, dt);
  const QoIEnsemble h = indicator_ensemble(runs, dt);

  MonteCarloResult r;
  r.times = q.times;
  const std::size_t nt = q.times.size();
  const auto n = static_cast<double>(n_samples);
  r.mean.assign(nt, 0.0);
  r.stddev.assign(nt, 0.0);
  for (const auto& v : q.values) {
    for (std::size_t t = 0; t < nt; ++t) r.mean[t] += v[t];
  }
  for (double& m : r.mean) m /= n;
  if (n_samples > 1) {
    for (const auto& v : q.values) {
      for (std::size_t t = 0; t < nt; ++t) r.stddev[t] += (v[t] - r.mean[t]) * (v[t] - r.mean[t]);
    }
    for (double& s : r.stddev) s = std::sqrt(s / (n - 1.0));
  }
  r.pfail.assign(h.times.size(), 0.0);
  for (const auto& v : h.values) {
    for (std::size_t t = 0; t < v.size(); ++t) r.pfail[t] += v[t];
  }
  for (double& p : r.pfail) p /= n;
  for (const auto& run : runs) r.failed_runs += run.error ? 1 : 0;
  return r;
}

double convergence_error(std::span<const double> candidate, std::span<const double> reference) {
  if (candidate.size() != reference.size()) {
    throw ValidationError("candidate and reference series differ in length", "reference");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    num += (candidate[i] - reference[i]) * (candidate[i] - reference[i]);
    den += reference[i] * reference[i];
  }
  if (!(den > 0.0)) throw ValidationError("reference series has zero norm", "reference");
  return std::sqrt(num / den);
}

ConvergenceStudy convergence_study(const Model& model, const RandomParameter& param, double dt,
                                   const ConvergenceOptions& opts,
                                   const std::function<void(std::string_view, std::size_t)>& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  const RandomSpace space{param};
  const auto report = [&](std::string_view stage) {
    return [&progress, stage](std::size_t c) {
      if (progress) progress(stage, c);
    };
  };
  const auto final_pair = [](const std::vector<double>& mean, const std::vector<double>& sd) {
    if (mean.empty()) throw SolverError("convergence QoI series is empty");
    return std::vector<double>{mean.back(), sd.back()};
  };
  const auto pcm_pair = [&](int n, std::string_view stage) {
    const CollocationGrid grid = make_grid(space, n);
    const auto runs = evaluate_all(model, grid.nodes, opts.jobs, report(stage));
    const Moments m = pcm_moments(qoi_ensemble(runs, QoIKind::phi_mid, dt), grid);
    return final_pair(m.mean, m.stddev);
  };

  ConvergenceStudy st;
  st.levels = opts.levels;
  st.reference_points = opts.reference_points;
  st.mc_samples = opts.mc_samples;
  const std::vector<double> ref = pcm_pair(opts.reference_points, "reference");
  st.reference_mean = ref[0];
  st.reference_std = ref[1];
  for (int n : opts.levels) st.pcm_errors.push_back(convergence_error(pcm_pair(n, "pcm"), ref));
  const MonteCarloResult mc = monte_carlo_moments(space, opts.mc_samples, opts.seed, model, dt, opts.jobs, report("mc"));
  st.mc_error = convergence_error(final_pair(mc.mean, mc.stddev), ref);
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return st;
}

}  // namespace tline
