#include "tline/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <unistd.h>

#include "tline/config.hpp"
#include "tline/errors.hpp"
#include "tline/output.hpp"
#include "tline/simulation.hpp"
#include "tline/stochastic.hpp"

namespace tline {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string command;
  std::string preset;
  std::string scenario;
  std::string space;
  std::vector<std::string> params;
  std::string out = "tline-out";
  std::string qoi;
  std::optional<double> dt, horizon, snapshot_interval;
  std::optional<int> points;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  int jobs = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  bool snapshots = false;
  bool dry_run = false;
  bool quiet = false;
  int resolution = 365;
  std::string param = "g_c";
  std::vector<int> levels{2, 3, 4, 5, 7, 10};
  int reference = 100;
};

// Thrown once a solver breakdown has been recorded in the manifest.
struct SolverFailure {
  std::string message;
};

class Progress {
 public:
  Progress(std::string stage, std::size_t total, bool quiet) : stage_(std::move(stage)), total_(total), quiet_(quiet) {}

  void operator()(std::size_t done) {
    if (quiet_ || total_ == 0) return;
    // Terminals get a live counter, logs one line per 10%.
    const int step = tty_ ? 1 : 10;
    const int pct = static_cast<int>(100 * done / total_) / step * step;
    if (pct == last_ && done != total_) return;
    last_ = pct;
    if (tty_) {
      std::fprintf(stderr, "\r%s: %zu/%zu runs (%d%%)%s", stage_.c_str(), done, total_, pct, done == total_ ? "\n" : "");
    } else {
      std::fprintf(stderr, "%s: %zu/%zu runs\n", stage_.c_str(), done, total_);
    }
    std::fflush(stderr);
  }

 private:
  std::string stage_;
  std::size_t total_;
  bool quiet_;
  bool tty_ = isatty(fileno(stderr)) != 0;
  int last_ = -1;
};

void note(const Options& o, const std::string& msg) {
  if (!o.quiet) std::fprintf(stderr, "%s\n", msg.c_str());
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--preset", o.preset, "Region preset: amarillo_tx, san_diego_ca, bethel_ak");
  sub->add_option("--scenario", o.scenario, "Config file applied on top of the preset")->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--dt", o.dt, "Time step in years");
  sub->add_option("--horizon", o.horizon, "Simulated horizon in years");
  sub->add_flag("--quiet", o.quiet, "No progress on stderr");
}

void add_stochastic(CLI::App* sub, Options& o) {
  sub->add_option("--space", o.space, "Random space preset (xim, xic, xif1..3, xi1..3) or config file");
  sub->add_option("--param", o.params, "Random parameter, name or name:lower:upper (repeatable)");
  sub->add_option("--points", o.points, "Collocation points per dimension");
  sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--qoi", o.qoi, "Restrict output to one QoI: theta_max, phi_max, phi_mid, h_B");
  sub->add_flag("--dry-run", o.dry_run, "Write the manifest with the run plan and stop");
}

RunConfig build_config(const Options& o) {
  RunConfig rc;
  rc.sim = default_config(o.preset.empty() ? Region::amarillo_tx : parse_region(o.preset));
  if (!o.scenario.empty()) rc = apply_config(load_config_file(o.scenario), rc);
  if (!o.space.empty()) {
    const auto names = space_preset_names();
    if (std::find(names.begin(), names.end(), o.space) != names.end()) {
      rc.stochastic.space_name = o.space;
      rc.stochastic.params.clear();
    } else if (fs::is_regular_file(o.space)) {
      rc = apply_config(load_config_file(o.space), rc);
    } else {
      throw ValidationError("unknown random space '" + o.space + "'", "space");
    }
  }
  if (!o.params.empty()) {
    rc.stochastic.space_name.reset();
    rc.stochastic.params = o.params;
  }
  if (o.dt) rc.sim.dt = *o.dt;
  if (o.horizon) rc.sim.horizon = *o.horizon;
  if (o.snapshots) rc.sim.record_snapshots = true;
  if (o.snapshot_interval) {
    rc.sim.record_snapshots = true;
    rc.sim.snapshot_interval = *o.snapshot_interval;
  }
  if (o.points) {
    if (*o.points < 1 || *o.points > 100) throw ValidationError("points must lie in [1, 100]", "points");
    rc.stochastic.points = *o.points;
  }
  if (o.samples) {
    if (*o.samples < 1) throw ValidationError("samples must be >= 1", "samples");
    rc.stochastic.samples = *o.samples;
  }
  if (o.seed) rc.stochastic.seed = *o.seed;
  if (!o.qoi.empty()) rc.stochastic.qoi = parse_qoi(o.qoi);
  validate(rc.sim);
  return rc;
}

json space_json(const RandomSpace& space) {
  json a = json::array();
  for (const auto& p : space) {
    a.push_back({{"name", std::string(to_string(p.name))}, {"lower", p.lower}, {"upper", p.upper}});
  }
  return a;
}

json failure_json(const std::optional<FailureRecord>& f) {
  if (!f) return nullptr;
  return {{"mode", std::string(to_string(f->mode))}, {"time", f->time}, {"step", f->step}};
}

class Runner {
 public:
  Runner(Options o, RunConfig rc) : o_(std::move(o)), rc_(std::move(rc)), dir_(o_.out) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ValidationError("cannot create output directory " + o_.out, "out");
    m_.command = o_.command;
    m_.config_digest = config_digest(rc_);
    m_.seed = rc_.stochastic.seed;
    m_.started = utc_timestamp();
    std::string stamp = m_.started;
    std::erase_if(stamp, [](char c) { return c == '-' || c == ':'; });
    m_.run_id = o_.command + "-" + m_.config_digest.substr(0, 8) + "-" + stamp;
    m_.details["preset"] = o_.preset.empty() ? "amarillo_tx" : o_.preset;
    m_.details["scenario_kind"] = std::string(to_string(rc_.sim.scenario.kind));
    m_.details["dt"] = rc_.sim.dt;
    m_.details["horizon"] = rc_.sim.horizon;
    m_.details["config"] = canonical_lines(rc_);
    write_manifest(dir_, m_);
  }

  int run() {
    try {
      dispatch();
      m_.status = m_.status == "running" ? "completed" : m_.status;
      finish();
      return kExitOk;
    } catch (const SolverFailure& f) {
      fail(f.message);
      std::fprintf(stderr, "error: solver failure: %s\n", f.message.c_str());
      return kExitSolver;
    } catch (const SolverError& e) {
      fail(e.what());
      std::fprintf(stderr, "error: solver failure: %s\n", e.what());
      return kExitSolver;
    } catch (const DomainError& e) {
      fail(e.what());
      std::fprintf(stderr, "error: solver failure: %s\n", e.what());
      return kExitSolver;
    } catch (const std::exception& e) {
      fail(e.what());
      throw;
    }
  }

 private:
  void finish() {
    m_.finished = utc_timestamp();
    write_manifest(dir_, m_);
  }

  void fail(const std::string& msg) {
    m_.status = "failed";
    m_.error = msg;
    finish();
  }

  void csv(const std::string& name, const std::vector<Column>& cols) {
    write_csv(dir_ / name, cols);
    m_.files.push_back(name);
  }

  void dispatch() {
    const std::string& c = o_.command;
    if (c == "synth-loading") return synth_loading();
    if (c == "simulate") return simulate();
    if (c == "converge") return converge();
    return stochastic();
  }

  void synth_loading() {
    const ScenarioConfig base = without_events(rc_.sim.scenario);
    const int n = o_.resolution;
    if (n < 1) throw ValidationError("resolution must be >= 1", "resolution");
    std::vector<double> t, wind, temp, current;
    for (int k = 0; k <= n; ++k) {
      const double tk = static_cast<double>(k) / n;
      const AmbientState a = ambient_at(base, tk);
      t.push_back(tk);
      wind.push_back(a.wind_speed);
      temp.push_back(a.ambient_temp);
      current.push_back(current_demand(base.current, tk));
    }
    csv("loading.csv", {{"t", t}, {"wind_speed", wind}, {"temperature", temp}, {"current", current}});

    std::vector<double> month, wd, wr, td, tr;
    for (std::size_t k = 0; k < 12; ++k) {
      month.push_back(static_cast<double>(k + 1));
      wd.push_back(base.wind_data.values[k]);
      wr.push_back(evaluate_loading(base.wind_loading, sample_instant(base.wind_loading, k)));
      td.push_back(base.temp_data.values[k]);
      tr.push_back(evaluate_loading(base.temp_loading, sample_instant(base.temp_loading, k)));
    }
    csv("monthly.csv", {{"month", month},
                        {"wind_data", wd},
                        {"wind_fourier", wr},
                        {"temperature_data", td},
                        {"temperature_fourier", tr}});

    std::vector<double> idx{0.0};
    std::vector<double> wc{base.wind_loading.mean}, ws{0.0}, tc{base.temp_loading.mean}, ts{0.0};
    for (std::size_t h = 0; h < base.wind_loading.cos_coeffs.size(); ++h) {
      idx.push_back(static_cast<double>(h + 1));
      wc.push_back(base.wind_loading.cos_coeffs[h]);
      ws.push_back(base.wind_loading.sin_coeffs[h]);
      tc.push_back(base.temp_loading.cos_coeffs[h]);
      ts.push_back(base.temp_loading.sin_coeffs[h]);
    }
    csv("coefficients.csv",
        {{"n", idx}, {"wind_cos", wc}, {"wind_sin", ws}, {"temperature_cos", tc}, {"temperature_sin", ts}});
    m_.details["units"] = {{"wind_speed", "m/s"}, {"temperature", "K"}, {"current", "A"}, {"wind_data", "ft/s"}};
  }

  void simulate() {
    note(o_, "simulate: " + std::to_string(rc_.sim.n_steps()) + " steps");
    const SimulationResult res = run_deterministic(rc_.sim);
    std::vector<double> h = failure_indicator(res, rc_.sim);
    h.resize(res.times.size());
    csv("series.csv", {{"t", res.times},
                       {"theta_max", res.theta_max},
                       {"phi_max", res.phi_max},
                       {"phi_mid", res.phi_mid},
                       {"v_drop", res.v_drop},
                       {"tension", res.tension},
                       {"h_B", h}});
    if (rc_.sim.record_snapshots) {
      std::vector<double> t, x, u, phi, f, hist, theta, v;
      for (const auto& s : res.snapshots) {
        for (std::size_t i = 0; i < res.node_coords.size(); ++i) {
          t.push_back(s.time);
          x.push_back(res.node_coords[i]);
          u.push_back(s.state.u[i]);
          phi.push_back(s.state.phi[i]);
          f.push_back(s.state.fatigue[i]);
          hist.push_back(s.state.history[i]);
          theta.push_back(s.state.theta[i]);
          v.push_back(s.state.voltage[i]);
        }
      }
      csv("snapshots.csv", {{"t", t},
                            {"x", x},
                            {"u", u},
                            {"phi", phi},
                            {"fatigue", f},
                            {"history", hist},
                            {"theta", theta},
                            {"voltage", v}});
    }
    m_.details["failure"] = failure_json(res.failure);
    m_.details["steps"] = res.times.size();
    m_.details["horizon_steps"] = res.horizon_steps;
    if (res.failure) {
      note(o_, "simulate: failed by " + std::string(to_string(res.failure->mode)) + " at t = " +
                   format_number(res.failure->time) + " yr");
    } else {
      note(o_, "simulate: no failure within the horizon");
    }
    if (res.error) throw SolverFailure{*res.error};
  }

  std::vector<QoIKind> output_kinds() const {
    if (rc_.stochastic.qoi) return {*rc_.stochastic.qoi};
    return {QoIKind::theta_max, QoIKind::phi_max, QoIKind::phi_mid};
  }

  void stochastic() {
    const RandomSpace space = resolve_space(rc_);
    const std::string& c = o_.command;
    const bool mc = c == "mc";
    m_.details["space"] = space_json(space);
    m_.details["space_name"] = rc_.stochastic.space_name ? json(*rc_.stochastic.space_name) : json(nullptr);

    std::vector<std::vector<double>> inputs;
    std::optional<CollocationGrid> grid;
    if (mc) {
      inputs = monte_carlo_samples(space, rc_.stochastic.samples, rc_.stochastic.seed);
      m_.details["samples"] = rc_.stochastic.samples;
    } else {
      if (c == "sobol" && space.size() < 2) {
        throw ValidationError("Sobol indices need at least two random parameters", "space");
      }
      if (c == "sobol" && rc_.stochastic.points < 2) {
        throw ValidationError("Sobol indices need at least two points per dimension", "points");
      }
      grid = make_grid(space, rc_.stochastic.points);
      inputs = grid->nodes;
      m_.details["grid"] = {{"points_per_dim", grid->points_per_dim},
                            {"dimensions", space.size()},
                            {"rule", "gauss-legendre"},
                            {"nodes", grid->nodes},
                            {"weights", grid->weights}};
    }
    m_.details["runs"] = inputs.size();
    note(o_, c + ": " + std::to_string(inputs.size()) + " simulator runs on " + std::to_string(o_.jobs) + " workers");
    if (o_.dry_run) {
      m_.status = "planned";
      return;
    }

    const Model model = simulation_model_all(rc_.sim, space);
    Progress progress(c, inputs.size(), o_.quiet);
    const auto runs = evaluate_all(model, inputs, o_.jobs, std::ref(progress));
    std::size_t breakdowns = 0;
    for (const auto& r : runs) breakdowns += r.error ? 1 : 0;
    m_.details["solver_breakdowns"] = breakdowns;
    const double dt = rc_.sim.dt;
    const QoIEnsemble h = indicator_ensemble(runs, dt);

    if (mc) {
      std::vector<std::vector<double>> store;
      std::vector<double> times;
      for (QoIKind k : output_kinds()) {
        const MonteCarloResult r = monte_carlo_statistics(runs, k, dt);
        if (times.empty() || r.times.size() < times.size()) times = r.times;
        store.push_back(r.mean);
        store.push_back(r.stddev);
      }
      const MonteCarloResult pf = monte_carlo_statistics(runs, QoIKind::h_B, dt);
      write_moment_file("mc_moments.csv", times, store);
      csv("mc_pfail.csv", {{"t", pf.times}, {"p_f", pf.pfail}});
      return;
    }

    if (c == "pcm" || c == "pfail") {
      if (c == "pcm") {
        std::vector<std::vector<double>> store;
        std::vector<double> times;
        for (QoIKind k : output_kinds()) {
          const QoIEnsemble e = qoi_ensemble(runs, k, dt);
          const Moments m = pcm_moments(e, *grid);
          if (times.empty() || e.times.size() < times.size()) times = e.times;
          store.push_back(m.mean);
          store.push_back(m.stddev);
        }
        write_moment_file("moments.csv", times, store);
      }
      const auto pf = probability_of_failure(h, *grid);
      csv("pfail.csv", {{"t", h.times}, {"p_f", pf}});
      m_.details["final_p_f"] = pf.empty() ? 0.0 : pf.back();
      return;
    }

    std::vector<std::vector<double>> store;
    std::vector<std::string> names;
    std::vector<double> times;
    for (QoIKind k : output_kinds()) {
      const QoIEnsemble e = qoi_ensemble(runs, k, dt);
      if (times.empty() || e.times.size() < times.size()) times = e.times;
      const auto s = sobol_first_order(e, *grid);
      for (std::size_t d = 0; d < s.size(); ++d) {
        names.push_back(std::string(to_string(k)) + "_S_" + std::string(to_string(space[d].name)));
        store.push_back(s[d]);
      }
    }
    std::vector<Column> cols{{"t", times}};
    for (std::size_t i = 0; i < store.size(); ++i) {
      cols.push_back({names[i], std::span<const double>(store[i]).first(std::min(store[i].size(), times.size()))});
    }
    csv("sobol.csv", cols);
  }

  void write_moment_file(const std::string& name, const std::vector<double>& times,
                         const std::vector<std::vector<double>>& store) {
    const auto kinds = output_kinds();
    std::vector<std::string> names;
    for (QoIKind k : kinds) {
      names.push_back(std::string(to_string(k)) + "_mean");
      names.push_back(std::string(to_string(k)) + "_std");
    }
    std::vector<Column> cols{{"t", times}};
    for (std::size_t i = 0; i < store.size(); ++i) {
      cols.push_back({names[i], std::span<const double>(store[i]).first(std::min(store[i].size(), times.size()))});
    }
    csv(name, cols);
  }

  void converge() {
    const RandomParameter p = parse_parameter_spec(o_.param, rc_.sim);
    ConvergenceOptions opts;
    opts.levels = o_.levels;
    opts.reference_points = o_.reference;
    opts.mc_samples = rc_.stochastic.samples;
    opts.seed = rc_.stochastic.seed;
    opts.jobs = o_.jobs;
    for (int n : opts.levels) {
      if (n < 1 || n > 100) throw ValidationError("levels must lie in [1, 100]", "levels");
    }
    if (opts.reference_points < 1 || opts.reference_points > 100) {
      throw ValidationError("reference must lie in [1, 100]", "reference");
    }
    std::size_t total = static_cast<std::size_t>(opts.reference_points) + opts.mc_samples;
    for (int n : opts.levels) total += static_cast<std::size_t>(n);
    m_.details["space"] = space_json({p});
    m_.details["qoi"] = "phi_mid";
    m_.details["runs"] = total;
    note(o_, "converge: " + std::to_string(total) + " simulator runs on " + std::to_string(o_.jobs) + " workers");
    if (o_.dry_run) {
      m_.status = "planned";
      return;
    }
    const Model model = simulation_model(rc_.sim, {p}, QoIKind::phi_mid);
    std::string stage;
    std::optional<Progress> prog;
    const auto progress = [&](std::string_view s, std::size_t done) {
      if (s != stage) {
        stage = s;
        std::size_t n = s == "mc" ? opts.mc_samples : static_cast<std::size_t>(opts.reference_points);
        prog.emplace("converge/" + stage, n, o_.quiet);
      }
      if (s == "pcm") return;
      (*prog)(done);
    };
    const ConvergenceStudy st = convergence_study(model, p, rc_.sim.dt, opts, progress);
    std::string body = "method,n,error\n";
    for (std::size_t i = 0; i < st.levels.size(); ++i) {
      body += "pcm," + std::to_string(st.levels[i]) + "," + format_number(st.pcm_errors[i]) + "\n";
    }
    body += "mc," + std::to_string(st.mc_samples) + "," + format_number(st.mc_error) + "\n";
    std::ofstream f(dir_ / "convergence.csv", std::ios::binary);
    f << body;
    if (!f) throw ValidationError("cannot write convergence.csv", "out");
    m_.files.push_back("convergence.csv");
    m_.details["reference"] = {{"points", st.reference_points}, {"mean", st.reference_mean}, {"std", st.reference_std}};
    m_.details["seconds"] = st.seconds;
  }

  Options o_;
  RunConfig rc_;
  fs::path dir_;
  RunManifest m_;
};

std::string diagnostic(const ValidationError& e) {
  std::string msg = e.what();
  if (!e.key().empty() && msg.find(e.key()) == std::string::npos) msg += " (" + e.key() + ")";
  return msg;
}

}  // namespace

int run_command(int argc, const char* const* argv) {
  Options o;
  CLI::App app{"Long-term failure simulator for overhead transmission lines", "tline"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth-loading", "Reconstruct the annual loading signals");
  add_common(synth, o);
  synth->add_option("--resolution", o.resolution, "Samples per year")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "Deterministic run");
  add_common(sim, o);
  sim->add_flag("--snapshots", o.snapshots, "Write nodal field snapshots");
  sim->add_option("--snapshot-interval", o.snapshot_interval, "Years between snapshots");

  for (const char* name : {"pcm", "sobol", "pfail"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "pcm"     ? "Collocation moments and failure probability"
                                         : std::string(name) == "sobol" ? "First-order Sobol indices"
                                                                        : "Probability of failure");
    add_common(sub, o);
    add_stochastic(sub, o);
  }
  auto* mc = app.add_subcommand("mc", "Monte Carlo moments and failure probability");
  add_common(mc, o);
  add_stochastic(mc, o);
  mc->add_option("--samples", o.samples, "Number of samples");
  mc->add_option("--seed", o.seed, "Random seed");

  auto* conv = app.add_subcommand("converge", "Collocation against Monte Carlo in one parameter");
  add_common(conv, o);
  conv->add_option("--param", o.param, "Parameter, name or name:lower:upper");
  conv->add_option("--levels", o.levels, "Collocation levels")->delimiter(',');
  conv->add_option("--reference", o.reference, "Reference collocation points");
  conv->add_option("--samples", o.samples, "Monte Carlo samples");
  conv->add_option("--seed", o.seed, "Random seed");
  conv->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  conv->add_flag("--dry-run", o.dry_run, "Write the manifest with the run plan and stop");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return kExitInvalid;
  }
  for (auto* sub : app.get_subcommands()) o.command = sub->get_name();

  try {
    RunConfig rc = build_config(o);
    Runner runner(o, std::move(rc));
    return runner.run();
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", diagnostic(e).c_str());
    return kExitInvalid;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  }
}

int run_command(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"tline"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_command(static_cast<int>(argv.size()), argv.data());
}

}  // namespace tline
