#pragma once

// Non-intrusive uncertainty quantification over the deterministic simulator:
// tensor Gauss-Legendre collocation, first-order Sobol indices, the Bernoulli
// failure probability and a Monte Carlo baseline.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tline/simulation.hpp"

namespace tline {

enum class ParamName { g_c, a, gamma, A_sigma, theta_b, w_b, I_b, I_A, w_max, T_fire, V_f, t_ice };

std::string_view to_string(ParamName p);
ParamName parse_param_name(std::string_view s);

/// Uniform on [lower, upper].
struct RandomParameter {
  ParamName name = ParamName::g_c;
  double lower = 0.0;
  double upper = 1.0;
};

void validate(const RandomParameter& p);

using RandomSpace = std::vector<RandomParameter>;

/// Value of a parameter in the given config (the mean of its default range).
double nominal_value(const SimulationConfig& cfg, ParamName p);

/// Writes `value` into the config. Event parameters (w_max, T_fire, V_f,
/// t_ice) are applied to every event carrying the matching payload.
void apply_parameter(SimulationConfig& cfg, ParamName p, double value);

/// Parameter with bounds nominal * (1 -/+ rel).
RandomParameter around_nominal(const SimulationConfig& cfg, ParamName p, double rel = 0.1);

/// Named presets: xim, xic, xif1, xif2, xif3, xi1, xi2, xi3.
RandomSpace space_preset(std::string_view name, const SimulationConfig& cfg);
std::vector<std::string> space_preset_names();

constexpr std::size_t kMaxDimensions = 6;

/// Full tensor grid. Node k has per-dimension indices given by the mixed-radix
/// digits of k with the last dimension fastest.
struct CollocationGrid {
  RandomSpace dims;
  int points_per_dim = 5;
  std::vector<double> rule_points;   // reference nodes on [-1, 1]
  std::vector<double> rule_weights;  // reference weights, sum to 2
  std::vector<std::vector<double>> nodes;  // physical parameter tuples
  std::vector<double> weights;       // prod(w / 2), sums to 1

  std::size_t size() const noexcept { return nodes.size(); }
  std::size_t index_along(std::size_t node, std::size_t dim) const;
};

CollocationGrid make_grid(const RandomSpace& space, int points_per_dim = 5);

enum class QoIKind { theta_max, phi_max, phi_mid, h_B };

std::string_view to_string(QoIKind k);
QoIKind parse_qoi(std::string_view s);

/// values[node][time].
struct QoIEnsemble {
  QoIKind kind = QoIKind::theta_max;
  std::vector<std::vector<double>> values;
  std::vector<double> times;
};

struct Moments {
  std::vector<double> mean, stddev;
};

Moments pcm_moments(const QoIEnsemble& ens, const CollocationGrid& grid);

/// indices[dim][time]; NaN where the total variance vanishes.
std::vector<std::vector<double>> sobol_first_order(const QoIEnsemble& ens, const CollocationGrid& grid);

std::vector<double> probability_of_failure(const QoIEnsemble& h_ens, const CollocationGrid& grid);

/// Output of one black-box evaluation. `series` is the QoI history on times
/// dt, 2 dt, ...; `indicator` is h_B over the full horizon. Models that
/// produce several QoIs at once fill `by_kind` (theta_max, phi_max, phi_mid).
struct RunOutput {
  std::vector<double> series;
  std::vector<double> indicator;
  std::optional<std::string> error;
  std::array<std::vector<double>, 3> by_kind;

  const std::vector<double>& select(QoIKind kind) const;
};

using Model = std::function<RunOutput(std::span<const double> xi)>;

/// Evaluates `model` at every tuple on up to `jobs` threads. Results are
/// stored by index, so the outcome does not depend on scheduling.
/// `progress` is called with the number of completed runs.
std::vector<RunOutput> evaluate_all(const Model& model, const std::vector<std::vector<double>>& inputs, int jobs,
                                    const std::function<void(std::size_t)>& progress = {});

/// QoI ensemble truncated to the shortest series, plus the h_B ensemble
/// padded to the longest horizon.
QoIEnsemble qoi_ensemble(const std::vector<RunOutput>& runs, QoIKind kind, double dt);
QoIEnsemble indicator_ensemble(const std::vector<RunOutput>& runs, double dt);

/// Simulator adapter: applies xi to `base`, runs, and extracts `kind`.
/// A solver breakdown ends the series and counts as failure from that step.
Model simulation_model(const SimulationConfig& base, const RandomSpace& space, QoIKind kind);

/// Same adapter keeping theta_max, phi_max and phi_mid in `by_kind`.
Model simulation_model_all(const SimulationConfig& base, const RandomSpace& space);

struct MonteCarloResult {
  std::vector<double> mean, stddev, pfail, times;
  std::size_t failed_runs = 0;
};

/// Reproducible uniform samples of the box from a 64-bit Mersenne Twister.
std::vector<std::vector<double>> monte_carlo_samples(const RandomSpace& space, std::size_t n, std::uint64_t seed);

MonteCarloResult monte_carlo_moments(const RandomSpace& space, std::size_t n_samples, std::uint64_t seed,
                                     const Model& model, double dt, int jobs = 1,
                                     const std::function<void(std::size_t)>& progress = {},
                                     QoIKind kind = QoIKind::phi_mid);

/// Sample statistics of already evaluated runs (unbiased std, failing fraction).
MonteCarloResult monte_carlo_statistics(const std::vector<RunOutput>& runs, QoIKind kind, double dt);

/// ||candidate - reference||_2 / ||reference||_2.
double convergence_error(std::span<const double> candidate, std::span<const double> reference);

struct ConvergenceStudy {
  std::vector<int> levels;
  std::vector<double> pcm_errors;
  double mc_error = 0.0;
  std::size_t mc_samples = 0;
  int reference_points = 0;
  double reference_mean = 0.0;
  double reference_std = 0.0;
  double seconds = 0.0;
};

struct ConvergenceOptions {
  std::vector<int> levels{2, 3, 4, 5, 7, 10};
  int reference_points = 100;
  std::size_t mc_samples = 10000;
  std::uint64_t seed = 1;
  int jobs = 1;
};

/// One-dimensional study of the final-time QoI; the error of each level
/// compares the (mean, std) pair against the reference.
ConvergenceStudy convergence_study(const Model& model, const RandomParameter& param, double dt,
                                   const ConvergenceOptions& opts,
                                   const std::function<void(std::string_view, std::size_t)>& progress = {});

}  // namespace tline
