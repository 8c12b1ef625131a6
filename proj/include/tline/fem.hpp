#pragma once

// Linear 1-D finite elements with two-point Gauss quadrature for the five
// coupled fields. Every system is tridiagonal and solved directly.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "tline/environment.hpp"
#include "tline/loading.hpp"
#include "tline/material.hpp"

namespace tline {

struct Mesh {
  double length = 200.0;
  int n_elements = 1000;
  std::vector<double> node_coords;

  Mesh() = default;
  Mesh(double length, int n_elements);

  std::size_t n_nodes() const noexcept { return node_coords.size(); }
  double element_size() const noexcept { return length / n_elements; }
  std::size_t midspan_node() const noexcept { return static_cast<std::size_t>(n_elements / 2); }
};

/// Geometry sampled at the Gauss points, computed once per mesh/area pair.
/// Index q = 2 * element + g.
struct Discretization {
  Mesh mesh;
  AreaProfile area{1.0, 1.0, 1.0};
  double nominal_diameter = 0.0;
  double quad_weight = 0.0;                  // h/2
  std::array<double, 2> n1{}, n2{};          // shape functions at the two points
  std::vector<double> xq, area_q, diameter_q, surface_q;
  std::vector<char> notched_q;               // diameter differs from nominal
  std::vector<double> lumped_mass;           // row sums of int A N^T N
  std::vector<double> inv_lumped_mass;
  std::vector<double> element_area;          // int_e A dx
  std::array<std::vector<double>, 5> diameter_pow;  // D^(m-1) per Nusselt band

  Discretization(const Mesh& mesh, const AreaProfile& area);
};

struct FieldState {
  std::vector<double> u, phi, fatigue, history, theta, voltage;

  FieldState() = default;
  FieldState(std::size_t n_nodes, double initial_temp);
};

/// Thomas factorization eliminating from both ends towards the middle row,
/// reusable for several right-hand sides. Throws SolverError on a vanishing
/// pivot or a non-finite solution.
class TridiagonalLU {
 public:
  void factor(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper);
  void solve(std::span<double> rhs) const;

 private:
  std::vector<double> inv_, coef_, gain_;
  double mid_lower_ = 0.0;
  double mid_upper_ = 0.0;
};

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[i]` couples
/// rows i+1 and i, `upper[i]` couples rows i and i+1. Throws SolverError on a
/// vanishing pivot or non-finite result.
void solve_tridiagonal(std::span<const double> lower, std::span<double> diag, std::span<const double> upper,
                       std::span<double> rhs);

/// Natural-convection floor and the banded Nusselt correlation
/// Nu = C Re^m Pr^(1/3), h = Nu k_air / D.
double convective_coefficient(double wind_speed, double diameter, const AirProperties& air, double h_min = 2.0);

/// (1 - phi)^2 sigma_0 / (1 + alpha (theta - theta_0)).
double degraded_conductivity(double phi, double theta, const MaterialProperties& props);

/// Effective sigma * A of a conductor of area `area` carrying an ice shell of
/// `ice_thickness` in parallel.
double parallel_conductance(double sigma, double area, double ice_thickness, const MaterialProperties& props);

enum class HeatExchangeMode { convective, convective_plus_fire, ice_covered };

struct HeatExchangeSpec {
  HeatExchangeMode mode = HeatExchangeMode::convective;
  double ambient_temp = 298.15;  // K
  double wind_speed = 0.0;       // m/s
  std::optional<double> fixed_h; // uniform h instead of the correlation
  double h_min = 2.0;
  Wildfire fire;
  double ice_thickness = 0.0;    // m
  double ice_temp = kFreezingPoint;
  double melt_duration = kSecondsPerYear / 12.0;  // s, spreads the latent heat
};

/// u with u(0) = 0 and traction `tension` at x = L, stiffness degraded by the current phi.
std::vector<double> solve_displacement(const Discretization& disc, const MaterialProperties& props,
                                       const FieldState& state, double tension);

/// Element strain of a nodal displacement field.
std::vector<double> element_strain(const Discretization& disc, std::span<const double> u);

/// Nodal max of the previous history and Y eps^2 averaged from adjacent elements.
std::vector<double> update_history(const Discretization& disc, const MaterialProperties& props,
                                   const FieldState& state);

/// Damage from the current history and fatigue, clamped to [0, 1].
std::vector<double> solve_damage(const Discretization& disc, const MaterialProperties& props,
                                 const FieldState& state);

/// Forward-Euler fatigue update with lumped mass; dt in years.
std::vector<double> step_fatigue(const Discretization& disc, const MaterialProperties& props,
                                 const FieldState& state, double dt);

/// Steady temperature with the Joule source from the stored voltage field and
/// the mode's exchange terms. Zero-flux ends.
std::vector<double> solve_temperature(const Discretization& disc, const MaterialProperties& props,
                                      const FieldState& state, const HeatExchangeSpec& spec);

/// Voltage with V(0) = 0 and |current| injected at x = L.
std::vector<double> solve_voltage(const Discretization& disc, const MaterialProperties& props,
                                  const FieldState& state, double current, double ice_thickness = 0.0);

/// Damage solve that keeps its factorization while the history field and
/// the material are unchanged.
class DamageOperator {
 public:
  void solve(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
             std::vector<double>& out);

 private:
  TridiagonalLU lu_;
  const Discretization* disc_ = nullptr;
  double gamma_ = 0.0;
  double gc_ = 0.0;
  std::vector<double> history_;
};

// Allocation-free forms for the time loop. `out` may be the matching field
// of `state` (u, history, phi, fatigue, theta, voltage respectively).
void solve_displacement(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                        double tension, std::vector<double>& out);
void update_history(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                    std::vector<double>& out);
void solve_damage(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                  std::vector<double>& out);
void step_fatigue(const Discretization& disc, const MaterialProperties& props, const FieldState& state, double dt,
                  std::vector<double>& out);
void solve_temperature(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                       const HeatExchangeSpec& spec, std::vector<double>& out);
void solve_voltage(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                   double current, double ice_thickness, std::vector<double>& out);

/// Element-wise sigma_E A dV/dx for the given state.
std::vector<double> element_current(const Discretization& disc, const MaterialProperties& props,
                                    const FieldState& state, double ice_thickness = 0.0);

/// Integrated Joule power and convective loss (W) for a temperature `theta`
/// solved from `state` in convective mode.
struct EnergyBalance {
  double joule = 0.0;
  double convective = 0.0;
};
EnergyBalance energy_balance(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                             std::span<const double> theta, const HeatExchangeSpec& spec);

}  // namespace tline
