#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "tline/errors.hpp"
#include "tline/fem.hpp"

using namespace tline;

namespace {

constexpr double kSpan = 200.0;
constexpr double kDiameter = 0.04;
const double kArea = std::numbers::pi * kDiameter * kDiameter / 4.0;

// A spread this large leaves the profile at the nominal area everywhere.
Discretization uniform_bar(int n = 1000) { return Discretization(Mesh(kSpan, n), AreaProfile(kArea, 1e200, kSpan)); }
Discretization notched_bar(double spread = 1.25, int n = 1000) {
  return Discretization(Mesh(kSpan, n), AreaProfile(kArea, spread, kSpan));
}

FieldState fresh(const Discretization& d, double theta = 298.15) { return FieldState(d.mesh.n_nodes(), theta); }

Eigen::VectorXd dense_solve(const std::vector<double>& lo, const std::vector<double>& di, const std::vector<double>& up,
                            const std::vector<double>& rhs) {
  const auto n = static_cast<Eigen::Index>(di.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = di[static_cast<std::size_t>(i)];
    b(i) = rhs[static_cast<std::size_t>(i)];
    if (i + 1 < n) {
      a(i + 1, i) = lo[static_cast<std::size_t>(i)];
      a(i, i + 1) = up[static_cast<std::size_t>(i)];
    }
  }
  return a.partialPivLu().solve(b);
}

}  // namespace

TEST_CASE("homogeneous bar displacement is linear in x") {
  const Discretization d = uniform_bar();
  const MaterialProperties props;
  const double tension = 31.5e3;
  const auto u = solve_displacement(d, props, fresh(d), tension);
  for (std::size_t i = 0; i < u.size(); i += 37) {
    const double exact = tension * d.mesh.node_coords[i] / (props.young_modulus * kArea);
    CHECK(std::abs(u[i] - exact) <= 1e-10 * std::max(std::abs(exact), 1e-300) + 1e-300);
  }
  CHECK(u.back() == doctest::Approx(tension * kSpan / (props.young_modulus * kArea)).epsilon(1e-12));
}

TEST_CASE("notched bar strain follows the local area") {
  const Discretization d = notched_bar(1.25);
  const MaterialProperties props;
  const double tension = 30e3;
  const auto u = solve_displacement(d, props, fresh(d), tension);
  const auto eps = element_strain(d, u);
  double worst = 0.0;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    const double xm = 0.5 * (d.mesh.node_coords[e] + d.mesh.node_coords[e + 1]);
    const double exact = tension / (props.young_modulus * d.area(xm));
    worst = std::max(worst, std::abs(eps[e] - exact) / exact);
  }
  CHECK(worst < 5e-3);
  CHECK(eps[500] > eps[0]);
}

TEST_CASE("damage gradient adds a tension-like load") {
  const Discretization d = uniform_bar(200);
  const MaterialProperties props;
  FieldState s = fresh(d);
  for (std::size_t i = 0; i < s.phi.size(); ++i) s.phi[i] = 0.3 * static_cast<double>(i) / 200.0;
  const auto u0 = solve_displacement(d, props, fresh(d), 1e3);
  const auto u1 = solve_displacement(d, props, s, 1e3);
  CHECK(u1.back() > u0.back());
  FieldState broken = fresh(d);
  broken.phi.assign(broken.phi.size(), 1.0);
  CHECK_THROWS_AS(solve_displacement(d, props, broken, 1e3), SolverError);
}

TEST_CASE("history holds the running maximum of Y eps^2") {
  const Discretization d = uniform_bar(100);
  const MaterialProperties props;
  FieldState s = fresh(d);
  const double eps = 3e-4;
  for (std::size_t i = 0; i < s.u.size(); ++i) s.u[i] = eps * d.mesh.node_coords[i];
  s.history = update_history(d, props, s);
  for (double h : s.history) CHECK(h == doctest::Approx(props.young_modulus * eps * eps).epsilon(1e-12));
  for (double& x : s.u) x *= 0.5;
  const auto again = update_history(d, props, s);
  CHECK(again == s.history);
}

TEST_CASE("uniform damage has the closed-form local balance") {
  const Discretization d = uniform_bar(100);
  const MaterialProperties props;
  FieldState s = fresh(d);
  const double hist = 2.5e3, fat = 30.0;
  s.history.assign(s.history.size(), hist);
  s.fatigue.assign(s.fatigue.size(), fat);
  const double gam = props.damage_layer_width;
  const double exact = (hist + fat / gam) / (hist + props.fracture_energy / gam);
  for (double p : solve_damage(d, props, s)) CHECK(p == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("damage solution is bounded and peaks under a history peak") {
  const Discretization d = notched_bar(1.25, 400);
  const MaterialProperties props;
  FieldState s = fresh(d);
  for (std::size_t i = 0; i < s.history.size(); ++i) {
    const double x = d.mesh.node_coords[i] - 100.0;
    s.history[i] = 1e6 * std::exp(-x * x);
  }
  const auto phi = solve_damage(d, props, s);
  const auto peak = std::max_element(phi.begin(), phi.end()) - phi.begin();
  CHECK(peak == 200);
  for (double p : phi) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("cached damage operator matches a fresh solve") {
  const Discretization d = notched_bar(1.25, 300);
  const MaterialProperties props;
  FieldState s = fresh(d);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1e5);
  DamageOperator op;
  std::vector<double> cached;
  for (int step = 0; step < 6; ++step) {
    if (step % 2 == 0) {
      for (double& h : s.history) h = std::max(h, u(rng));
    }
    for (double& f : s.fatigue) f += 1.0;
    op.solve(d, props, s, cached);
    CHECK(cached == solve_damage(d, props, s));
  }
}

TEST_CASE("tridiagonal solvers agree with a dense factorization") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {1u, 2u, 3u, 4u, 7u, 16u, 33u}) {
    std::vector<double> lo(n ? n - 1 : 0), up(lo.size()), di(n), rhs(n);
    for (auto& x : lo) x = u(rng);
    for (auto& x : up) x = u(rng);
    for (auto& x : di) x = 4.0 + u(rng);
    for (auto& x : rhs) x = u(rng);
    const Eigen::VectorXd ref = dense_solve(lo, di, up, rhs);

    std::vector<double> x = rhs, dcopy = di;
    solve_tridiagonal(lo, dcopy, up, x);
    TridiagonalLU lu;
    lu.factor(lo, di, up);
    std::vector<double> y = rhs;
    lu.solve(y);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(x[i] == doctest::Approx(ref(static_cast<Eigen::Index>(i))).epsilon(1e-12));
      CHECK(y[i] == doctest::Approx(ref(static_cast<Eigen::Index>(i))).epsilon(1e-12));
    }
  }
  std::vector<double> lo{1.0}, di{1.0, 1.0}, rhs{1.0, 2.0};
  TridiagonalLU lu;
  CHECK_THROWS_AS(lu.factor(lo, di, lo), SolverError);
  CHECK_THROWS_AS(solve_tridiagonal(lo, di, lo, rhs), SolverError);
}

TEST_CASE("fatigue step of a uniform state") {
  const Discretization d = uniform_bar(50);
  const MaterialProperties props;
  FieldState s = fresh(d, 300.0);
  const double eps = 2e-4, p = 0.25, dt = 0.01;
  for (std::size_t i = 0; i < s.u.size(); ++i) s.u[i] = eps * d.mesh.node_coords[i];
  s.phi.assign(s.phi.size(), p);
  const auto f = step_fatigue(d, props, s, dt);
  const double rate = props.density * props.aging_coeff * props.young_modulus / props.damage_layer_width * eps *
                      (1.0 - p) * p * 300.0 / props.reference_temp;
  for (double x : f) CHECK(x == doctest::Approx(dt * rate).epsilon(1e-12));
  s.phi.assign(s.phi.size(), 0.0);
  for (double x : step_fatigue(d, props, s, dt)) CHECK(x == 0.0);
}

TEST_CASE("voltage carries a constant current through a damaged, heated line") {
  const Discretization d = notched_bar(1.25);
  MaterialProperties props;
  FieldState s = fresh(d);
  for (std::size_t i = 0; i < s.phi.size(); ++i) {
    const double x = d.mesh.node_coords[i] - 100.0;
    s.phi[i] = 0.6 * std::exp(-x * x / 4.0);
    s.theta[i] = 300.0 + 40.0 * std::exp(-x * x / 50.0);
  }
  for (double ice : {0.0, 0.00635}) {
    s.voltage = solve_voltage(d, props, s, -1650.0, ice);
    for (double j : element_current(d, props, s, ice)) CHECK(std::abs(j - 1650.0) <= 1e-8 * 1650.0);
  }
  // Homogeneous resistance check.
  const Discretization u = uniform_bar();
  FieldState h = fresh(u, props.reference_temp);
  const auto v = solve_voltage(u, props, h, 1500.0);
  CHECK(v.back() == doctest::Approx(1500.0 * kSpan / (props.electrical_conductivity * kArea)).epsilon(1e-12));
}

TEST_CASE("uniform convective steady state obeys the lumped energy balance") {
  const Discretization d = uniform_bar();
  const MaterialProperties props;
  FieldState s = fresh(d, 300.0);
  const double current = 1500.0;
  s.voltage = solve_voltage(d, props, s, current);
  HeatExchangeSpec spec;
  spec.ambient_temp = 300.0;
  spec.fixed_h = 12.0;
  const auto theta = solve_temperature(d, props, s, spec);
  const double sigma = degraded_conductivity(0.0, 300.0, props);
  const double joule = current * current / (sigma * kArea);  // W/m
  const double exact = 300.0 + joule / (12.0 * std::numbers::pi * kDiameter);
  for (double t : theta) CHECK(std::abs(t - exact) <= 1e-6 * exact);
}

TEST_CASE("notched line balances Joule heat and convection globally") {
  const Discretization d = notched_bar(1.25);
  const MaterialProperties props;
  FieldState s = fresh(d, 290.0);
  s.voltage = solve_voltage(d, props, s, 1650.0);
  HeatExchangeSpec spec;
  spec.ambient_temp = 290.0;
  spec.wind_speed = 5.0;
  const auto theta = solve_temperature(d, props, s, spec);
  const EnergyBalance b = energy_balance(d, props, s, theta, spec);
  CHECK(b.convective == doctest::Approx(b.joule).epsilon(1e-6));
  CHECK(theta[500] > theta[0]);
}

TEST_CASE("radiative and ice exchange shift the line temperature") {
  const Discretization d = uniform_bar(200);
  const MaterialProperties props;
  FieldState s = fresh(d, 295.0);
  s.voltage = solve_voltage(d, props, s, 1500.0);
  HeatExchangeSpec spec;
  spec.ambient_temp = 295.0;
  spec.wind_speed = 3.0;
  const double plain = solve_temperature(d, props, s, spec)[100];
  spec.mode = HeatExchangeMode::convective_plus_fire;
  const double fire = solve_temperature(d, props, s, spec)[100];
  CHECK(fire > plain + 10.0);
  spec.mode = HeatExchangeMode::ice_covered;
  spec.ice_thickness = 0.00635;
  spec.ice_temp = 265.0;
  const double iced = solve_temperature(d, props, s, spec)[100];
  CHECK(iced < plain);
  spec.ice_thickness = 0.0;
  CHECK_THROWS_AS(solve_temperature(d, props, s, spec), ValidationError);
}

TEST_CASE("convective coefficient follows the Nusselt bands") {
  const AirProperties air;
  const double dia = 0.04;
  struct Band {
    double re, c, m;
  };
  for (const Band b : {Band{2.0, 0.989, 0.330}, Band{20.0, 0.911, 0.385}, Band{1000.0, 0.683, 0.466},
                       Band{2e4, 0.193, 0.618}, Band{1e5, 0.027, 0.805}}) {
    const double v = b.re * air.kinematic_viscosity / dia;
    const double expected = b.c * std::pow(b.re, b.m) * std::cbrt(air.prandtl) * air.thermal_conductivity / dia;
    CHECK(convective_coefficient(v, dia, air, 0.0) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(convective_coefficient(0.0, dia, air, 2.0) == 2.0);
  CHECK(convective_coefficient(1e-6, dia, air, 2.0) == 2.0);
}

TEST_CASE("conductivity degrades with damage and temperature") {
  const MaterialProperties p;
  CHECK(degraded_conductivity(0.0, p.reference_temp, p) == doctest::Approx(p.electrical_conductivity));
  CHECK(degraded_conductivity(0.5, p.reference_temp, p) == doctest::Approx(0.25 * p.electrical_conductivity));
  CHECK(degraded_conductivity(0.0, p.reference_temp + 100.0, p) ==
        doctest::Approx(p.electrical_conductivity / (1.0 + 100.0 * p.resistivity_temp_coeff)));
  CHECK_THROWS_AS(degraded_conductivity(0.0, p.reference_temp - 1.0 / p.resistivity_temp_coeff - 1.0, p),
                  DomainError);
  const double r1 = std::sqrt(kArea / std::numbers::pi), r2 = r1 + 0.01;
  CHECK(parallel_conductance(3e7, kArea, 0.01, p) ==
        doctest::Approx(3e7 * kArea + std::numbers::pi * (r2 * r2 - r1 * r1) / p.ice.resistivity));
}

TEST_CASE("mesh and discretization bookkeeping") {
  const Discretization d = notched_bar(1.25, 10);
  CHECK(d.mesh.n_nodes() == 11);
  CHECK(d.mesh.midspan_node() == 5);
  double mass = 0.0, area = 0.0;
  for (double m : d.lumped_mass) mass += m;
  for (double a : d.element_area) area += a;
  CHECK(mass == doctest::Approx(area).epsilon(1e-14));
  CHECK_THROWS_AS(Mesh(200.0, 1), ValidationError);
}
