#include "tline/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "tline/errors.hpp"

namespace tline {

namespace {

struct NusseltBand {
  double upper;
  double c;
  double m;
};

constexpr std::array<NusseltBand, 5> kNusselt{{
    {4.0, 0.989, 0.330},
    {40.0, 0.911, 0.385},
    {4000.0, 0.683, 0.466},
    {40000.0, 0.193, 0.618},
    {400000.0, 0.027, 0.805},
}};

// Per-thread scratch space so the time loop does not allocate.
struct Workspace {
  std::vector<double> lower, diag, rhs, cond, c, s;
};

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

double interp(const Discretization& disc, std::span<const double> f, std::size_t e, int g) {
  return f[e] * disc.n1[g] + f[e + 1] * disc.n2[g];
}

double sigma_at(const Discretization& disc, const MaterialProperties& props, const FieldState& s, std::size_t e,
                int g) {
  return degraded_conductivity(interp(disc, s.phi, e, g), interp(disc, s.theta, e, g), props);
}

// sigma_E A (plus the ice shell in parallel) at every Gauss point.
void conductance_q(const Discretization& disc, const MaterialProperties& props, const FieldState& s,
                   double ice_thickness, std::vector<double>& out) {
  const std::size_t ne = static_cast<std::size_t>(disc.mesh.n_elements);
  out.resize(2 * ne);
  const double alpha = props.resistivity_temp_coeff;
  const double theta0 = props.reference_temp;
  const double sigma0 = props.electrical_conductivity;
  const double a0 = disc.n1[0], b0 = disc.n2[0];
  const double* phi = s.phi.data();
  const double* th = s.theta.data();
  const double* area = disc.area_q.data();
  double* o = out.data();
  double min_denom = 1.0;
  for (std::size_t e = 0; e < ne; ++e) {
    // Point 1 uses the mirrored shape-function weights of point 0.
    const double p0 = a0 * phi[e] + b0 * phi[e + 1];
    const double p1 = b0 * phi[e] + a0 * phi[e + 1];
    const double den0 = 1.0 + alpha * (a0 * th[e] + b0 * th[e + 1] - theta0);
    const double den1 = 1.0 + alpha * (b0 * th[e] + a0 * th[e + 1] - theta0);
    min_denom = std::min(min_denom, std::min(den0, den1));
    const double r = sigma0 / (den0 * den1);
    o[2 * e] = (1.0 - p0) * (1.0 - p0) * area[2 * e] * den1 * r;
    o[2 * e + 1] = (1.0 - p1) * (1.0 - p1) * area[2 * e + 1] * den0 * r;
  }
  if (!(min_denom > 0.0)) throw DomainError("resistivity factor 1 + alpha (theta - theta0) is not positive");
  if (ice_thickness > 0.0) {
    for (std::size_t q = 0; q < out.size(); ++q) {
      out[q] = parallel_conductance(out[q] / disc.area_q[q], disc.area_q[q], ice_thickness, props);
    }
  }
}

void solve_in_place(std::vector<double>& off, std::vector<double>& diag, std::vector<double>& rhs,
                    const char* what) {
  try {
    solve_tridiagonal(off, diag, off, rhs);
  } catch (const SolverError& err) {
    throw SolverError(std::string(what) + ": " + err.what());
  }
}

}  // namespace

Mesh::Mesh(double len, int n) : length(len), n_elements(n) {
  if (!(len > 0.0)) throw ValidationError("mesh length must be positive", "span");
  if (n < 2) throw ValidationError("mesh needs at least 2 elements", "n_elements");
  node_coords.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) node_coords[static_cast<std::size_t>(i)] = len * i / n;
}

Discretization::Discretization(const Mesh& m, const AreaProfile& a) : mesh(m), area(a) {
  const std::size_t ne = static_cast<std::size_t>(mesh.n_elements);
  const double h = mesh.element_size();
  quad_weight = 0.5 * h;
  const double gp = 1.0 / std::sqrt(3.0);
  n1 = {0.5 * (1.0 + gp), 0.5 * (1.0 - gp)};
  n2 = {0.5 * (1.0 - gp), 0.5 * (1.0 + gp)};
  nominal_diameter = std::sqrt(4.0 * area.nominal_area() / std::numbers::pi);

  xq.resize(2 * ne);
  area_q.resize(2 * ne);
  diameter_q.resize(2 * ne);
  surface_q.resize(2 * ne);
  notched_q.resize(2 * ne);
  lumped_mass.assign(ne + 1, 0.0);
  element_area.assign(ne, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    const double xm = 0.5 * (mesh.node_coords[e] + mesh.node_coords[e + 1]);
    for (int g = 0; g < 2; ++g) {
      const std::size_t q = 2 * e + static_cast<std::size_t>(g);
      xq[q] = xm + (g == 0 ? -gp : gp) * 0.5 * h;
      area_q[q] = area(xq[q]);
      diameter_q[q] = std::sqrt(4.0 * area_q[q] / std::numbers::pi);
      surface_q[q] = std::numbers::pi * diameter_q[q];
      notched_q[q] = area_q[q] != area.nominal_area();
      for (std::size_t b = 0; b < kNusselt.size(); ++b) {
        diameter_pow[b].push_back(std::pow(diameter_q[q], kNusselt[b].m - 1.0));
      }
      const double wa = quad_weight * area_q[q];
      element_area[e] += wa;
      lumped_mass[e] += wa * n1[g];
      lumped_mass[e + 1] += wa * n2[g];
    }
  }
  inv_lumped_mass.resize(ne + 1);
  for (std::size_t i = 0; i <= ne; ++i) inv_lumped_mass[i] = 1.0 / lumped_mass[i];
}

FieldState::FieldState(std::size_t n, double initial_temp)
    : u(n, 0.0), phi(n, 0.0), fatigue(n, 0.0), history(n, 0.0), theta(n, initial_temp), voltage(n, 0.0) {}

void TridiagonalLU::factor(std::span<const double> lower, std::span<const double> diag,
                           std::span<const double> upper) {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() + 1 != n || upper.size() + 1 != n) {
    throw ValidationError("tridiagonal system sizes disagree", "system");
  }
  const auto pivot = [](double d, std::size_t row) {
    if (!(d != 0.0) || !std::isfinite(d)) {
      throw SolverError("tridiagonal solve: zero pivot at row " + std::to_string(row));
    }
    return 1.0 / d;
  };
  inv_.resize(n);
  coef_.resize(n);
  gain_.resize(n);
  if (n < 3) {
    // Solved directly from the stored matrix and its inverse determinant.
    coef_.assign(diag.begin(), diag.end());
    gain_[0] = n == 2 ? lower[0] : 0.0;
    if (n == 2) gain_[1] = upper[0];
    inv_[0] = n == 1 ? pivot(diag[0], 0) : pivot(diag[0] * diag[1] - upper[0] * lower[0], 1);
    return;
  }
  // Both ends eliminate towards row p. Above p: y_i = r_i inv_i - g_i y_{i-1}
  // and x_i = y_i - c_i x_{i+1}; below p the mirror image.
  const std::size_t p = n / 2;
  inv_[0] = pivot(diag[0], 0);
  coef_[0] = upper[0] * inv_[0];
  gain_[0] = 0.0;
  inv_[n - 1] = pivot(diag[n - 1], n - 1);
  coef_[n - 1] = lower[n - 2] * inv_[n - 1];
  gain_[n - 1] = 0.0;
  for (std::size_t i = 1; i < p; ++i) {
    inv_[i] = pivot(diag[i] - lower[i - 1] * coef_[i - 1], i);
    coef_[i] = upper[i] * inv_[i];
    gain_[i] = lower[i - 1] * inv_[i];
  }
  for (std::size_t j = n - 2; j > p; --j) {
    inv_[j] = pivot(diag[j] - upper[j] * coef_[j + 1], j);
    coef_[j] = lower[j - 1] * inv_[j];
    gain_[j] = upper[j] * inv_[j];
  }
  inv_[p] = pivot(diag[p] - lower[p - 1] * coef_[p - 1] - upper[p] * coef_[p + 1], p);
  mid_lower_ = lower[p - 1];
  mid_upper_ = upper[p];
}

void TridiagonalLU::solve(std::span<double> rhs) const {
  const std::size_t n = inv_.size();
  if (n == 0 || rhs.size() != n) throw ValidationError("right-hand side size disagrees with the factors", "system");
  const double* inv = inv_.data();
  const double* c = coef_.data();
  const double* g = gain_.data();
  double* r = rhs.data();
  if (n < 3) {
    if (n == 2) {
      const double x0 = (r[0] * c[1] - g[1] * r[1]) * inv[0];
      r[1] = (c[0] * r[1] - g[0] * r[0]) * inv[0];
      r[0] = x0;
    } else {
      r[0] *= inv[0];
    }
  } else {
    const std::size_t p = n / 2;
    r[0] *= inv[0];
    r[n - 1] *= inv[n - 1];
    std::size_t i = 1;
    std::size_t j = n - 2;
    for (; i < p && j > p; ++i, --j) {
      r[i] = r[i] * inv[i] - g[i] * r[i - 1];
      r[j] = r[j] * inv[j] - g[j] * r[j + 1];
    }
    for (; i < p; ++i) r[i] = r[i] * inv[i] - g[i] * r[i - 1];
    for (; j > p; --j) r[j] = r[j] * inv[j] - g[j] * r[j + 1];
    r[p] = (r[p] - mid_lower_ * r[p - 1] - mid_upper_ * r[p + 1]) * inv[p];
    i = p;
    j = p;
    while (i > 0 && j + 1 < n) {
      --i;
      ++j;
      r[i] -= c[i] * r[i + 1];
      r[j] -= c[j] * r[j - 1];
    }
    while (i > 0) {
      --i;
      r[i] -= c[i] * r[i + 1];
    }
    while (j + 1 < n) {
      ++j;
      r[j] -= c[j] * r[j - 1];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(r[k])) throw SolverError("tridiagonal solve produced a non-finite value");
  }
}

void solve_tridiagonal(std::span<const double> lower, std::span<double> diag, std::span<const double> upper,
                       std::span<double> rhs) {
  const std::size_t n = diag.size();
  if (n == 0 || rhs.size() != n || lower.size() + 1 != n || upper.size() + 1 != n) {
    throw ValidationError("tridiagonal system sizes disagree", "system");
  }
  const auto pivot = [](double d, std::size_t row) {
    if (!(d != 0.0)) throw SolverError("tridiagonal solve: zero pivot at row " + std::to_string(row));
    return 1.0 / d;
  };
  if (n < 3) {
    if (n == 2) {
      const double det = diag[0] * diag[1] - upper[0] * lower[0];
      const double inv = pivot(det, 1);
      const double x0 = (rhs[0] * diag[1] - upper[0] * rhs[1]) * inv;
      rhs[1] = (diag[0] * rhs[1] - lower[0] * rhs[0]) * inv;
      rhs[0] = x0;
    } else {
      rhs[0] *= pivot(diag[0], 0);
    }
    for (double v : rhs) {
      if (!std::isfinite(v)) throw SolverError("tridiagonal solve produced a non-finite value");
    }
    return;
  }
  // Eliminate from both ends towards row p so the two division chains overlap.
  // Afterwards diag holds c'_i above p (x_i = d'_i - c'_i x_{i+1}) and a'_i
  // below p (x_i = e'_i - a'_i x_{i-1}).
  const std::size_t p = n / 2;
  double inv_top = pivot(diag[0], 0);
  diag[0] = upper[0] * inv_top;
  rhs[0] *= inv_top;
  double inv_bot = pivot(diag[n - 1], n - 1);
  diag[n - 1] = lower[n - 2] * inv_bot;
  rhs[n - 1] *= inv_bot;
  const auto top = [&](std::size_t i) {
    inv_top = pivot(diag[i] - lower[i - 1] * diag[i - 1], i);
    diag[i] = upper[i] * inv_top;
    rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) * inv_top;
  };
  const auto bottom = [&](std::size_t j) {
    inv_bot = pivot(diag[j] - upper[j] * diag[j + 1], j);
    diag[j] = lower[j - 1] * inv_bot;
    rhs[j] = (rhs[j] - upper[j] * rhs[j + 1]) * inv_bot;
  };
  // Rows 1..p-1 from the top, rows n-2..p+1 from the bottom.
  const std::size_t n_top = p - 1;
  const std::size_t n_bot = n - 2 - p;
  const std::size_t both = std::min(n_top, n_bot);
  for (std::size_t k = 1; k <= both; ++k) {
    top(k);
    bottom(n - 1 - k);
  }
  for (std::size_t k = both + 1; k <= n_top; ++k) top(k);
  for (std::size_t k = both + 1; k <= n_bot; ++k) bottom(n - 1 - k);
  double den = diag[p];
  double num = rhs[p];
  if (p > 0) {
    den -= lower[p - 1] * diag[p - 1];
    num -= lower[p - 1] * rhs[p - 1];
  }
  if (p + 1 < n) {
    den -= upper[p] * diag[p + 1];
    num -= upper[p] * rhs[p + 1];
  }
  rhs[p] = num * pivot(den, p);
  double check = rhs[p];
  const std::size_t up_rows = p;
  const std::size_t down_rows = n - 1 - p;
  const std::size_t sweep = std::min(up_rows, down_rows);
  for (std::size_t k = 1; k <= sweep; ++k) {
    rhs[p - k] -= diag[p - k] * rhs[p - k + 1];
    rhs[p + k] -= diag[p + k] * rhs[p + k - 1];
    check += rhs[p - k] + rhs[p + k];
  }
  for (std::size_t k = sweep + 1; k <= up_rows; ++k) {
    rhs[p - k] -= diag[p - k] * rhs[p - k + 1];
    check += rhs[p - k];
  }
  for (std::size_t k = sweep + 1; k <= down_rows; ++k) {
    rhs[p + k] -= diag[p + k] * rhs[p + k - 1];
    check += rhs[p + k];
  }
  if (!std::isfinite(check)) throw SolverError("tridiagonal solve produced a non-finite value");
}

double convective_coefficient(double wind_speed, double diameter, const AirProperties& air, double h_min) {
  if (!(wind_speed > 0.0)) return h_min;
  const double re = wind_speed * diameter / air.kinematic_viscosity;
  const NusseltBand* band = &kNusselt.back();
  for (const auto& b : kNusselt) {
    if (re < b.upper) {
      band = &b;
      break;
    }
  }
  const double nu = band->c * std::pow(re, band->m) * std::cbrt(air.prandtl);
  return std::max(h_min, nu * air.thermal_conductivity / diameter);
}

double degraded_conductivity(double phi, double theta, const MaterialProperties& props) {
  const double denom = 1.0 + props.resistivity_temp_coeff * (theta - props.reference_temp);
  if (!(denom > 0.0)) throw DomainError("resistivity factor 1 + alpha (theta - theta0) is not positive");
  const double d = 1.0 - phi;
  return d * d * props.electrical_conductivity / denom;
}

double parallel_conductance(double sigma, double area, double ice_thickness, const MaterialProperties& props) {
  if (ice_thickness <= 0.0) return sigma * area;
  const double r1 = std::sqrt(area / std::numbers::pi);
  const double r2 = r1 + ice_thickness;
  const double ice_area = std::numbers::pi * (r2 * r2 - r1 * r1);
  return sigma * area + ice_area / props.ice.resistivity;
}

void solve_displacement(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                        double tension, std::vector<double>& out) {
  const std::size_t ne = static_cast<std::size_t>(disc.mesh.n_elements);
  const double h = disc.mesh.element_size();
  const double a0 = disc.n1[0], b0 = disc.n2[0];
  const double ky = disc.quad_weight * props.young_modulus / (h * h);
  const double gterm = props.damage_layer_width * props.fracture_energy / (h * h * h);
  const double* phi = state.phi.data();
  const double* area = disc.area_q.data();
  out.resize(ne + 1);
  double* u = out.data();
  // Pinned bar: the force in element e balances every load beyond it. The
  // gradient-coupling load of element e enters as -f_e at node e and +f_e at
  // node e+1, so that sum telescopes to tension + f_e.
  u[0] = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    const double d0 = 1.0 - (a0 * phi[e] + b0 * phi[e + 1]);
    const double d1 = 1.0 - (b0 * phi[e] + a0 * phi[e + 1]);
    const double k = ky * (d0 * d0 * area[2 * e] + d1 * d1 * area[2 * e + 1]);
    if (!(k > 0.0)) {
      throw SolverError("displacement: singular operator, element " + std::to_string(e) + " has no stiffness left");
    }
    const double dphi = phi[e + 1] - phi[e];
    const double force = tension + gterm * disc.element_area[e] * dphi * dphi;
    u[e + 1] = u[e] + force / k;
  }
  if (!std::isfinite(u[ne])) throw SolverError("displacement: non-finite solution");
}

std::vector<double> solve_displacement(const Discretization& disc, const MaterialProperties& props,
                                       const FieldState& state, double tension) {
  std::vector<double> out;
  solve_displacement(disc, props, state, tension, out);
  return out;
}

std::vector<double> element_strain(const Discretization& disc, std::span<const double> u) {
  const std::size_t ne = static_cast<std::size_t>(disc.mesh.n_elements);
  const double h = disc.mesh.element_size();
  std::vector<double> eps(ne);
  for (std::size_t e = 0; e < ne; ++e) eps[e] = (u[e + 1] - u[e]) / h;
  return eps;
}

void update_history(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                    std::vector<double>& out) {
  const std::size_t ne = static_cast<std::size_t>(disc.mesh.n_elements);
  const double inv_h = 1.0 / disc.mesh.element_size();
  const double y = props.young_modulus;
  const double* u = state.u.data();
  if (&out != &state.history) out = state.history;
  double* hist = out.data();
  double prev = 0.0;  // eps^2 of the element left of the node
  for (std::size_t i = 0; i <= ne; ++i) {
    double psi = prev;
    if (i < ne) {
      const double eps = (u[i + 1] - u[i]) * inv_h;
      const double cur = eps * eps;
      psi = i == 0 ? cur : 0.5 * (prev + cur);
      prev = cur;
    }
    hist[i] = std::max(hist[i], y * psi);
  }
}

std::vector<double> update_history(const Discretization& disc, const MaterialProperties& props,
                                   const FieldState& state) {
  std::vector<double> out;
  update_history(disc, props, state, out);
  return out;
}

void DamageOperator::solve(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                           std::vector<double>& out) {
  const std::size_t ne = static_cast<std::size_t>(disc.mesh.n_elements);
  const double gam = props.damage_layer_width;
  const double gc = props.fracture_energy;
  const double inv_gam = 1.0 / gam;
  const double* hist = state.history.data();
  const double* mass = disc.lumped_mass.data();
  const bool stale = disc_ != &disc || gamma_ != gam || gc_ != gc || history_ != state.history;
  if (stale) {
    const double h = disc.mesh.element_size();
    const double scale = gam * gc / (h * h);
    Workspace& ws = workspace();
    ws.lower.resize(ne);
    ws.diag.resize(ne + 1);
    // Reaction terms are row-sum lumped so the operator stays an M-matrix.
    double left = 0.0;
    for (std::size_t i = 0; i <= ne; ++i) {
      const double k = i < ne ? scale * disc.element_area[i] : 0.0;
      if (i < ne) ws.lower[i] = -k;
      ws.diag[i] = left + k + mass[i] * (hist[i] + gc * inv_gam);
      left = k;
    }
    try {
      lu_.factor(ws.lower, ws.diag, ws.lower);
    } catch (const SolverError& err) {
      disc_ = nullptr;
      throw SolverError(std::string("damage: ") + err.what());
    }
    disc_ = &disc;
    gamma_ = gam;
    gc_ = gc;
    history_ = state.history;
  }
  const double* fat = state.fatigue.data();
  out.resize(ne + 1);
  for (std::size_t i = 0; i <= ne; ++i) out[i] = mass[i] * (hist[i] + fat[i] * inv_gam);
  try {
    lu_.solve(out);
  } catch (const SolverError& err) {
    throw SolverError(std::string("damage: ") + err.what());
  }
  for (double& p : out) p = std::clamp(p, 0.0, 1.0);
}

void solve_damage(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                  std::vector<double>& out) {
  DamageOperator op;
  op.solve(disc, props, state, out);
}

std::vector<double> solve_damage(const Discretization& disc, const MaterialProperties& props,
                                 const FieldState& state) {
  std::vector<double> out;
  solve_damage(disc, props, state, out);
  return out;
}

void step_fatigue(const Discretization& disc, const MaterialProperties& props, const FieldState& state, double dt,
                  std::vector<double>& out) {
  const std::size_t ne = static_cast<std::size_t>(disc.mesh.n_elements);
  const double inv_h = 1.0 / disc.mesh.element_size();
  const double a0 = disc.n1[0], b0 = disc.n2[0];
  const double coef = props.density * props.aging_coeff * props.young_modulus / props.damage_layer_width *
                      disc.quad_weight / props.reference_temp;
  const double* u = state.u.data();
  const double* phi = state.phi.data();
  const double* th = state.theta.data();
  const double* area = disc.area_q.data();
  const double* inv_mass = disc.inv_lumped_mass.data();
  if (&out != &state.fatigue) out = state.fatigue;
  double* f = out.data();
  double carry = 0.0;  // contribution of the element left of the node
  for (std::size_t e = 0; e < ne; ++e) {
    const double eps = std::abs(u[e + 1] - u[e]) * inv_h;
    const double p0 = a0 * phi[e] + b0 * phi[e + 1];
    const double p1 = b0 * phi[e] + a0 * phi[e + 1];
    const double t0 = a0 * th[e] + b0 * th[e + 1];
    const double t1 = b0 * th[e] + a0 * th[e + 1];
    const double r0 = coef * eps * (1.0 - p0) * p0 * t0 * area[2 * e];
    const double r1 = coef * eps * (1.0 - p1) * p1 * t1 * area[2 * e + 1];
    f[e] += dt * (carry + r0 * a0 + r1 * b0) * inv_mass[e];
    carry = r0 * b0 + r1 * a0;
  }
  f[ne] += dt * carry * inv_mass[ne];
}

std::vector<double> step_fatigue(const Discretization& disc, const MaterialProperties& props,
                                 const FieldState& state, double dt) {
  std::vector<double> out;
  step_fatigue(disc, props, state, dt, out);
  return out;
}

namespace {

// Robin coefficient c_q (W/(m K) per unit length) and the fixed source s_q
// (W/m) at each Gauss point for the chosen exchange mode.
void exchange_terms(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                    const HeatExchangeSpec& spec, std::vector<double>& c, std::vector<double>& s) {
  const std::size_t nq = disc.xq.size();
  c.resize(nq);
  s.resize(nq);
  if (spec.mode == HeatExchangeMode::ice_covered) {
    if (!(spec.ice_thickness > 0.0)) {
      throw ValidationError("ice-covered exchange needs an outer radius above the conductor radius",
                            "thickness");
    }
    const double t = spec.ice_thickness;
    const double latent_per_len =
        props.ice.density * std::numbers::pi * props.ice.latent_heat * t / spec.melt_duration;
    const auto ring = [&](double diameter) {
      const double r1 = 0.5 * diameter;
      return 2.0 * std::numbers::pi * props.ice.thermal_conductivity / std::log((r1 + t) / r1);
    };
    const double c_nominal = ring(disc.nominal_diameter);
    for (std::size_t q = 0; q < nq; ++q) {
      c[q] = disc.notched_q[q] ? ring(disc.diameter_q[q]) : c_nominal;
      s[q] = c[q] * spec.ice_temp;
      const std::size_t e = q / 2;
      const int g = static_cast<int>(q % 2);
      if (interp(disc, state.theta, e, g) > kFreezingPoint) s[q] -= latent_per_len * (disc.diameter_q[q] + t);
    }
    return;
  }
  double fire_flux = 0.0;
  if (spec.mode == HeatExchangeMode::convective_plus_fire) {
    const double tf = spec.fire.flame_temp;
    fire_flux = spec.fire.emissivity * kStefanBoltzmann * tf * tf * tf * tf * spec.fire.view_factor *
                spec.fire.transmissivity;
  }
  // h = C (v/nu)^m Pr^(1/3) k_air D^(m-1); the D powers are tabulated per band.
  std::array<double, kNusselt.size()> band_factor{};
  const bool correlate = !spec.fixed_h && spec.wind_speed > 0.0;
  if (correlate) {
    const double pr = std::cbrt(props.air.prandtl);
    for (std::size_t b = 0; b < kNusselt.size(); ++b) {
      band_factor[b] = kNusselt[b].c * std::pow(spec.wind_speed / props.air.kinematic_viscosity, kNusselt[b].m) *
                       pr * props.air.thermal_conductivity;
    }
  }
  const auto h_at = [&](std::size_t q) {
    const double re = spec.wind_speed * disc.diameter_q[q] / props.air.kinematic_viscosity;
    std::size_t b = 0;
    while (b + 1 < kNusselt.size() && re >= kNusselt[b].upper) ++b;
    return std::max(spec.h_min, band_factor[b] * disc.diameter_pow[b][q]);
  };
  double h_nominal = spec.fixed_h ? *spec.fixed_h : spec.h_min;
  std::size_t first_plain = nq;
  for (std::size_t q = 0; q < nq && correlate; ++q) {
    if (!disc.notched_q[q]) {
      first_plain = q;
      break;
    }
  }
  if (correlate && first_plain < nq) h_nominal = h_at(first_plain);
  for (std::size_t q = 0; q < nq; ++q) {
    double h = h_nominal;
    if (correlate && disc.notched_q[q]) h = h_at(q);
    c[q] = h * disc.surface_q[q];
    s[q] = c[q] * spec.ambient_temp + fire_flux * disc.surface_q[q];
  }
}

}  // namespace

void solve_temperature(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                       const HeatExchangeSpec& spec, std::vector<double>& out) {
  const std::size_t ne = static_cast<std::size_t>(disc.mesh.n_elements);
  const double h = disc.mesh.element_size();
  const double w = disc.quad_weight;
  const double ice_t = spec.mode == HeatExchangeMode::ice_covered ? spec.ice_thickness : 0.0;
  Workspace& ws = workspace();
  exchange_terms(disc, props, state, spec, ws.c, ws.s);
  conductance_q(disc, props, state, ice_t, ws.cond);
  ws.lower.resize(ne);
  ws.diag.resize(ne + 1);
  ws.rhs.resize(ne + 1);

  const double a0 = disc.n1[0], b0 = disc.n2[0];
  const double n11 = w * a0 * a0, n12 = w * a0 * b0, n22 = w * b0 * b0;
  const double kscale = props.thermal_conductivity / (h * h);
  const double inv_h = 1.0 / h;
  const double* c = ws.c.data();
  const double* src = ws.s.data();
  const double* cond = ws.cond.data();
  const double* v = state.voltage.data();
  double* lower = ws.lower.data();
  double* diag = ws.diag.data();
  double* rhs = ws.rhs.data();
  diag[0] = 0.0;
  rhs[0] = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    const double dv = (v[e + 1] - v[e]) * inv_h;
    const std::size_t q0 = 2 * e;
    const std::size_t q1 = q0 + 1;
    // Gauss point 1 mirrors point 0, so N1 N1 at one equals N2 N2 at the other.
    const double kd = kscale * disc.element_area[e];
    const double s0 = w * (cond[q0] * dv * dv + src[q0]);
    const double s1 = w * (cond[q1] * dv * dv + src[q1]);
    rhs[e] += s0 * a0 + s1 * b0;
    rhs[e + 1] = s0 * b0 + s1 * a0;
    diag[e] += kd + n11 * c[q0] + n22 * c[q1];
    diag[e + 1] = kd + n22 * c[q0] + n11 * c[q1];
    lower[e] = -kd + n12 * (c[q0] + c[q1]);
  }
  solve_in_place(ws.lower, ws.diag, ws.rhs, "temperature");
  out.assign(ws.rhs.begin(), ws.rhs.end());
}

std::vector<double> solve_temperature(const Discretization& disc, const MaterialProperties& props,
                                      const FieldState& state, const HeatExchangeSpec& spec) {
  std::vector<double> out;
  solve_temperature(disc, props, state, spec, out);
  return out;
}

void solve_voltage(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                   double current, double ice_thickness, std::vector<double>& out) {
  const std::size_t ne = static_cast<std::size_t>(disc.mesh.n_elements);
  const double h = disc.mesh.element_size();
  const double kscale = disc.quad_weight / (h * h);
  Workspace& ws = workspace();
  conductance_q(disc, props, state, ice_thickness, ws.cond);
  // Pinned bar with the whole current injected at the free end.
  const double load = std::abs(current);
  out.resize(ne + 1);
  out[0] = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    const double k = kscale * (ws.cond[2 * e] + ws.cond[2 * e + 1]);
    if (!(k > 0.0)) {
      throw SolverError("voltage: singular operator, element " + std::to_string(e) + " has no conductance left");
    }
    out[e + 1] = out[e] + load / k;
  }
  if (!std::isfinite(out[ne])) throw SolverError("voltage: non-finite solution");
}

std::vector<double> solve_voltage(const Discretization& disc, const MaterialProperties& props,
                                  const FieldState& state, double current, double ice_thickness) {
  std::vector<double> out;
  solve_voltage(disc, props, state, current, ice_thickness, out);
  return out;
}

std::vector<double> element_current(const Discretization& disc, const MaterialProperties& props,
                                    const FieldState& state, double ice_thickness) {
  const std::size_t ne = static_cast<std::size_t>(disc.mesh.n_elements);
  const double h = disc.mesh.element_size();
  const double w = disc.quad_weight;
  std::vector<double> out(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    double k = 0.0;
    for (int g = 0; g < 2; ++g) {
      const std::size_t q = 2 * e + static_cast<std::size_t>(g);
      k += w * parallel_conductance(sigma_at(disc, props, state, e, g), disc.area_q[q], ice_thickness, props);
    }
    out[e] = k / h * (state.voltage[e + 1] - state.voltage[e]) / h;
  }
  return out;
}

EnergyBalance energy_balance(const Discretization& disc, const MaterialProperties& props, const FieldState& state,
                             std::span<const double> theta, const HeatExchangeSpec& spec) {
  const std::size_t ne = static_cast<std::size_t>(disc.mesh.n_elements);
  const double h = disc.mesh.element_size();
  const double w = disc.quad_weight;
  std::vector<double> c, s;
  exchange_terms(disc, props, state, spec, c, s);
  EnergyBalance out;
  for (std::size_t e = 0; e < ne; ++e) {
    const double dv = (state.voltage[e + 1] - state.voltage[e]) / h;
    for (int g = 0; g < 2; ++g) {
      const std::size_t q = 2 * e + static_cast<std::size_t>(g);
      out.joule += w * sigma_at(disc, props, state, e, g) * disc.area_q[q] * dv * dv;
      out.convective += w * c[q] * (interp(disc, theta, e, g) - spec.ambient_temp);
    }
  }
  return out;
}

}  // namespace tline
