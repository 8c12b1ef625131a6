#pragma once

// Periodic loading signals: monthly weather reconstructed by a real DFT,
// the parameterized current demand, and the notched cross-section profile.

#include <array>
#include <filesystem>
#include <span>
#include <vector>

namespace tline {

enum class QuantityKind { wind, temperature };

/// Twelve monthly averages, January first. Wind in ft/s, temperature in K.
struct MonthlySeries {
  std::array<double, 12> values{};
  QuantityKind kind = QuantityKind::wind;
};

/// Throws ValidationError unless every value is finite and strictly positive.
void validate(const MonthlySeries& series);

/// Truncated Fourier series A0 + sum_n [A_n cos(2 pi n t/T) + B_n sin(2 pi n t/T)].
struct FourierLoading {
  double mean = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;
  double period = 1.0;  // years
};

/// Real DFT of an even-length sample sequence taken at t_k = k T / N.
/// Harmonics n = 1..N/2; the Nyquist cosine is half-weighted and its sine
/// is zero, so the series passes through every sample.
FourierLoading dft_coefficients(std::span<const double> samples, double period = 1.0);
FourierLoading dft_coefficients(const MonthlySeries& samples, double period = 1.0);

double evaluate_loading(const FourierLoading& loading, double t);

/// Time of the k-th input sample (k = 0 is January).
inline double sample_instant(const FourierLoading& loading, std::size_t k) {
  return loading.period * static_cast<double>(k) / static_cast<double>(2 * loading.cos_coeffs.size());
}

/// Reads a two-column text file (month index, value). Blank lines and lines
/// starting with '#' are skipped. Anything other than exactly 12 rows is rejected.
MonthlySeries load_monthly_file(const std::filesystem::path& path, QuantityKind kind);

struct CurrentDemand {
  double base = 1500.0;     // A
  double amplitude = 0.0;   // A
};

/// Signed demand -I_b - I_a sin(4 pi t), t in years. Consumers take |I|.
double current_demand(const CurrentDemand& demand, double t);

/// Cross-section with a Gaussian notch at midspan:
///   A(x) = A0 (1 - exp(-(x - L/2)^2 / (2 s^2)) / (s sqrt(2 pi)))
/// where s is the spread-to-depth ratio. Requires s > 1/sqrt(2 pi).
class AreaProfile {
 public:
  AreaProfile(double nominal_area, double spread_depth_ratio, double span);

  double nominal_area() const noexcept { return nominal_area_; }
  double spread_depth_ratio() const noexcept { return spread_; }
  double span() const noexcept { return span_; }

  double operator()(double x) const;

 private:
  double nominal_area_;
  double spread_;
  double span_;
};

double area_at(const AreaProfile& profile, double x);

}  // namespace tline
