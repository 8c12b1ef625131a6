#include "tline/loading.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "tline/errors.hpp"

namespace tline {

void validate(const MonthlySeries& series) {
  const char* what = series.kind == QuantityKind::wind ? "wind" : "temperature";
  for (std::size_t k = 0; k < series.values.size(); ++k) {
    const double v = series.values[k];
    if (!std::isfinite(v)) {
      throw ValidationError(std::string(what) + " sample " + std::to_string(k + 1) + " is not finite", what);
    }
    if (v <= 0.0) {
      throw ValidationError(std::string(what) + " sample " + std::to_string(k + 1) + " must be positive", what);
    }
  }
}

FourierLoading dft_coefficients(std::span<const double> samples, double period) {
  const std::size_t n_samples = samples.size();
  if (n_samples < 2 || n_samples % 2 != 0) {
    throw ValidationError("DFT needs an even number of samples (got " + std::to_string(n_samples) + ")", "samples");
  }
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw ValidationError("loading period must be positive", "period");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw ValidationError("non-finite loading sample", "samples");
  }

  const std::size_t half = n_samples / 2;
  const double inv_n = 1.0 / static_cast<double>(n_samples);

  FourierLoading out;
  out.period = period;
  out.cos_coeffs.assign(half, 0.0);
  out.sin_coeffs.assign(half, 0.0);

  double sum = 0.0;
  for (double v : samples) sum += v;
  out.mean = sum * inv_n;

  // Re X_n = sum x_k cos(2 pi n k/N), Im X_n = -sum x_k sin(2 pi n k/N).
  for (std::size_t n = 1; n <= half; ++n) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
      const double arg = 2.0 * std::numbers::pi * static_cast<double>(n * k) * inv_n;
      re += samples[k] * std::cos(arg);
      im -= samples[k] * std::sin(arg);
    }
    if (n == half) {
      out.cos_coeffs[n - 1] = re * inv_n;
      out.sin_coeffs[n - 1] = 0.0;
    } else {
      out.cos_coeffs[n - 1] = 2.0 * re * inv_n;
      out.sin_coeffs[n - 1] = -2.0 * im * inv_n;
    }
  }
  return out;
}

FourierLoading dft_coefficients(const MonthlySeries& samples, double period) {
  validate(samples);
  return dft_coefficients(std::span<const double>(samples.values), period);
}

double evaluate_loading(const FourierLoading& loading, double t) {
  const double omega = 2.0 * std::numbers::pi * t / loading.period;
  double f = loading.mean;
  for (std::size_t i = 0; i < loading.cos_coeffs.size(); ++i) {
    const double arg = omega * static_cast<double>(i + 1);
    f += loading.cos_coeffs[i] * std::cos(arg) + loading.sin_coeffs[i] * std::sin(arg);
  }
  return f;
}

MonthlySeries load_monthly_file(const std::filesystem::path& path, QuantityKind kind) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open monthly data file " + path.string(), "file");

  MonthlySeries series;
  series.kind = kind;
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    int month = 0;
    double value = 0.0;
    if (!(fields >> month >> value)) {
      throw ValidationError("malformed row in " + path.string() + ": '" + line + "'", "file");
    }
    if (month < 1 || month > 12) {
      throw ValidationError("month index out of range in " + path.string() + ": " + std::to_string(month), "file");
    }
    if (rows < 12) series.values[static_cast<std::size_t>(month - 1)] = value;
    ++rows;
  }
  if (rows != 12) {
    throw ValidationError(path.string() + " must contain exactly 12 rows (found " + std::to_string(rows) + ")",
                          "file");
  }
  validate(series);
  return series;
}

double current_demand(const CurrentDemand& demand, double t) {
  return -demand.base - demand.amplitude * std::sin(4.0 * std::numbers::pi * t);
}

AreaProfile::AreaProfile(double nominal_area, double spread_depth_ratio, double span)
    : nominal_area_(nominal_area), spread_(spread_depth_ratio), span_(span) {
  if (!(nominal_area > 0.0)) throw ValidationError("nominal area must be positive", "nominal_area");
  if (!(span > 0.0)) throw ValidationError("span must be positive", "span");
  const double min_ratio = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  if (!(spread_depth_ratio > min_ratio) || !std::isfinite(spread_depth_ratio)) {
    throw ValidationError("area spread ratio must exceed 1/sqrt(2 pi) = 0.39894", "area_spread");
  }
}

double AreaProfile::operator()(double x) const {
  const double dx = x - 0.5 * span_;
  const double notch = std::exp(-dx * dx / (2.0 * spread_ * spread_)) / (spread_ * std::sqrt(2.0 * std::numbers::pi));
  return nominal_area_ * (1.0 - notch);
}

double area_at(const AreaProfile& profile, double x) { return profile(x); }

}  // namespace tline
