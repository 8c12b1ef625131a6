#include "tline/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tline/errors.hpp"

namespace tline {

GaussRule gauss_legendre_rule(int n) {
  if (n < 1 || n > 100) {
    throw ValidationError("Gauss-Legendre order must lie in [1, 100] (got " + std::to_string(n) + ")", "points");
  }
  const auto un = static_cast<std::size_t>(n);
  GaussRule rule;
  rule.points.assign(un, 0.0);
  rule.weights.assign(un, 0.0);
  // Roots are symmetric; find the non-negative half by Newton from the
  // Chebyshev-like initial guess cos(pi (i + 3/4) / (n + 1/2)).
  const std::size_t half = (un + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      // P_n' from the three-term relation (1 - x^2) P_n' = n (P_{n-1} - x P_n).
      dp = n * (p0 - x * p1) / (1.0 - x * x);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    {
      // Final derivative at the converged root.
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (p0 - x * p1) / (1.0 - x * x);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = -x;
    rule.points[un - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[un - 1 - i] = w;
  }
  if (un % 2 == 1) rule.points[un / 2] = 0.0;
  return rule;
}

}  // namespace tline
