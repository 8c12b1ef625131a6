#pragma once

#include <vector>

namespace tline {

struct GaussRule {
  std::vector<double> points;   // ascending, on [-1, 1]
  std::vector<double> weights;  // positive, sum to 2
};

/// n-point Gauss-Legendre rule, 1 <= n <= 100. Exact for degree <= 2n - 1.
GaussRule gauss_legendre_rule(int n);

}  // namespace tline
