#pragma once

#include <vector>

#include "weightlab/exponent.hpp"

namespace weightlab {

struct GrowthPoint {
  double n = 0.0;
  double value = 0.0;
};

struct GrowthFit {
  double alpha = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  double target = 0.0;  // p/2 - 1
  std::vector<double> residuals;
};

/// Least squares of ln(value) + (1+delta) ln ln n against ln n.
/// Needs at least 4 points with n > e and value > 0.
GrowthFit fit_growth(const ExponentConfig& cfg,
                     const std::vector<GrowthPoint>& points);

/// Ordinary least-squares slope of ln(value) against ln n.
double loglog_slope(const std::vector<GrowthPoint>& points);

/// round(10^{lo + i (hi-lo)/(count-1)}), i = 0..count-1.
std::vector<long long> geometric_grid(double log10_lo, double log10_hi,
                                      int count);

}  // namespace weightlab
