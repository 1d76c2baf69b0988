#include "weightlab/growth.hpp"

#include <algorithm>
#include <cmath>

#include "weightlab/error.hpp"

namespace weightlab {

namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorKind::Fit, "degenerate abscissae in fit");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

void check_points(const std::vector<GrowthPoint>& points, std::size_t min) {
  if (points.size() < min) {
    fail(ErrorKind::Fit, "fit needs at least " + std::to_string(min) +
                             " points, got " + std::to_string(points.size()));
  }
  for (const GrowthPoint& pt : points) {
    if (!(pt.value > 0.0) || !std::isfinite(pt.value)) {
      fail(ErrorKind::Fit, "fit values must be positive and finite");
    }
  }
}

}  // namespace

GrowthFit fit_growth(const ExponentConfig& cfg,
                     const std::vector<GrowthPoint>& points) {
  check_points(points, 4);
  std::vector<double> x;
  std::vector<double> y;
  for (const GrowthPoint& pt : points) {
    if (!(pt.n > std::exp(1.0))) fail(ErrorKind::Fit, "fit needs n > e");
    const double ln = std::log(pt.n);
    x.push_back(ln);
    y.push_back(std::log(pt.value) + (1.0 + cfg.delta) * std::log(ln));
  }
  const Line line = least_squares(x, y);
  GrowthFit fit;
  fit.alpha = line.slope;
  fit.intercept = line.intercept;
  fit.target = target_exponent(cfg);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (line.slope * x[i] + line.intercept);
    fit.residuals.push_back(r);
    fit.max_residual = std::max(fit.max_residual, std::fabs(r));
  }
  return fit;
}

double loglog_slope(const std::vector<GrowthPoint>& points) {
  check_points(points, 2);
  std::vector<double> x;
  std::vector<double> y;
  for (const GrowthPoint& pt : points) {
    if (!(pt.n > 0.0)) fail(ErrorKind::Fit, "fit needs n > 0");
    x.push_back(std::log(pt.n));
    y.push_back(std::log(pt.value));
  }
  return least_squares(x, y).slope;
}

std::vector<long long> geometric_grid(double log10_lo, double log10_hi,
                                      int count) {
  if (count < 2 || !(log10_hi > log10_lo)) {
    fail(ErrorKind::Config, "geometric grid needs count >= 2 and lo < hi");
  }
  std::vector<long long> out;
  for (int i = 0; i < count; ++i) {
    const double e = log10_lo + (log10_hi - log10_lo) * i / (count - 1);
    out.push_back(std::llround(std::pow(10.0, e)));
  }
  return out;
}

}  // namespace weightlab
