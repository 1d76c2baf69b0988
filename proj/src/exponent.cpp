#include "weightlab/exponent.hpp"

#include <cmath>
#include <string>

#include "weightlab/error.hpp"

namespace weightlab {

ExponentConfig make_config(double p, double delta) {
  if (!std::isfinite(p) || p < kMinExponent || p > kMaxExponent) {
    fail(ErrorKind::Config, "p = " + std::to_string(p) +
                                " outside [1.05, 20]");
  }
  if (!std::isfinite(delta) || delta <= 0.0) {
    fail(ErrorKind::Config, "delta must be positive");
  }
  return ExponentConfig{p, p / (p - 1.0), delta, false};
}

ExponentConfig dual_swap(const ExponentConfig& cfg) {
  return ExponentConfig{cfg.p_prime, cfg.p, cfg.delta, !cfg.roles_swapped};
}

double target_exponent(const ExponentConfig& cfg) { return cfg.p / 2.0 - 1.0; }

}  // namespace weightlab
