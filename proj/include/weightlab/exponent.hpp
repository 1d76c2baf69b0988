#pragma once

namespace weightlab {

inline constexpr double kMinExponent = 1.05;
inline constexpr double kMaxExponent = 20.0;

/// Exponent pair (p, p') with the logarithmic decay parameter delta of the
/// test family. `roles_swapped` marks a configuration produced by
/// dual_swap: sigma and omega exchange roles in every reported quantity.
struct ExponentConfig {
  double p = 4.0;
  double p_prime = 4.0 / 3.0;
  double delta = 1.0;
  bool roles_swapped = false;

  bool operator==(const ExponentConfig&) const = default;
};

/// Validates p in [1.05, 20] and delta > 0; throws ErrorKind::Config.
ExponentConfig make_config(double p, double delta = 1.0);

/// Exchanges (p, sigma, omega) for (p', omega, sigma). Involution.
ExponentConfig dual_swap(const ExponentConfig& cfg);

/// Growth exponent p/2 - 1 of the quadratic right-hand side.
double target_exponent(const ExponentConfig& cfg);

}  // namespace weightlab
