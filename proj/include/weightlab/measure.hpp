#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "weightlab/exponent.hpp"
#include "weightlab/triadic.hpp"
#include "weightlab/zero_table.hpp"

namespace weightlab {

enum class MeasureKind { Generic, OmegaQuadrature, SigmaCentered, SigmaZeroed };

enum class SigmaVariant { Centered, Zeroed };

/// Where an atomic measure came from; carries what error bounds need.
struct Provenance {
  MeasureKind kind = MeasureKind::Generic;
  int depth = 0;     // N for omega quadrature, L for sigma
  double p = 0.0;    // exponent the sigma weights were built with
};

/// Weighted point mass. Masses below 1e-300 keep their logarithm in
/// `log_mass`; `mass` then holds the (possibly subnormal) exponential.
struct Atom {
  double position = 0.0;
  double mass = 0.0;
  double log_mass = 0.0;
  int generation = 0;
  TriadicIndex index{};

  bool log_domain() const noexcept;
};

/// Immutable, position-sorted collection of atoms.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  /// Sorts by position; throws InvalidIndex on repeated positions or
  /// nonpositive masses.
  AtomicMeasure(std::vector<Atom> atoms, Provenance provenance);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  double total_mass() const noexcept { return total_mass_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  /// Half-open index range of atoms with position in [a, b].
  std::pair<std::size_t, std::size_t> range_closed(double a, double b) const;
  /// Index range of atoms inside `iv`, honouring its closure.
  std::pair<std::size_t, std::size_t> range_in(const Interval& iv) const;
  double mass_in(const Interval& iv) const;

 private:
  std::vector<Atom> atoms_;
  Provenance provenance_;
  double total_mass_ = 0.0;
};

inline constexpr int kMaxQuadratureDepth = 24;
inline constexpr int kMaxSigmaDepth = 24;

/// 2^N atoms of mass 2^{-N} at the midpoints of the I_j^N.
AtomicMeasure cantor_quadrature(int depth);

/// log s^k = k (p'-1) ln 2 - k p' ln 3.
double sigma_log_weight(const ExponentConfig& cfg, int k);
/// s^k = 2^{k(p'-1)} 3^{-k p'}.
double sigma_weight(const ExponentConfig& cfg, int k);
/// (s^k)^{p-1} |I^k|_omega / |I^k|^p, evaluated in the log domain; 1 by
/// construction of the weights.
double precursor_ratio(const ExponentConfig& cfg, int k);

/// Gap atoms s^k at every G_j^k with k <= max_generation. Centered places
/// them at gap midpoints; zeroed reads positions from `zeros`.
AtomicMeasure sigma_truncated(const ExponentConfig& cfg, int max_generation,
                              SigmaVariant variant,
                              const ZeroTable* zeros = nullptr);

AtomicMeasure restrict(const AtomicMeasure& mu, const Interval& iv);

/// sum_{l=0}^{L} (2/3)^{p' l}, the total mass of sigma_truncated.
double sigma_total_mass_closed_form(const ExponentConfig& cfg, int L);
/// |I_j^k|_{sigma_L} = s^k (1 - r^{L-k+1}) / (1 - r), r = (2/3)^{p'}.
double sigma_cylinder_mass_closed_form(const ExponentConfig& cfg, int k,
                                       int L);
/// sum_{l > L} 2^l s^l: mass dropped by truncating at generation L.
double sigma_tail_mass(const ExponentConfig& cfg, int L);

}  // namespace weightlab
