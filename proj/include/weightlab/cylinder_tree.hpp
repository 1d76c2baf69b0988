#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "weightlab/measure.hpp"
#include "weightlab/triadic.hpp"

namespace weightlab {

/// Triadic tree over an atomic measure supported in [0,1]. Each Cantor
/// cylinder down to `max_level` stores its contiguous atom range and the
/// normalised moments sum m ((y - c)/h)^n. Used to evaluate H(1_C mu) for a
/// cylinder C at many points without the quadratic brute-force cost.
class CylinderTree {
 public:
  static constexpr int kOrder = 34;

  struct Evaluation {
    double value = 0.0;
    /// Upper bound on sum m / (|y - x| - eps)^2 (infinite if some atom is
    /// within eps of x).
    double kernel_sq = 0.0;
    /// Bound on the moment-series truncation in `value`.
    double truncation = 0.0;
  };

  CylinderTree(const AtomicMeasure& mu, int max_level);

  int max_level() const noexcept { return max_level_; }
  std::size_t atom_count() const noexcept { return pos_.size(); }
  double position(std::size_t i) const noexcept { return pos_[i]; }
  double mass(std::size_t i) const noexcept { return mass_[i]; }

  /// Atoms inside the closed cylinder I_j^k.
  std::pair<std::size_t, std::size_t> range(TriadicIndex idx) const;

  /// H(1_C mu)(x) with C = interval(root). Throws SingularityError when x
  /// hits an atom of C.
  Evaluation evaluate(TriadicIndex root, double x, double eps) const;

 private:
  std::size_t node(TriadicIndex idx) const noexcept {
    return static_cast<std::size_t>(flat_index(idx));
  }
  void direct(std::size_t lo, std::size_t hi, double x, double eps,
              Evaluation& acc, double& comp) const;

  std::vector<double> pos_;
  std::vector<double> mass_;
  int max_level_;
  std::vector<std::size_t> lo_;
  std::vector<std::size_t> hi_;
  std::vector<double> center_;
  std::vector<double> moments_;
};

}  // namespace weightlab
