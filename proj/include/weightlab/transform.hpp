#pragma once

#include <array>
#include <vector>

#include "weightlab/measure.hpp"
#include "weightlab/triadic.hpp"
#include "weightlab/zero_table.hpp"

namespace weightlab {

struct CertifiedValue {
  double value = 0.0;
  double error_bound = 0.0;  // absolute
};

/// H mu(x) = sum_i m_i / (y_i - x), compensated, ascending position order.
/// Throws SingularityError when x hits an atom.
double cauchy_sum(const AtomicMeasure& mu, double x);

/// cauchy_sum(restrict(mu, I), x) without materialising the restriction.
double h_indicator(const AtomicMeasure& mu, const Interval& iv, double x);

/// Brute-force H omega_N(x) with the midpoint-displacement bound
/// sum_j 2^{-N} (3^{-N}/2) / dist(x, I_j^N)^2. Throws TooClose when x lies in
/// some I_j^N.
CertifiedValue hilbert_omega(double x, int depth);

/// Tree evaluation of H(1_C omega_N) for a Cantor cylinder C. Far cylinders
/// use their exact even moments (truncated at order kOrder), near ones are
/// split down to the depth-N midpoints. Matches hilbert_omega to rounding
/// for depths where both apply, and reaches depths brute force cannot.
class OmegaTransform {
 public:
  static constexpr int kMaxDepth = 36;
  static constexpr int kOrder = 34;
  static constexpr int kTerms = kOrder / 2 + 1;

  struct Evaluation {
    double value = 0.0;
    double derivative = 0.0;   // d/dx, positive off the support
    double error_bound = 0.0;  // displacement bound plus series truncation
  };

  explicit OmegaTransform(int depth);

  int depth() const noexcept { return depth_; }
  Evaluation evaluate(double x, TriadicIndex root = {0, 1}) const;

 private:
  int depth_;
  // moments_[d][i] = 2^{-d} sum over depth-d midpoints t in [-1,1] of t^{2i}.
  std::vector<std::array<double, kTerms>> moments_;
};

struct ZeroResult {
  double z = 0.0;
  double residual = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double error_bound = 0.0;
  int evaluations = 0;
};

inline constexpr double kDefaultZeroTol = 1e-12;
inline constexpr int kDefaultZeroDepth = 32;
inline constexpr int kMaxZeroGeneration = 20;

/// Zero of H omega_N inside gap(idx): monotone bracketing with safeguarded
/// Newton steps. Bracket width is at most max(tol |G|, 4 ulp(z)).
ZeroResult find_zero(const OmegaTransform& h, TriadicIndex idx,
                     double tol = kDefaultZeroTol);
ZeroResult find_zero(TriadicIndex idx, double tol, int depth);

/// All zeros for gaps of generation <= max_generation.
ZeroTable zero_table(int max_generation, double tol = kDefaultZeroTol,
                     int depth = kDefaultZeroDepth);

/// Smallest distance from a tabulated zero to its gap edge, as a fraction of
/// the gap length, per generation.
std::vector<double> edge_distance_ratios(const ZeroTable& table);

}  // namespace weightlab
