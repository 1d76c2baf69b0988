#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weightlab/exponent.hpp"
#include "weightlab/measure.hpp"
#include "weightlab/transform.hpp"

namespace weightlab {

class CylinderTree;

// ---------------------------------------------------------------------------
// Scan tables

struct ScanRow {
  std::vector<std::string> params;
  double value = 0.0;
  std::optional<double> error_bound;
  int depth_omega = 0;
  int depth_sigma = 0;
};

struct ScanResult {
  std::vector<std::string> param_names;
  std::vector<ScanRow> rows;

  /// Maximum value over all rows (0 for an empty scan).
  double summary() const;
  double sup_where(const std::function<bool(const ScanRow&)>& pred) const;
  /// Header `param1,...,value,error_bound,depth_omega,depth_sigma`.
  void write_csv(std::ostream& out) const;
};

// ---------------------------------------------------------------------------
// Two-tailed Muckenhoupt condition

/// sum over atoms of |I|^{q-1} / (|I| + dist(x, I))^q. The error bound is
/// the analytic truncation tail for sigma measures and the midpoint
/// displacement bound for omega quadrature.
CertifiedValue ap_tail(const Interval& iv, const AtomicMeasure& mu, double q);

/// Cylinders I_j^k and closed gaps, k <= max_k.
std::vector<Interval> ap_family(int max_k);

/// Per interval: ap_tail(I, omega, p)^{1/p} * ap_tail(I, sigma, p')^{1/p'}.
ScanResult ap_constant(const ExponentConfig& cfg,
                       const std::vector<Interval>& family,
                       const AtomicMeasure& omega, const AtomicMeasure& sigma);
ScanResult ap_constant(const ExponentConfig& cfg,
                       const std::vector<Interval>& family, int omega_depth,
                       int sigma_depth, SigmaVariant variant,
                       const ZeroTable* zeros = nullptr);

// ---------------------------------------------------------------------------
// Local testing conditions

enum class Direction { Forward, Backward };
const char* to_string(Direction dir, bool roles_swapped = false);

/// Holds omega_N, sigma_L and their cylinder trees for repeated testing
/// integrals. Forward: sum over omega nodes y in I of 2^{-N}|H 1_I sigma(y)|^p.
/// Backward: sum over sigma atoms z in I of s |H 1_I omega_N(z)|^{p'}.
class TestingEngine {
 public:
  TestingEngine(const ExponentConfig& cfg, AtomicMeasure omega,
                AtomicMeasure sigma);
  ~TestingEngine();
  TestingEngine(TestingEngine&&) noexcept;
  TestingEngine& operator=(TestingEngine&&) noexcept;

  const AtomicMeasure& omega() const noexcept { return omega_; }
  const AtomicMeasure& sigma() const noexcept { return sigma_; }

  CertifiedValue norm(const Interval& iv, Direction dir) const;
  /// |I|_sigma (forward) or |I|_omega (backward).
  double normalizer(const Interval& iv, Direction dir) const;

 private:
  CertifiedValue forward_cylinder(TriadicIndex idx) const;
  CertifiedValue backward_cylinder(TriadicIndex idx) const;
  CertifiedValue forward_brute(const Interval& iv) const;
  CertifiedValue backward_brute(const Interval& iv) const;

  ExponentConfig cfg_;
  AtomicMeasure omega_;
  AtomicMeasure sigma_;
  std::unique_ptr<CylinderTree> omega_tree_;
  std::unique_ptr<CylinderTree> sigma_tree_;
  double omega_half_ = 0.0;
};

CertifiedValue testing_norm(const ExponentConfig& cfg, const Interval& iv,
                            Direction dir, int omega_depth, int sigma_depth,
                            SigmaVariant variant,
                            const ZeroTable* zeros = nullptr);

inline constexpr int kMaxTestingScanK = 8;

/// Normalised testing integrals for every I_j^k, k <= max_k, both
/// directions. Requires omega_depth > sigma_depth so that no quadrature node
/// meets a sigma atom.
ScanResult testing_scan(const ExponentConfig& cfg, int max_k,
                        const TestingEngine& engine);
ScanResult testing_scan(const ExponentConfig& cfg, int max_k, int omega_depth,
                        int sigma_depth, SigmaVariant variant,
                        const ZeroTable* zeros = nullptr);

// ---------------------------------------------------------------------------
// Quadratic functional on the explicit test family

/// a_k = (k+1)^{1/p} (ln(k+2))^{(1+delta)/p},
/// beta_k = (3/2)^{(p'-1)k} / a_k. The family is beta_k 1_{theta I_j^k}
/// for k >= 1, theta being the Cantor sibling.
class TestFamily {
 public:
  explicit TestFamily(const ExponentConfig& cfg) : cfg_(cfg) {}

  const ExponentConfig& config() const noexcept { return cfg_; }
  double a(long long k) const;
  long double log_a(long long k) const;
  long double log_beta(long long k) const;
  /// Throws ResourceLimit when beta_k overflows a double.
  double beta(long long k) const;

 private:
  ExponentConfig cfg_;
};

struct FamilyCoefficients {
  double a = 0.0;
  double beta = 0.0;
};

FamilyCoefficients test_family_coeffs(const ExponentConfig& cfg, long long k);

/// ||(sum f_i^2)^{1/2}||_{L^p(sigma)}^p: each sigma atom of generation l lies
/// in exactly one theta-interval per generation 1 <= k <= l.
double quad_lhs_direct(const ExponentConfig& cfg, int n,
                       const AtomicMeasure& sigma);
/// sum_{k=1}^{n} 1 / ((k+1) (ln(k+2))^{1+delta}).
double quad_lhs_closed(const ExponentConfig& cfg, long long n);

/// T_{k,j} = beta_k sum over sigma atoms x in theta I_j^k \ 3I_j^k of
/// m(x) / |x - c(I_j^k)|, flattened by (k, j) for 1 <= k <= n.
std::vector<double> quad_rhs_terms(const ExponentConfig& cfg, int n,
                                   const AtomicMeasure& sigma);
/// G_j = sum_{k<=n} T_{k, anc_k(j)}^2 on each depth-n cylinder.
std::vector<double> quad_rhs_cylinder_values(const ExponentConfig& cfg, int n,
                                             const AtomicMeasure& sigma);
/// Pointwise integrand sum_{k,j} 1_{I_j^k}(y) T_{k,j}^2 by direct membership.
double quad_rhs_integrand(const ExponentConfig& cfg, int n,
                          const std::vector<double>& terms, double y);
/// sum_j 2^{-n} G_j^{p/2}.
double quad_rhs_direct(const ExponentConfig& cfg, int n,
                       const AtomicMeasure& sigma);

/// quad_rhs_direct for every cutoff 1..n_max from one set of terms.
std::vector<double> quad_rhs_direct_series(const ExponentConfig& cfg,
                                           int n_max,
                                           const AtomicMeasure& sigma);

/// (sum_{k=1}^{n} a_k^{-2})^{p/2} and its logarithm.
double quad_rhs_closed(const ExponentConfig& cfg, long long n);
double quad_rhs_closed_log(const ExponentConfig& cfg, long long n);
/// quad_rhs_closed at each n of an increasing grid, sharing one prefix sum.
std::vector<double> quad_rhs_closed_series(const ExponentConfig& cfg,
                                           const std::vector<long long>& ns);
std::vector<double> quad_lhs_closed_series(const ExponentConfig& cfg,
                                           const std::vector<long long>& ns);

/// Integral-test bound 1/(2 (ln 2)^{1+delta}) + 1/(delta (ln 2)^delta) on
/// every partial sum of quad_lhs_closed.
double quad_lhs_series_bound(const ExponentConfig& cfg);

// ---------------------------------------------------------------------------

/// sum over omega_N nodes y of 2^{-N} |H sigma-dot_K (y)|^p.
double selfsim_energy(const ExponentConfig& cfg, int sigma_depth,
                      int omega_depth);

}  // namespace weightlab
