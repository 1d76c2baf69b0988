#include "weightlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "weightlab/error.hpp"
#include "weightlab/summation.hpp"

namespace weightlab {

namespace {

const double kLogTiny = std::log(1e-300);

/// Left numerators over 3^level of all generation-`level` cylinders, in
/// left-to-right order.
std::vector<std::int64_t> cylinder_lefts(int level) {
  std::vector<std::int64_t> lefts{0};
  for (int m = 1; m <= level; ++m) {
    std::vector<std::int64_t> next;
    next.reserve(lefts.size() * 2);
    for (std::int64_t l : lefts) {
      next.push_back(3 * l);
      next.push_back(3 * l + 2);
    }
    lefts = std::move(next);
  }
  return lefts;
}

double ratio_r(double p_prime) { return std::pow(2.0 / 3.0, p_prime); }

}  // namespace

bool Atom::log_domain() const noexcept { return log_mass < kLogTiny; }

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms, Provenance provenance)
    : atoms_(std::move(atoms)), provenance_(provenance) {
  std::stable_sort(atoms_.begin(), atoms_.end(),
                   [](const Atom& a, const Atom& b) {
                     return a.position < b.position;
                   });
  CompensatedSum total;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (!(a.mass > 0.0) && !a.log_domain()) {
      fail(ErrorKind::InvalidIndex,
           "atom #" + std::to_string(i) + " has nonpositive mass");
    }
    if (!std::isfinite(a.position)) {
      fail(ErrorKind::InvalidIndex, "atom position is not finite");
    }
    if (i > 0 && !(atoms_[i - 1].position < a.position)) {
      fail(ErrorKind::InvalidIndex,
           "atom positions must be strictly increasing (repeat at " +
               std::to_string(a.position) + ")");
    }
    total.add(a.mass);
  }
  total_mass_ = total.value();
}

std::pair<std::size_t, std::size_t> AtomicMeasure::range_closed(
    double a, double b) const {
  auto lo = std::lower_bound(
      atoms_.begin(), atoms_.end(), a,
      [](const Atom& at, double v) { return at.position < v; });
  auto hi = std::upper_bound(
      lo, atoms_.end(), b,
      [](double v, const Atom& at) { return v < at.position; });
  return {static_cast<std::size_t>(lo - atoms_.begin()),
          static_cast<std::size_t>(hi - atoms_.begin())};
}

std::pair<std::size_t, std::size_t> AtomicMeasure::range_in(
    const Interval& iv) const {
  if (iv.closure() == Closure::Closed) {
    return range_closed(iv.left(), iv.right());
  }
  auto lo = std::upper_bound(
      atoms_.begin(), atoms_.end(), iv.left(),
      [](double v, const Atom& at) { return v < at.position; });
  auto hi = std::lower_bound(
      lo, atoms_.end(), iv.right(),
      [](const Atom& at, double v) { return at.position < v; });
  return {static_cast<std::size_t>(lo - atoms_.begin()),
          static_cast<std::size_t>(hi - atoms_.begin())};
}

double AtomicMeasure::mass_in(const Interval& iv) const {
  const auto [lo, hi] = range_in(iv);
  CompensatedSum acc;
  for (std::size_t i = lo; i < hi; ++i) acc.add(atoms_[i].mass);
  return acc.value();
}

AtomicMeasure cantor_quadrature(int depth) {
  if (depth < 0) fail(ErrorKind::InvalidIndex, "negative quadrature depth");
  if (depth > kMaxQuadratureDepth) {
    fail(ErrorKind::ResourceLimit,
         "quadrature depth " + std::to_string(depth) + " exceeds " +
             std::to_string(kMaxQuadratureDepth));
  }
  const std::vector<std::int64_t> lefts = cylinder_lefts(depth);
  const double denom = 2.0 * static_cast<double>(pow3(depth));
  const double mass = omega_mass(depth);
  const double log_mass = -depth * std::log(2.0);
  std::vector<Atom> atoms;
  atoms.reserve(lefts.size());
  for (std::size_t i = 0; i < lefts.size(); ++i) {
    atoms.push_back(Atom{static_cast<double>(2 * lefts[i] + 1) / denom, mass,
                         log_mass, depth,
                         TriadicIndex{depth, static_cast<std::int64_t>(i) + 1}});
  }
  return AtomicMeasure(std::move(atoms),
                       Provenance{MeasureKind::OmegaQuadrature, depth, 0.0});
}

double sigma_log_weight(const ExponentConfig& cfg, int k) {
  if (k < 0) fail(ErrorKind::InvalidIndex, "negative generation");
  return k * ((cfg.p_prime - 1.0) * std::log(2.0) -
              cfg.p_prime * std::log(3.0));
}

double sigma_weight(const ExponentConfig& cfg, int k) {
  return std::exp(sigma_log_weight(cfg, k));
}

double precursor_ratio(const ExponentConfig& cfg, int k) {
  const double kk = static_cast<double>(k);
  return std::exp((cfg.p - 1.0) * sigma_log_weight(cfg, k) -
                  kk * std::log(2.0) + kk * cfg.p * std::log(3.0));
}

AtomicMeasure sigma_truncated(const ExponentConfig& cfg, int max_generation,
                              SigmaVariant variant, const ZeroTable* zeros) {
  if (max_generation < 0) {
    fail(ErrorKind::InvalidIndex, "negative sigma depth");
  }
  if (max_generation > kMaxSigmaDepth) {
    fail(ErrorKind::ResourceLimit, "sigma depth exceeds limit");
  }
  if (variant == SigmaVariant::Zeroed &&
      (zeros == nullptr || !zeros->complete_to(max_generation))) {
    fail(ErrorKind::Dependency,
         "zeroed sigma needs a zero table covering generations <= " +
             std::to_string(max_generation));
  }
  std::vector<Atom> atoms;
  atoms.reserve((std::size_t{1} << (max_generation + 1)) - 1);
  std::vector<std::int64_t> lefts{0};
  for (int k = 0; k <= max_generation; ++k) {
    if (k > 0) {
      std::vector<std::int64_t> next;
      next.reserve(lefts.size() * 2);
      for (std::int64_t l : lefts) {
        next.push_back(3 * l);
        next.push_back(3 * l + 2);
      }
      lefts = std::move(next);
    }
    const double log_s = sigma_log_weight(cfg, k);
    const double s = std::exp(log_s);
    if (!(s > 0.0)) {
      fail(ErrorKind::ResourceLimit,
           "sigma weight underflows at generation " + std::to_string(k));
    }
    const double denom = 2.0 * static_cast<double>(pow3(k));
    for (std::size_t i = 0; i < lefts.size(); ++i) {
      const TriadicIndex idx{k, static_cast<std::int64_t>(i) + 1};
      double pos = static_cast<double>(2 * lefts[i] + 1) / denom;
      if (variant == SigmaVariant::Zeroed) {
        pos = zeros->at(idx).z;
        const Interval g(3 * lefts[i] + 1, 3 * lefts[i] + 2, k + 1,
                         Closure::Open);
        if (!g.contains(pos)) {
          fail(ErrorKind::Dependency,
               "tabulated zero for gap " + to_string(idx) +
                   " lies outside the gap");
        }
      }
      atoms.push_back(Atom{pos, s, log_s, k, idx});
    }
  }
  const MeasureKind kind = variant == SigmaVariant::Centered
                               ? MeasureKind::SigmaCentered
                               : MeasureKind::SigmaZeroed;
  return AtomicMeasure(std::move(atoms),
                       Provenance{kind, max_generation, cfg.p});
}

AtomicMeasure restrict(const AtomicMeasure& mu, const Interval& iv) {
  const auto [lo, hi] = mu.range_in(iv);
  std::vector<Atom> atoms(mu.atoms().begin() + static_cast<std::ptrdiff_t>(lo),
                          mu.atoms().begin() + static_cast<std::ptrdiff_t>(hi));
  return AtomicMeasure(std::move(atoms), mu.provenance());
}

double sigma_total_mass_closed_form(const ExponentConfig& cfg, int L) {
  const double r = ratio_r(cfg.p_prime);
  return -std::expm1((L + 1) * std::log(r)) / (1.0 - r);
}

double sigma_cylinder_mass_closed_form(const ExponentConfig& cfg, int k,
                                       int L) {
  if (k > L) return 0.0;
  const double r = ratio_r(cfg.p_prime);
  return sigma_weight(cfg, k) * -std::expm1((L - k + 1) * std::log(r)) /
         (1.0 - r);
}

double sigma_tail_mass(const ExponentConfig& cfg, int L) {
  const double r = ratio_r(cfg.p_prime);
  return std::pow(r, L + 1) / (1.0 - r);
}

}  // namespace weightlab
