#include "weightlab/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "weightlab/error.hpp"
#include "weightlab/parallel.hpp"
#include "weightlab/summation.hpp"

namespace weightlab {

namespace {

double ulp(double x) {
  return std::nextafter(std::fabs(x), std::numeric_limits<double>::infinity()) -
         std::fabs(x);
}

// Smallest admissible separation, in cylinder lengths, for the moment
// expansion: dist >= |C| keeps h/|u| <= 1/3.
constexpr double kAdmissible = 1.0;

}  // namespace

double cauchy_sum(const AtomicMeasure& mu, double x) {
  CompensatedSum acc;
  const auto atoms = mu.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double d = atoms[i].position - x;
    if (std::fabs(d) < 1e-300) throw SingularityError(i, atoms[i].position);
    acc.add(atoms[i].mass / d);
  }
  return acc.value();
}

double h_indicator(const AtomicMeasure& mu, const Interval& iv, double x) {
  const auto [lo, hi] = mu.range_in(iv);
  const auto atoms = mu.atoms();
  CompensatedSum acc;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = atoms[i].position - x;
    if (std::fabs(d) < 1e-300) throw SingularityError(i, atoms[i].position);
    acc.add(atoms[i].mass / d);
  }
  return acc.value();
}

CertifiedValue hilbert_omega(double x, int depth) {
  const AtomicMeasure nodes = cantor_quadrature(depth);
  const double half = 0.5 * inv_pow3(depth);
  const double w = omega_mass(depth);
  CompensatedSum bound;
  for (const Atom& a : nodes.atoms()) {
    const Interval cyl = interval(a.index);
    const double d = cyl.dist(x);
    if (d <= 0.0) {
      fail(ErrorKind::TooClose, "x = " + std::to_string(x) +
                                    " lies in depth-" + std::to_string(depth) +
                                    " cylinder " + to_string(a.index));
    }
    bound.add(w * half / (d * d));
  }
  return {cauchy_sum(nodes, x), bound.value()};
}

OmegaTransform::OmegaTransform(int depth) : depth_(depth) {
  if (depth < 0 || depth > kMaxDepth) {
    fail(ErrorKind::ResourceLimit,
         "omega transform depth " + std::to_string(depth) + " outside [0, " +
             std::to_string(kMaxDepth) + "]");
  }
  // Full moment vectors (odd entries vanish by symmetry).
  std::vector<double> prev(kOrder + 1, 0.0);
  prev[0] = 1.0;
  std::array<std::array<double, kOrder + 1>, kOrder + 1> binom{};
  for (int n = 0; n <= kOrder; ++n) {
    binom[n][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
      binom[n][i] = binom[n - 1][i - 1] + (i <= n - 1 ? binom[n - 1][i] : 0.0);
    }
  }
  moments_.resize(static_cast<std::size_t>(depth) + 1);
  for (int d = 0; d <= depth; ++d) {
    if (d > 0) {
      std::vector<double> next(kOrder + 1, 0.0);
      for (int n = 0; n <= kOrder; n += 2) {
        double acc = 0.0;
        for (int i = 0; i <= n; i += 2) {
          acc += binom[n][i] * std::ldexp(1.0, n - i) * prev[i];
        }
        next[n] = acc * std::pow(3.0, -n);
      }
      prev = std::move(next);
    }
    for (int i = 0; i < kTerms; ++i) moments_[d][i] = prev[2 * i];
  }
}

OmegaTransform::Evaluation OmegaTransform::evaluate(double x,
                                                    TriadicIndex root) const {
  if (!is_valid(root) || root.k > depth_) {
    fail(ErrorKind::InvalidIndex, "root cylinder " + to_string(root) +
                                      " deeper than transform depth");
  }
  struct Node {
    int level;
    std::int64_t left;
  };
  Node stack[2 * (kMaxDepth + 2)];
  int top = 0;
  stack[top++] = Node{root.k, cylinder_left_num(root)};

  const double leaf_half = 0.5 * inv_pow3(depth_);
  CompensatedSum value;
  CompensatedSum deriv;
  CompensatedSum bound;
  while (top > 0) {
    const Node node = stack[--top];
    const double h = 0.5 * inv_pow3(node.level);
    const double c = static_cast<double>(2 * node.left + 1) * h;
    const double u = c - x;
    const double au = std::fabs(u);
    const double dist = au - h;
    const double weight = std::ldexp(1.0, -node.level);
    if (node.level == depth_) {
      if (!(dist > 0.0)) {
        fail(ErrorKind::TooClose,
             "x = " + std::to_string(x) + " inside a depth-" +
                 std::to_string(depth_) + " cylinder");
      }
      value.add(weight / u);
      deriv.add(weight / (u * u));
      bound.add(weight * leaf_half / (dist * dist));
    } else if (dist >= kAdmissible * 2.0 * h) {
      const auto& mu = moments_[static_cast<std::size_t>(depth_ - node.level)];
      const double r = h / au;
      const double rho = r * r;
      double s0 = 0.0;
      double s1 = 0.0;
      for (int i = kTerms - 1; i >= 0; --i) {
        s0 = s0 * rho + mu[i];
        s1 = s1 * rho + (2 * i + 1) * mu[i];
      }
      value.add(weight / u * s0);
      deriv.add(weight / (u * u) * s1);
      const double tail =
          weight / au * std::pow(r, kOrder + 2) / (1.0 - rho);
      bound.add(tail + weight * leaf_half / (dist * dist));
    } else {
      stack[top++] = Node{node.level + 1, 3 * node.left + 2};
      stack[top++] = Node{node.level + 1, 3 * node.left};
    }
  }
  return {value.value(), deriv.value(), bound.value()};
}

ZeroResult find_zero(const OmegaTransform& h, TriadicIndex idx, double tol) {
  const Interval g = gap(idx);
  if (idx.k >= h.depth()) {
    fail(ErrorKind::TooClose, "gap " + to_string(idx) +
                                  " is not resolved at depth " +
                                  std::to_string(h.depth()));
  }
  const double a0 = g.left();
  const double b0 = g.right();
  const double len = g.length();
  ZeroResult out;
  auto eval = [&](double x) {
    ++out.evaluations;
    return h.evaluate(x);
  };

  // Initial bracket 10^-3 |G| inside the edges, pushed outward when the
  // sign condition fails.
  double off_lo = 1e-3 * len;
  double off_hi = 1e-3 * len;
  double lo = a0 + off_lo;
  double hi = b0 - off_hi;
  double f_lo = eval(lo).value;
  double f_hi = eval(hi).value;
  for (int i = 0; i < 12 && f_lo >= 0.0; ++i) {
    off_lo *= 0.1;
    lo = a0 + off_lo;
    if (!(lo > a0)) break;
    f_lo = eval(lo).value;
  }
  for (int i = 0; i < 12 && f_hi <= 0.0; ++i) {
    off_hi *= 0.1;
    hi = b0 - off_hi;
    if (!(hi < b0)) break;
    f_hi = eval(hi).value;
  }
  if (!(f_lo < 0.0) || !(f_hi > 0.0)) {
    fail(ErrorKind::NumericalFailure,
         "no sign change of H omega inside gap " + to_string(idx));
  }

  auto width_target = [&](double x) {
    return std::max(tol * len, 4.0 * ulp(x));
  };
  auto absorb = [&](double x, double fx) {
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
  };

  double x = 0.5 * (lo + hi);
  OmegaTransform::Evaluation ev = eval(x);
  absorb(x, ev.value);
  for (int iter = 0; iter < 200; ++iter) {
    const double w = width_target(x);
    if (hi - lo <= w || ev.value == 0.0) break;
    double nx = x - ev.value / ev.derivative;
    if (!(nx > lo && nx < hi)) {
      nx = 0.5 * (lo + hi);
    } else if (std::fabs(nx - x) < 0.5 * w) {
      // Converged: collapse the bracket around the Newton iterate.
      const double pa = std::max(lo, nx - 0.5 * w);
      const double pb = std::min(hi, nx + 0.5 * w);
      if (pa > lo) absorb(pa, eval(pa).value);
      if (pb < hi) absorb(pb, eval(pb).value);
      x = std::clamp(nx, lo, hi);
      if (hi - lo <= width_target(x)) break;
      nx = 0.5 * (lo + hi);
    }
    x = nx;
    ev = eval(x);
    absorb(x, ev.value);
  }
  if (ev.value != 0.0 && hi - lo > width_target(x)) {
    fail(ErrorKind::NumericalFailure,
         "zero iteration did not converge in gap " + to_string(idx));
  }

  const double z = ev.value == 0.0 ? x : 0.5 * (lo + hi);
  const OmegaTransform::Evaluation at = (z == x) ? ev : eval(z);
  out.z = z;
  out.residual = std::fabs(at.value);
  out.bracket_lo = ev.value == 0.0 ? z : lo;
  out.bracket_hi = ev.value == 0.0 ? z : hi;
  out.error_bound = at.error_bound;

  if (std::min(z - a0, b0 - z) < 1e-6 * len) {
    fail(ErrorKind::NumericalFailure,
         "zero in gap " + to_string(idx) + " within 1e-6|G| of an edge");
  }
  const double residual_tol =
      std::max({1e-10, 2.0 * at.error_bound,
                4.0 * at.derivative * width_target(z)});
  if (out.residual > residual_tol) {
    fail(ErrorKind::NumericalFailure,
         "zero residual " + std::to_string(out.residual) + " in gap " +
             to_string(idx) + " exceeds tolerance");
  }
  return out;
}

ZeroResult find_zero(TriadicIndex idx, double tol, int depth) {
  return find_zero(OmegaTransform(depth), idx, tol);
}

ZeroTable zero_table(int max_generation, double tol, int depth) {
  if (max_generation < 0 || max_generation > kMaxZeroGeneration) {
    fail(ErrorKind::ResourceLimit,
         "zero table generation must lie in [0, " +
             std::to_string(kMaxZeroGeneration) + "]");
  }
  if (depth <= max_generation) {
    fail(ErrorKind::TooClose, "zero-table depth must exceed max generation");
  }
  const OmegaTransform h(depth);
  const std::size_t n = (std::size_t{1} << (max_generation + 1)) - 1;
  std::vector<ZeroEntry> entries(n);
  parallel_for(n, [&](std::size_t i) {
    const TriadicIndex idx = from_flat_index(static_cast<std::int64_t>(i));
    const ZeroResult r = find_zero(h, idx, tol);
    entries[i] = ZeroEntry{r.z, r.residual, depth};
  });
  ZeroTable table(max_generation);
  for (std::size_t i = 0; i < n; ++i) {
    table.set(from_flat_index(static_cast<std::int64_t>(i)), entries[i]);
  }
  return table;
}

std::vector<double> edge_distance_ratios(const ZeroTable& table) {
  std::vector<double> out;
  for (int k = 0; k <= table.max_generation(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t j = 1; j <= (std::int64_t{1} << k); ++j) {
      const ZeroEntry* e = table.find({k, j});
      if (e == nullptr) continue;
      const Interval g = gap({k, j});
      best = std::min(best,
                      std::min(e->z - g.left(), g.right() - e->z) / g.length());
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace weightlab
