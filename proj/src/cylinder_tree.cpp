#include "weightlab/cylinder_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "weightlab/error.hpp"
#include "weightlab/summation.hpp"

namespace weightlab {

CylinderTree::CylinderTree(const AtomicMeasure& mu, int max_level)
    : max_level_(max_level) {
  if (max_level < 0 || max_level > 24) {
    fail(ErrorKind::ResourceLimit, "cylinder tree level out of range");
  }
  pos_.reserve(mu.size());
  mass_.reserve(mu.size());
  for (const Atom& a : mu.atoms()) {
    if (a.position < 0.0 || a.position > 1.0) {
      fail(ErrorKind::InvalidIndex, "cylinder tree needs atoms in [0,1]");
    }
    pos_.push_back(a.position);
    mass_.push_back(a.mass);
  }
  const std::size_t nodes = (std::size_t{1} << (max_level + 1)) - 1;
  lo_.resize(nodes);
  hi_.resize(nodes);
  center_.resize(nodes);
  moments_.assign(nodes * (kOrder + 1), 0.0);
  for (std::size_t n = 0; n < nodes; ++n) {
    const TriadicIndex idx = from_flat_index(static_cast<std::int64_t>(n));
    const Interval iv = interval(idx);
    const auto lo = std::lower_bound(pos_.begin(), pos_.end(), iv.left());
    const auto hi = std::upper_bound(lo, pos_.end(), iv.right());
    lo_[n] = static_cast<std::size_t>(lo - pos_.begin());
    hi_[n] = static_cast<std::size_t>(hi - pos_.begin());
    const double c = iv.center();
    const double h = 0.5 * iv.length();
    center_[n] = c;
    double* m = &moments_[n * (kOrder + 1)];
    for (std::size_t i = lo_[n]; i < hi_[n]; ++i) {
      const double t = (pos_[i] - c) / h;
      double tp = mass_[i];
      for (int k = 0; k <= kOrder; ++k) {
        m[k] += tp;
        tp *= t;
      }
    }
  }
}

std::pair<std::size_t, std::size_t> CylinderTree::range(
    TriadicIndex idx) const {
  if (idx.k <= max_level_) {
    const std::size_t n = node(idx);
    return {lo_[n], hi_[n]};
  }
  const Interval iv = interval(idx);
  const auto lo = std::lower_bound(pos_.begin(), pos_.end(), iv.left());
  const auto hi = std::upper_bound(lo, pos_.end(), iv.right());
  return {static_cast<std::size_t>(lo - pos_.begin()),
          static_cast<std::size_t>(hi - pos_.begin())};
}

void CylinderTree::direct(std::size_t lo, std::size_t hi, double x,
                          double eps, Evaluation& acc, double& comp) const {
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = pos_[i] - x;
    if (std::fabs(d) < 1e-300) throw SingularityError(i, pos_[i]);
    // Neumaier step inlined on (acc.value, comp).
    const double term = mass_[i] / d;
    const double t = acc.value + term;
    comp += std::fabs(acc.value) >= std::fabs(term) ? (acc.value - t) + term
                                                    : (term - t) + acc.value;
    acc.value = t;
    const double g = std::fabs(d) - eps;
    acc.kernel_sq += g > 0.0 ? mass_[i] / (g * g)
                             : std::numeric_limits<double>::infinity();
  }
}

CylinderTree::Evaluation CylinderTree::evaluate(TriadicIndex root, double x,
                                                double eps) const {
  Evaluation acc;
  double comp = 0.0;
  if (root.k > max_level_) {
    const auto [lo, hi] = range(root);
    direct(lo, hi, x, eps, acc, comp);
    acc.value += comp;
    return acc;
  }
  TriadicIndex stack[2 * 26];
  int top = 0;
  stack[top++] = root;
  while (top > 0) {
    const TriadicIndex idx = stack[--top];
    const std::size_t n = node(idx);
    if (lo_[n] == hi_[n]) continue;
    const double h = 0.5 * inv_pow3(idx.k);
    const double u = center_[n] - x;
    const double au = std::fabs(u);
    const double dist = au - h;
    if (dist >= 2.0 * h) {
      const double* m = &moments_[n * (kOrder + 1)];
      const double q = -h / u;
      double s = 0.0;
      for (int k = kOrder; k >= 0; --k) s = s * q + m[k];
      const double term = s / u;
      const double t = acc.value + term;
      comp += std::fabs(acc.value) >= std::fabs(term) ? (acc.value - t) + term
                                                      : (term - t) + acc.value;
      acc.value = t;
      const double r = h / au;
      acc.truncation += m[0] / au * std::pow(r, kOrder + 1) / (1.0 - r);
      const double g = dist - eps;
      acc.kernel_sq += g > 0.0 ? m[0] / (g * g)
                               : std::numeric_limits<double>::infinity();
    } else if (idx.k == max_level_) {
      direct(lo_[n], hi_[n], x, eps, acc, comp);
    } else {
      const TriadicIndex left{idx.k + 1, 2 * idx.j - 1};
      const TriadicIndex right{idx.k + 1, 2 * idx.j};
      // Atoms of the cylinder's own gap sit between the two children.
      direct(hi_[node(left)], lo_[node(right)], x, eps, acc, comp);
      stack[top++] = right;
      stack[top++] = left;
    }
  }
  acc.value += comp;
  return acc;
}

}  // namespace weightlab
