#include <doctest.h>

#include <cmath>
#include <random>

#include "weightlab/cylinder_tree.hpp"
#include "weightlab/error.hpp"
#include "weightlab/transform.hpp"

using namespace weightlab;

TEST_CASE("cylinder tree matches brute force on sigma and omega") {
  const ExponentConfig cfg = make_config(4.0);
  const AtomicMeasure sigma = sigma_truncated(cfg, 12, SigmaVariant::Centered);
  const AtomicMeasure omega = cantor_quadrature(13);
  const CylinderTree ts(sigma, 10);
  const CylinderTree to(omega, 10);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> kd(0, 5);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = kd(rng);
    std::uniform_int_distribution<std::int64_t> jd(1, std::int64_t{1} << k);
    const TriadicIndex root{k, jd(rng)};
    const Interval c = interval(root);
    // evaluate at omega nodes inside c for sigma, at sigma atoms for omega
    const auto [lo, hi] = omega.range_in(c);
    for (std::size_t i = lo; i < hi; i += 1 + (hi - lo) / 7) {
      const double y = omega.atoms()[i].position;
      const auto ev = ts.evaluate(root, y, 0.0);
      const double brute = h_indicator(sigma, c, y);
      CHECK(std::fabs(ev.value - brute) <= 1e-11 * std::max(1.0, std::fabs(brute)) + ev.truncation);
    }
    const auto [slo, shi] = sigma.range_in(c);
    for (std::size_t i = slo; i < shi; i += 1 + (shi - slo) / 7) {
      const double z = sigma.atoms()[i].position;
      const auto ev = to.evaluate(root, z, 0.0);
      const double brute = h_indicator(omega, c, z);
      CHECK(std::fabs(ev.value - brute) <= 1e-11 * std::max(1.0, std::fabs(brute)) + ev.truncation);
      double ksq = 0.0;
      const auto [olo, ohi] = omega.range_in(c);
      for (std::size_t a = olo; a < ohi; ++a) {
        const double d = omega.atoms()[a].position - z;
        ksq += omega.atoms()[a].mass / (d * d);
      }
      CHECK(ev.kernel_sq >= ksq * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("cylinder tree ranges") {
  const AtomicMeasure omega = cantor_quadrature(8);
  const CylinderTree t(omega, 6);
  CHECK(t.atom_count() == 256);
  for (int k = 0; k <= 8; ++k) {
    for (std::int64_t j = 1; j <= (std::int64_t{1} << k); ++j) {
      const auto r = t.range({k, j});
      CHECK(r == omega.range_in(interval({k, j})));
    }
  }
}

TEST_CASE("cylinder tree singularity") {
  const AtomicMeasure omega = cantor_quadrature(4);
  const CylinderTree t(omega, 2);
  CHECK_THROWS_AS(t.evaluate({0, 1}, omega.atoms()[3].position, 0.0), Error);
}
