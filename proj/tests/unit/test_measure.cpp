#include <doctest.h>

#include <cmath>
#include <random>

#include "weightlab/error.hpp"
#include "weightlab/measure.hpp"
#include "weightlab/transform.hpp"

using namespace weightlab;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

// sum_{l=0}^{L} 2^l s^l term by term
double total_mass_oracle(double p, int L) {
  const double pp = p / (p - 1.0);
  double acc = 0.0;
  for (int l = 0; l <= L; ++l) {
    acc += std::pow(2.0, l) * std::pow(2.0, l * (pp - 1.0)) * std::pow(3.0, -l * pp);
  }
  return acc;
}

}  // namespace

TEST_CASE("cantor quadrature examples") {
  const AtomicMeasure q0 = cantor_quadrature(0);
  REQUIRE(q0.size() == 1);
  CHECK(q0.atoms()[0].position == 0.5);
  CHECK(q0.atoms()[0].mass == 1.0);

  const AtomicMeasure q1 = cantor_quadrature(1);
  REQUIRE(q1.size() == 2);
  CHECK(q1.atoms()[0].position == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(q1.atoms()[1].position == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(q1.atoms()[0].mass == 0.5);
  CHECK(q1.provenance().kind == MeasureKind::OmegaQuadrature);
}

TEST_CASE("cantor quadrature mass, symmetry and nesting") {
  for (int n = 0; n <= 20; n += 4) {
    const AtomicMeasure q = cantor_quadrature(n);
    CHECK(q.size() == (std::size_t{1} << n));
    CHECK(std::fabs(q.total_mass() - 1.0) <= 1e-14);
    const auto a = q.atoms();
    for (std::size_t i = 0; i < a.size(); i += 97) {
      CHECK(std::fabs(a[i].position + a[a.size() - 1 - i].position - 1.0) <= 1e-15);
      CHECK(interval(a[i].index).contains(a[i].position));
    }
  }
  const AtomicMeasure q6 = cantor_quadrature(6);
  const AtomicMeasure q7 = cantor_quadrature(7);
  for (std::size_t i = 0; i < q7.size(); ++i) {
    const Atom& a = q7.atoms()[i];
    CHECK(interval(parent(a.index)).contains(a.position));
    CHECK(parent(a.index) == q6.atoms()[i / 2].index);
  }
  CHECK_THROWS_AS(cantor_quadrature(25), Error);
}

TEST_CASE("sigma weight examples and precursor identity") {
  const ExponentConfig two = make_config(2.0);
  CHECK(sigma_weight(two, 0) == 1.0);
  CHECK(sigma_weight(two, 1) == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const ExponentConfig cfg = make_config(p);
    for (int k = 0; k <= 40; ++k) {
      CHECK(std::fabs(precursor_ratio(cfg, k) - 1.0) <= 1e-12);
      // the same identity from the weight itself
      const double s = sigma_weight(cfg, k);
      const double lhs = std::pow(s, p - 1.0) * std::pow(2.0, -k) / std::pow(3.0, -k * p);
      CHECK(std::fabs(lhs - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("log-domain weights stay finite") {
  const ExponentConfig cfg = make_config(1.05);
  CHECK(std::isfinite(sigma_log_weight(cfg, 100)));
  CHECK(sigma_log_weight(cfg, 100) < std::log(1e-300));
}

TEST_CASE("sigma truncated examples") {
  const ExponentConfig two = make_config(2.0);
  const AtomicMeasure s0 = sigma_truncated(two, 0, SigmaVariant::Centered);
  REQUIRE(s0.size() == 1);
  CHECK(s0.atoms()[0].position == 0.5);
  CHECK(s0.atoms()[0].mass == 1.0);

  const ZeroTable z0 = zero_table(0);
  const AtomicMeasure sz = sigma_truncated(two, 0, SigmaVariant::Zeroed, &z0);
  CHECK(std::fabs(sz.atoms()[0].position - 0.5) <= 1e-15);

  CHECK(sigma_total_mass_closed_form(two, 400) ==
        doctest::Approx(9.0 / 5.0).epsilon(1e-14));
  try {
    sigma_truncated(two, 3, SigmaVariant::Zeroed, &z0);
    FAIL("expected Dependency");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Dependency);
  }
  CHECK_THROWS_AS(sigma_truncated(two, 2, SigmaVariant::Zeroed), Error);
}

TEST_CASE("sigma total mass matches the geometric closed form") {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const ExponentConfig cfg = make_config(p);
    for (int L : {5, 10, 20}) {
      const AtomicMeasure s = sigma_truncated(cfg, L, SigmaVariant::Centered);
      const double oracle = total_mass_oracle(p, L);
      CHECK(rel(s.total_mass(), oracle) <= 1e-12);
      CHECK(rel(sigma_total_mass_closed_form(cfg, L), oracle) <= 1e-12);
      CHECK(rel(sigma_total_mass_closed_form(cfg, L) + sigma_tail_mass(cfg, L),
                sigma_total_mass_closed_form(cfg, 2000)) <= 1e-12);
    }
  }
}

TEST_CASE("sigma atoms sit strictly inside their gaps") {
  const ExponentConfig cfg = make_config(4.0);
  const ZeroTable zt = zero_table(8);
  for (auto var : {SigmaVariant::Centered, SigmaVariant::Zeroed}) {
    const AtomicMeasure s = sigma_truncated(cfg, 8, var, &zt);
    CHECK(s.size() == 511);
    double prev = -1.0;
    for (const Atom& a : s.atoms()) {
      CHECK(gap(a.index).contains(a.position));
      CHECK(a.generation == a.index.k);
      CHECK(a.position > prev);
      prev = a.position;
    }
  }
}

TEST_CASE("restrict and cylinder masses") {
  const ExponentConfig cfg = make_config(3.0);
  const AtomicMeasure s = sigma_truncated(cfg, 12, SigmaVariant::Centered);
  const AtomicMeasure all = restrict(s, interval({0, 1}));
  CHECK(all.size() == s.size());
  CHECK(all.total_mass() == s.total_mass());
  CHECK(restrict(s, Interval(4, 5, 1)).empty());
  for (int k = 0; k <= 6; ++k) {
    for (std::int64_t j = 1; j <= (std::int64_t{1} << k); j += 3) {
      // sum_{l=k}^{L} 2^{l-k} s^l
      double oracle = 0.0;
      for (int l = k; l <= 12; ++l) oracle += std::pow(2.0, l - k) * sigma_weight(cfg, l);
      const Interval iv = interval({k, j});
      CHECK(rel(s.mass_in(iv), oracle) <= 1e-12);
      CHECK(rel(restrict(s, iv).total_mass(), oracle) <= 1e-12);
      CHECK(rel(sigma_cylinder_mass_closed_form(cfg, k, 12), oracle) <= 1e-12);
    }
  }
}

TEST_CASE("atomic measure rejects repeated positions and bad masses") {
  std::vector<Atom> dup{{0.5, 1.0, 0.0, 0, {0, 1}}, {0.5, 1.0, 0.0, 0, {0, 1}}};
  CHECK_THROWS_AS(AtomicMeasure(dup, {}), Error);
  std::vector<Atom> neg{{0.5, -1.0, 0.0, 0, {0, 1}}};
  CHECK_THROWS_AS(AtomicMeasure(neg, {}), Error);
  std::vector<Atom> unsorted{{0.7, 1.0, 0.0, 0, {0, 1}}, {0.2, 2.0, 0.0, 0, {0, 1}}};
  const AtomicMeasure m(unsorted, {});
  CHECK(m.atoms()[0].position == 0.2);
  CHECK(m.total_mass() == 3.0);
}
