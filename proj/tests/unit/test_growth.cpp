#include <doctest.h>

#include <cmath>

#include "weightlab/error.hpp"
#include "weightlab/growth.hpp"

using namespace weightlab;

TEST_CASE("exact model recovers alpha") {
  const ExponentConfig cfg = make_config(4.0, 1.0);
  std::vector<GrowthPoint> pts;
  for (long long n : geometric_grid(3.0, 6.0, 13)) {
    const double x = static_cast<double>(n);
    pts.push_back({x, x / std::pow(std::log(x), 2.0)});
  }
  const GrowthFit fit = fit_growth(cfg, pts);
  CHECK(std::fabs(fit.alpha - 1.0) <= 1e-10);
  CHECK(fit.target == doctest::Approx(1.0));
  CHECK(fit.residuals.size() == pts.size());
  CHECK(fit.max_residual <= 1e-10);
}

TEST_CASE("fit errors") {
  const ExponentConfig cfg = make_config(4.0);
  auto expect_fit_error = [&](const std::vector<GrowthPoint>& pts) {
    try {
      fit_growth(cfg, pts);
      FAIL("expected Fit error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Fit);
    }
  };
  expect_fit_error({{10, 1}, {100, 2}, {1000, 3}});
  expect_fit_error({{100, 1}, {100, 2}, {100, 3}, {100, 4}});
  expect_fit_error({{10, 1}, {100, 0}, {1000, 3}, {10000, 4}});
  expect_fit_error({{10, 1}, {100, -2}, {1000, 3}, {10000, 4}});
}

TEST_CASE("raw slope and grid") {
  std::vector<GrowthPoint> pts{{10, 100}, {100, 10000}, {1000, 1e6}};
  CHECK(loglog_slope(pts) == doctest::Approx(2.0));
  const auto g = geometric_grid(3.0, 6.0, 13);
  CHECK(g.size() == 13);
  CHECK(g.front() == 1000);
  CHECK(g.back() == 1000000);
  CHECK(g[4] == 10000);
  CHECK_THROWS_AS(geometric_grid(3.0, 3.0, 5), Error);
}
