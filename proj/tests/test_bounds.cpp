#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrno/bounds.hpp"
#include "lrno/instances.hpp"

using namespace lrno;
using namespace lrno::bounds;

TEST_CASE("closed-form values") {
  CHECK(global_bound(0.2, 1.2, 0.5, 0.1) == doctest::Approx(0.96).epsilon(1e-14));
  CHECK(local_constant(0.3, 1.5, 1.0) == doctest::Approx(2.2677868380553634).epsilon(1e-14));
  CHECK(local_bound(0.6, 1.1, 0.1, 0.05, 0.3, 1.5, 1.0) == doctest::Approx(0.8641494440124776).epsilon(1e-13));
  CHECK(convergence_radius(0.2, 0.1, 0.05, 1.0, 0.1) == doctest::Approx(0.5846701617060339).epsilon(1e-13));
  CHECK(max_step(2.0, 3, 0.2, 0.1, 0.05, 2.5) == doctest::Approx(0.0072659241509965096).epsilon(1e-13));
  CHECK(zeta_alpha(1.0, 0.5, 1.0) == doctest::Approx(2.1973682269356196).epsilon(1e-14));
  CHECK(strict_saddle_noise_cap(0.1, 1.0, 0.2, 0.5, 1.0) == doctest::Approx(0.14014753460264262).epsilon(1e-13));
}

TEST_CASE("noiseless bounds vanish") {
  CHECK(global_bound(0.3, 1.0, 0.0, 0.0) == 0.0);
  CHECK(local_bound(0.9, 1.0, 0.0, 0.0, 0.1, 1.5, 1.0) == 0.0);
}

TEST_CASE("hypothesis violations throw") {
  CHECK_THROWS_AS(global_bound(1.0 / 3.0, 1.0, 0.0, 0.1), DomainError);
  CHECK_THROWS_AS(global_bound(0.2, 1.0, 1.0, 0.2), DomainError);
  CHECK_THROWS_AS(local_bound(0.6, 1.0, 0.0, 0.1, 0.7, 1.5, 1.0), DomainError);
  CHECK_THROWS_AS(local_constant(0.3, 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(max_step(0.0, 1, 0.1, 0.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(strict_saddle_noise_cap(0.4, 1.0, 0.0, 0.1, 1.0), DomainError);
  CHECK(convergence_radius(0.5, 0.0, 0.0, 0.01, 10.0) == 0.0);
}

TEST_CASE("global inversion round trips") {
  for (double xi : {0.5, 1.0, 4.0}) {
    for (double eps : {0.01, 0.05, 0.1}) {
      const DeltaCap cap = max_delta_global(xi, eps, 1.3, 0.2);
      REQUIRE(cap.delta.has_value());
      CHECK(cap.binding == DeltaBinding::formula);
      CHECK(global_bound(*cap.delta, 1.3, 0.2, eps) == doctest::Approx(xi).epsilon(1e-10));
    }
  }
  CHECK_FALSE(max_delta_global(0.1, 1.0, 1.0, 0.0).delta.has_value());
  const DeltaCap free = max_delta_global(1.0, 0.0, 1.0, 0.0);
  REQUIRE(free.delta.has_value());
  CHECK(free.binding == DeltaBinding::third);
  CHECK(*free.delta < 1.0 / 3.0);
}

TEST_CASE("local inversion round trips") {
  for (double xi : {0.2, 1.0, 3.0}) {
    const DeltaCap cap = max_delta_local(xi, 0.05, 1.1, 0.1, 0.3, 1.5, 1.0);
    REQUIRE(cap.delta.has_value());
    CHECK(local_bound(*cap.delta, 1.1, 0.1, 0.05, 0.3, 1.5, 1.0) == doctest::Approx(xi).epsilon(1e-10));
  }
  CHECK_FALSE(max_delta_local(1e-4, 1.0, 1.0, 0.0, 0.3, 1.5, 1.0).delta.has_value());
  CHECK(max_delta_local(1.0, 0.0, 1.0, 0.0, 0.3, 1.5, 1.0).binding == DeltaBinding::rip_cap);
}

TEST_CASE("contour grid order, csv and monotonicity") {
  ContourConfig cfg;
  cfg.theorem = Theorem::global;
  cfg.xi_grid = linspace(1.0, 200.0, 12);
  cfg.p_grid = linspace(0.05, 0.95, 7);
  const auto cells = contour_grid(cfg, 1);
  REQUIRE(cells.size() == 84);
  CHECK(cells[1].xi == cfg.xi_grid[1]);
  CHECK(cells[12].p == cfg.p_grid[1]);
  CHECK(cells[0].epsilon == noise_tail_epsilon(cfg.p_grid[0], cfg.m, cfg.sigma));
  const auto threaded = contour_grid(cfg, 4);
  CHECK(contour_csv(threaded) == contour_csv(cells));
  const std::string csv = contour_csv(cells);
  CHECK(csv.rfind("xi,p,epsilon,delta\n", 0) == 0);
  CHECK(csv.find("infeasible") != std::string::npos);
  for (std::size_t pi = 0; pi < 7; ++pi) {
    for (std::size_t xi = 1; xi < 12; ++xi) {
      const auto& a = cells[pi * 12 + xi - 1];
      const auto& b = cells[pi * 12 + xi];
      if (a.delta) CHECK((b.delta && *b.delta >= *a.delta));
    }
  }
}

TEST_CASE("linspace endpoints") {
  const auto v = linspace(0.0, 1.0, 5);
  CHECK(v.size() == 5);
  CHECK(v.front() == 0.0);
  CHECK(v.back() == 1.0);
  CHECK(linspace(2.0, 3.0, 1) == std::vector<double>{2.0});
}
