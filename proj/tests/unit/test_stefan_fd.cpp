#include <algorithm>
#include <cmath>
#include <sstream>

#include "atlas/errors.hpp"
#include "atlas/measure.hpp"
#include "atlas/stefan_analytic.hpp"
#include "atlas/stefan_fd.hpp"
#include "doctest.h"

namespace fd = atlas::stefan_fd;

TEST_CASE("flat equilibrium profile is stationary") {
  auto s = fd::fd_init(2.0, 0.05, 50.0);
  CHECK(s.y == 0.0);
  CHECK(std::all_of(s.u.begin(), s.u.end(), [](double u) { return u == 2.0; }));
  CHECK(fd::front_speed(s) == 0.0);
  fd::fd_advance(s, 0.5);
  CHECK(s.y == 0.0);
  CHECK(std::all_of(s.u.begin(), s.u.end(), [](double u) { return u == 2.0; }));
  const auto p = fd::fd_profile(s);
  CHECK(std::all_of(p.bin_density.begin(), p.bin_density.end(), [](double u) { return u == 2.0; }));
}

TEST_CASE("initial state pins the boundary values and has finite excess mass") {
  for (double lambda : {0.5, 1.0, 4.0}) {
    CAPTURE(lambda);
    const auto s = fd::fd_init(lambda, 0.02, 50.0);
    CHECK(s.u.front() == 2.0);
    CHECK(std::fabs(s.u.back() - lambda) <= 1e-6);
    CHECK(s.t == doctest::Approx(1e-3));
    CHECK(s.xi.back() == doctest::Approx(50.0));
    double excess = 0.0;
    for (double u : s.u) excess += (u - lambda) * s.dxi;
    CHECK(std::isfinite(excess));
    CHECK(std::fabs(excess) < 1.0);
    // The shooting bootstrap lands on the same front coefficient as the
    // closed form, though it is computed independently.
    CHECK(s.bootstrap_coefficient == doctest::Approx(atlas::stefan::solve_kappa(lambda).kappa).epsilon(1e-8));
  }
  CHECK(fd::bootstrap_front_coefficient(2.0) == 0.0);
}

TEST_CASE("invalid configurations") {
  CHECK_THROWS_AS((void)fd::fd_init(0.0, 0.02, 50.0), atlas::ParameterError);
  CHECK_THROWS_AS((void)fd::fd_init(1.0, 0.0, 50.0), atlas::ParameterError);
  CHECK_THROWS_AS((void)fd::fd_init(1.0, 0.02, 20.0), atlas::ParameterError);
  fd::FdConfig cfg;
  cfg.cfl = 0.6;
  CHECK_THROWS_AS((void)fd::fd_init(1.0, cfg), atlas::ConfigurationError);
  cfg.scheme = fd::TimeScheme::kCrankNicolson;
  CHECK_NOTHROW((void)fd::fd_init(1.0, cfg));

  // A steep front makes the upwinded advection violate the explicit bound.
  auto s = fd::fd_init(1.0, 0.02, 50.0);
  s.u[1] = 200.0;
  CHECK_THROWS_AS(fd::fd_step(s), atlas::ConfigurationError);

  auto neg = fd::fd_init(1.0, 0.02, 50.0);
  neg.u[100] = -1.0;
  try {
    fd::fd_step(neg);
    FAIL("expected an instability error");
  } catch (const atlas::InstabilityError& e) {
    CHECK(std::string(e.what()).find("negative density") != std::string::npos);
  }
}

TEST_CASE("front position at t = 1 agrees with the closed form") {
  const auto one = atlas::stefan::solve_kappa(1.0);
  auto s1 = fd::fd_init(1.0, 0.01, 50.0);
  fd::fd_advance(s1, 1.0);
  CHECK(s1.t == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(s1.y - one.kappa) <= 0.02 * one.kappa);

  const auto four = atlas::stefan::solve_kappa(4.0);
  auto s4 = fd::fd_init(4.0, 0.02, 50.0);
  fd::fd_advance(s4, 1.0);
  CHECK(s4.y < 0.0);
  CHECK(std::fabs(s4.y - four.kappa) <= 0.02 * std::fabs(four.kappa));
}

TEST_CASE("discrete maximum principle and self-similarity") {
  for (double lambda : {1.0, 4.0}) {
    CAPTURE(lambda);
    auto s = fd::fd_init(lambda, fd::FdConfig{});
    const double lo = std::min(lambda, 2.0) - 1e-3;
    const double hi = std::max(lambda, 2.0) + 1e-3;
    double ref = 0.0;
    for (double t : {0.25, 0.5, 0.75, 1.0}) {
      fd::fd_advance(s, t);
      for (double u : s.u) {
        REQUIRE(u >= lo);
        REQUIRE(u <= hi);
      }
      const double ratio = s.y / std::sqrt(t);
      if (t == 0.25) ref = ratio;
      CHECK(std::fabs(ratio - ref) <= 0.01 * std::fabs(ref));
    }
  }
}

TEST_CASE("Crank-Nicolson agrees with the explicit scheme") {
  fd::FdConfig cfg;
  cfg.scheme = fd::TimeScheme::kCrankNicolson;
  cfg.cfl = 2.0;
  auto cn = fd::fd_init(1.0, cfg);
  auto ex = fd::fd_init(1.0, fd::FdConfig{});
  fd::fd_advance(cn, 1.0);
  fd::fd_advance(ex, 1.0);
  CHECK(cn.steps < ex.steps);
  CHECK(cn.y == doctest::Approx(ex.y).epsilon(0.01));
  double sup = 0.0;
  for (std::size_t j = 0; j < ex.u.size(); ++j) sup = std::max(sup, std::fabs(cn.u[j] - ex.u[j]));
  CHECK(sup < 0.01);
}

TEST_CASE("profile export shifts the grid to lab coordinates") {
  auto s = fd::fd_init(1.0, 0.05, 50.0);
  fd::fd_advance(s, 0.2);
  const auto p = fd::fd_profile(s);
  REQUIRE(p.bin_edges.size() == s.xi.size());
  REQUIRE(p.bins() == s.u.size() - 1);
  for (std::size_t j = 0; j < s.xi.size(); ++j) CHECK(p.bin_edges[j] == s.xi[j] + s.y);
  double trapezoid = 0.0;
  for (std::size_t j = 0; j + 1 < s.u.size(); ++j) trapezoid += 0.5 * (s.u[j] + s.u[j + 1]) * s.dxi;
  CHECK(p.mass() == doctest::Approx(trapezoid).epsilon(1e-12));
  std::ostringstream os;
  atlas::write_density_csv(os, p, {{"t", "0.2"}});
  CHECK(os.str().rfind("# t=0.2\nx,value\n", 0) == 0);
}
