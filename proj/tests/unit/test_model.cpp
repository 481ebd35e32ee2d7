#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "atlas/errors.hpp"
#include "atlas/model.hpp"
#include "atlas/stats.hpp"
#include "doctest.h"

using atlas::ParticleSystemState;

TEST_CASE("ranking breaks ties by name") {
  const auto s = ParticleSystemState::from_positions({0.5, -1.0, 0.5, 2.0, -1.0});
  CHECK(s.name_at_rank == std::vector<atlas::Name>{1, 4, 0, 2, 3});
  for (atlas::Rank k = 0; k < s.size(); ++k) CHECK(s.rank_of[s.name_at_rank[k]] == k);
  CHECK(s.leftmost() == -1.0);
  CHECK(s.rightmost() == 2.0);
  CHECK(s.ranked_positions() == std::vector<double>{-1.0, -1.0, 0.5, 0.5, 2.0});
  CHECK_NOTHROW(atlas::validate(s));
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS((void)ParticleSystemState::from_positions({}), atlas::ParameterError);
  CHECK_THROWS_AS((void)ParticleSystemState::from_positions({0.0, std::numeric_limits<double>::quiet_NaN()}),
                  atlas::ParameterError);
  auto s = ParticleSystemState::from_positions({0.0, 1.0, 2.0});
  s.positions[0] = 5.0;
  CHECK_THROWS_AS(atlas::validate(s), atlas::ParameterError);
  s = ParticleSystemState::from_positions({0.0, 1.0});
  s.accumulated_drift[0] = -1.0;
  CHECK_THROWS_AS(atlas::validate(s), atlas::ParameterError);
  s = ParticleSystemState::from_positions({0.0, 1.0});
  s.rank_of[0] = 1;
  CHECK_THROWS_AS(atlas::validate(s), atlas::ParameterError);
  CHECK_THROWS_AS((void)atlas::sample_ppp_half_line(0.0, 10, 1), atlas::ParameterError);
  CHECK_THROWS_AS((void)atlas::sample_ppp_half_line(-2.0, 10, 1), atlas::ParameterError);
  CHECK_THROWS_AS((void)atlas::sample_ppp_half_line(1.0, 0, 1), atlas::ParameterError);
  const std::vector<double> bad = {1.0, 0.0};
  CHECK_THROWS_AS((void)atlas::sample_spacings_law(bad, 3, 1), atlas::ParameterError);
}

TEST_CASE("spacings round-trip to ranked positions") {
  const auto s = atlas::sample_ppp_half_line(1.5, 500, 9);
  const auto sp = atlas::spacings_of(s);
  REQUIRE(sp.gaps.size() == 499);
  for (double g : sp.gaps) CHECK(g >= 0.0);
  const auto back = atlas::positions_from_spacings(s.leftmost(), sp);
  const auto ranked = s.ranked_positions();
  for (std::size_t k = 0; k < ranked.size(); ++k) CHECK(back[k] == doctest::Approx(ranked[k]).epsilon(1e-13));
}

TEST_CASE("Poisson half-line start is anchored at the origin with exponential gaps") {
  const double lambda = 2.5;
  const auto s = atlas::sample_ppp_half_line(lambda, 20000, 77);
  CHECK(s.leftmost() == 0.0);
  const auto gaps = atlas::spacings_of(s).gaps;
  const double d = atlas::stats::ks_statistic(gaps, [&](double x) { return atlas::stats::exponential_cdf(lambda, x); });
  CHECK(d < atlas::stats::ks_critical_value(gaps.size(), 0.01));
  // Same seed, same configuration.
  CHECK(atlas::sample_ppp_half_line(lambda, 20000, 77).positions == s.positions);
  CHECK(atlas::sample_ppp_half_line(lambda, 20000, 78).positions != s.positions);
}

TEST_CASE("product-exponential spacings law uses per-gap rates") {
  const std::vector<double> rates = {1.0, 4.0};
  std::vector<double> g1;
  std::vector<double> g2;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    const auto s = atlas::sample_spacings_law(rates, 3, seed);
    const auto g = atlas::spacings_of(s).gaps;
    g1.push_back(g[0]);
    g2.push_back(g[1]);
  }
  CHECK(atlas::stats::mean(g1) == doctest::Approx(1.0).epsilon(0.06));
  CHECK(atlas::stats::mean(g2) == doctest::Approx(0.25).epsilon(0.06));
  const atlas::InitialLaw law = atlas::ProductExponentialSpacings{{3.0}, 0.0};
  const auto s = atlas::sample_initial(law, 5, 1);
  CHECK(s.size() == 5);
}

TEST_CASE("invariant rate sequences") {
  CHECK(atlas::finite_atlas_invariant_rates(4) == std::vector<double>{1.5, 1.0, 0.5});
  CHECK(atlas::finite_atlas_invariant_rates(1).empty());
  CHECK(atlas::tilted_invariant_rates(0.5, 3) == std::vector<double>{2.5, 3.0, 3.5});
}

TEST_CASE("drift specs") {
  const auto a = atlas::DriftSpec::atlas();
  CHECK(a.gamma_at(0) == 1.0);
  CHECK(a.gamma_at(1) == 0.0);
  CHECK(a.gamma_at(1000000) == 0.0);
  CHECK(a.sigma_at(0) == 1.0);
  CHECK(a.active_prefix() == 1);
  const auto h = atlas::DriftSpec::harris();
  CHECK(h.active_prefix() == 0);
  CHECK(h.max_abs_gamma() == 0.0);
  atlas::DriftSpec bad;
  bad.sigma = {1.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), atlas::ParameterError);
}

TEST_CASE("configuration CSV and JSON round trips") {
  auto s = atlas::sample_ppp_half_line(1.0, 50, 3);
  s.sim_time = 1.25;
  s.step_index = 125;
  s.accumulated_drift[s.name_at_rank[0]] = 0.75;

  std::stringstream csv;
  atlas::write_configuration_csv(csv, s);
  const auto c = atlas::read_configuration_csv(csv);
  CHECK(c.positions == s.positions);

  const auto j = atlas::configuration_from_json(atlas::configuration_to_json(s));
  CHECK(j.positions == s.positions);
  CHECK(j.accumulated_drift == s.accumulated_drift);
  CHECK(j.sim_time == 1.25);
  CHECK(j.step_index == 125);

  std::istringstream bad_header("x,y\n1,0\n");
  CHECK_THROWS_AS((void)atlas::read_configuration_csv(bad_header), atlas::ParameterError);
  std::istringstream dup("name,position\n1,0\n1,2\n");
  CHECK_THROWS_AS((void)atlas::read_configuration_csv(dup), atlas::ParameterError);
  CHECK_THROWS_AS((void)atlas::configuration_from_json(R"({"schema":"other","positions":[0]})"), atlas::ParameterError);
}
