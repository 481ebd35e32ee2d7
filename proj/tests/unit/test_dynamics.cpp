#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "atlas/dynamics.hpp"
#include "atlas/errors.hpp"
#include "atlas/stats.hpp"
#include "doctest.h"

using atlas::DriftSpec;
using atlas::LocalizedEngine;
using atlas::ParticleStreams;
using atlas::ParticleSystemState;
using atlas::StepConfig;

namespace {

StepConfig with_dt(double dt) {
  StepConfig c;
  c.dt = dt;
  return c;
}

}  // namespace

TEST_CASE("single Atlas particle gets the full drift") {
  auto s = ParticleSystemState::from_positions({0.0});
  const ParticleStreams streams(1);
  const double z = streams.normal(0, 0);
  atlas::step(s, DriftSpec::atlas(), with_dt(0.01), streams);
  CHECK(s.positions[0] == doctest::Approx(0.01 + 0.1 * z).epsilon(1e-15));
  CHECK(s.accumulated_drift[0] == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(s.sim_time == doctest::Approx(0.01));
  CHECK(s.step_index == 1);
}

TEST_CASE("ranks are frozen at the start of the step") {
  // Particle 1 is leftmost at the start, so it alone carries the drift even if
  // it overtakes particle 0 during the step.
  auto s = ParticleSystemState::from_positions({0.0, -1e-9});
  atlas::step(s, DriftSpec::atlas(), with_dt(0.5), ParticleStreams(4));
  CHECK(s.accumulated_drift[1] == 0.5);
  CHECK(s.accumulated_drift[0] == 0.0);
  CHECK_NOTHROW(atlas::validate(s));
}

TEST_CASE("Harris system accumulates no drift") {
  auto s = atlas::sample_ppp_half_line(1.0, 200, 3);
  atlas::run(s, DriftSpec::harris(), with_dt(0.01), 5.0, nullptr, ParticleStreams(3));
  CHECK(s.total_accumulated_drift() == 0.0);
}

TEST_CASE("total drift equals elapsed time for the Atlas model") {
  auto s = atlas::sample_ppp_half_line(1.0, 1000, 5);
  const ParticleStreams streams(5);
  const auto cfg = with_dt(0.01);
  for (int m = 1; m <= 500; ++m) {
    atlas::step(s, DriftSpec::atlas(), cfg, streams);
    const double expected = m * cfg.dt;
    REQUIRE(std::fabs(s.total_accumulated_drift() - expected) <=
            10.0 * std::numeric_limits<double>::epsilon() * m * expected);
  }
  CHECK_NOTHROW(atlas::validate(s));
}

TEST_CASE("resort: adaptive insertion equals the full-sort oracle") {
  auto s = ParticleSystemState::from_positions({0.0, 1.0, 2.0, 3.0});
  CHECK(atlas::resort(s) == 0);
  s.positions[1] = 2.5;
  CHECK(atlas::resort(s) == 1);
  CHECK(s.name_at_rank == std::vector<atlas::Name>{0, 2, 1, 3});

  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(1000);
    for (auto& v : x) v = nd(gen);
    x[10] = x[20];  // exact tie
    auto a = ParticleSystemState::from_positions(std::vector<double>(x.size(), 0.0));
    a.positions = x;
    auto b = a;
    atlas::resort(a, atlas::ResortStrategy::kAdaptiveInsertion);
    atlas::resort(b, atlas::ResortStrategy::kFullSort);
    REQUIRE(a.name_at_rank == b.name_at_rank);
    REQUIRE(a.rank_of == b.rank_of);
    CHECK_NOTHROW(atlas::validate(a));
  }
}

TEST_CASE("all orderings of a three-way tie resolve by name") {
  std::vector<atlas::Name> perm = {0, 1, 2};
  do {
    auto s = ParticleSystemState::from_positions({1.0, 1.0, 1.0});
    s.name_at_rank = perm;
    for (atlas::Rank k = 0; k < 3; ++k) s.rank_of[perm[k]] = k;
    atlas::resort(s);
    CHECK(s.name_at_rank == std::vector<atlas::Name>{0, 1, 2});
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("run is deterministic and records snapped sample times") {
  auto a = atlas::sample_ppp_half_line(1.0, 300, 8);
  auto b = a;
  atlas::TrajectoryRecorder rec;
  rec.sample_times = {0.0, 0.104, 1.0};
  rec.tracked_ranks = {0, 4};
  atlas::run(a, DriftSpec::atlas(), with_dt(0.01), 1.0, &rec, ParticleStreams(8));
  atlas::run(b, DriftSpec::atlas(), with_dt(0.01), 1.0, nullptr, ParticleStreams(8));
  CHECK(a.positions == b.positions);
  REQUIRE(rec.recorded.size() == 3);
  CHECK(rec.recorded[0].time == 0.0);
  CHECK(rec.recorded[1].step_index == 10);
  CHECK(rec.recorded[2].leftmost == a.leftmost());
  CHECK(rec.recorded[2].tracked[1] == a.ranked_position(4));

  // Zero-length run is the identity.
  auto c = atlas::sample_ppp_half_line(1.0, 10, 2);
  const auto before = c.positions;
  atlas::TrajectoryRecorder r0;
  r0.sample_times = {0.0, 1.0};
  atlas::run(c, DriftSpec::atlas(), with_dt(0.01), 0.0, &r0, ParticleStreams(2));
  CHECK(c.positions == before);
  CHECK(r0.recorded.size() == 1);

  atlas::TrajectoryRecorder bad;
  bad.sample_times = {1.0, 0.5};
  CHECK_THROWS_AS(atlas::run(c, DriftSpec::atlas(), with_dt(0.01), 2.0, &bad, ParticleStreams(2)), atlas::ParameterError);
  CHECK_THROWS_AS(atlas::run(c, DriftSpec::atlas(), with_dt(-1.0), 2.0, nullptr, ParticleStreams(2)),
                  atlas::ParameterError);
}

TEST_CASE("non-finite positions raise a numerical error") {
  auto s = ParticleSystemState::from_positions({0.0, 1.0});
  DriftSpec d = DriftSpec::atlas(std::numeric_limits<double>::max());
  s.positions[0] = std::numeric_limits<double>::max();
  s.positions[1] = std::numeric_limits<double>::max();
  CHECK_THROWS_AS(atlas::step(s, d, with_dt(10.0), ParticleStreams(1)), atlas::NumericalError);
}

TEST_CASE("leftmost occupation histogram partitions elapsed time") {
  auto one = ParticleSystemState::from_positions({0.0});
  atlas::TrajectoryRecorder r1;
  r1.track_leftmost_names = true;
  atlas::run(one, DriftSpec::atlas(), with_dt(0.01), 1.0, &r1, ParticleStreams(1));
  const auto h1 = atlas::leftmost_occupation_histogram(r1);
  REQUIRE(h1.size() == 1);
  CHECK(h1[0].name == 0);
  CHECK(h1[0].steps == 100);

  auto s = atlas::sample_ppp_half_line(1.0, 50, 6);
  atlas::TrajectoryRecorder rec;
  rec.track_leftmost_names = true;
  atlas::run(s, DriftSpec::atlas(), with_dt(0.01), 20.0, &rec, ParticleStreams(6));
  const auto h = atlas::leftmost_occupation_histogram(rec);
  std::uint64_t total = 0;
  for (const auto& e : h) {
    CHECK(e.steps > 0);
    CHECK(e.time >= 0.0);
    total += e.steps;
  }
  CHECK(total == 2000);
  CHECK(h.size() > 1);

  atlas::TrajectoryRecorder none;
  CHECK_THROWS_AS((void)atlas::leftmost_occupation_histogram(none), atlas::UnsupportedQueryError);
}

TEST_CASE("localized engine with an unbounded buffer is bit-identical to the full engine") {
  const auto init = atlas::sample_ppp_half_line(1.0, 200, 21);
  auto full = init;
  atlas::run(full, DriftSpec::atlas(), with_dt(0.01), 3.0, nullptr, ParticleStreams(21));
  LocalizedEngine eng(init, DriftSpec::atlas(), with_dt(0.01), 21, atlas::LocalizationConfig{1e6, 0.1, 1.0});
  CHECK(eng.active_count() == 200);
  eng.advance_to(3.0);
  const auto loc = eng.snapshot();
  CHECK(loc.positions == full.positions);
  CHECK(loc.accumulated_drift == full.accumulated_drift);
  CHECK(loc.step_index == full.step_index);
}

TEST_CASE("localized engine matches the full engine in law") {
  const int R = 300;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> a5;
  std::vector<double> b5;
  for (int r = 0; r < R; ++r) {
    const auto init = atlas::sample_ppp_half_line(1.0, 400, 1000 + r);
    auto full = init;
    atlas::run(full, DriftSpec::atlas(), with_dt(0.01), 4.0, nullptr, ParticleStreams(5000 + r));
    a.push_back(full.leftmost());
    a5.push_back(full.ranked_position(5) - full.ranked_position(4));
    LocalizedEngine eng(init, DriftSpec::atlas(), with_dt(0.01), 9000 + r);
    eng.advance_to(4.0);
    CHECK(eng.active_count() < 400);
    CHECK(eng.total_accumulated_drift() == doctest::Approx(4.0).epsilon(1e-12));
    const auto snap = eng.snapshot();
    b.push_back(snap.leftmost());
    b5.push_back(snap.ranked_position(5) - snap.ranked_position(4));
  }
  const double crit = 1.628 * std::sqrt(2.0 / R);
  CHECK(atlas::stats::ks_two_sample(a, b) < crit);
  CHECK(atlas::stats::ks_two_sample(a5, b5) < crit);
}

TEST_CASE("localized engine supports the driftless Harris system") {
  // Leftmost of a driftless system from a Poisson start drifts to -infinity.
  int negative = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto init = atlas::sample_ppp_half_line(1.0, 10000, atlas::derive_seed(314, r));
    LocalizedEngine eng(init, DriftSpec::harris(), with_dt(0.01), atlas::derive_seed(271, r));
    atlas::TrajectoryRecorder rec;
    rec.sample_times = {100.0};
    eng.advance_to(100.0, &rec);
    REQUIRE(rec.recorded.size() == 1);
    negative += rec.recorded[0].leftmost < 0.0 ? 1 : 0;
  }
  CHECK(negative >= 95);
}

TEST_CASE("Exp(2) spacings are stationary for the Atlas model") {
  const std::vector<double> rates = {2.0};
  const auto init = atlas::sample_spacings_law(atlas::ProductExponentialSpacings{rates, 2.0}, 10000, 99);
  LocalizedEngine eng(init, DriftSpec::atlas(), with_dt(1e-3), 100);
  eng.advance_to(10.0);
  const auto s = eng.snapshot();
  const auto gaps = atlas::spacings_of(s).gaps;
  const std::vector<double> first(gaps.begin(), gaps.begin() + 100);
  const double d = atlas::stats::ks_statistic(first, [](double x) { return atlas::stats::exponential_cdf(2.0, x); });
  CHECK(d < atlas::stats::ks_critical_value(first.size(), 0.01));
}

TEST_CASE("finite Atlas model keeps its invariant spacings law") {
  const std::size_t n = 4;
  const auto rates = atlas::finite_atlas_invariant_rates(n);
  const int R = 400;
  std::vector<std::vector<double>> gaps(n - 1);
  for (int r = 0; r < R; ++r) {
    auto s = atlas::sample_spacings_law(rates, n, 40 + r);
    atlas::run(s, DriftSpec::atlas(), with_dt(1e-3), 5.0, nullptr, ParticleStreams(7000 + r));
    const auto g = atlas::spacings_of(s).gaps;
    for (std::size_t k = 0; k + 1 < n; ++k) gaps[k].push_back(g[k]);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double expected = 1.0 / rates[k];
    const double se = expected / std::sqrt(static_cast<double>(R));
    CAPTURE(k);
    CHECK(std::fabs(atlas::stats::mean(gaps[k]) - expected) < 4.0 * se);
  }
}

TEST_CASE("localized engine rejects unsupported drift specs") {
  const auto init = atlas::sample_ppp_half_line(1.0, 10, 1);
  DriftSpec d;
  d.gamma_tail = 0.5;
  CHECK_THROWS_AS(LocalizedEngine(init, d, with_dt(0.01), 1), atlas::ParameterError);
  CHECK_THROWS_AS(LocalizedEngine(init, DriftSpec::atlas(), with_dt(0.01), 1, atlas::LocalizationConfig{0.0, 0.1, 1.0}),
                  atlas::ParameterError);
}
