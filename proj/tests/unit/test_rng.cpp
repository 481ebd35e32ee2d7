#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <set>
#include <vector>

#include "atlas/rng.hpp"
#include "atlas/stats.hpp"
#include "doctest.h"

using atlas::ParticleStreams;
using atlas::Philox4x32;
using atlas::StreamPurpose;

TEST_CASE("philox4x32-10 reproduces the Random123 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(C{~0u, ~0u, ~0u, ~0u}, K{~0u, ~0u}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("inverse normal CDF agrees with the Boost quantile") {
  const boost::math::normal_distribution<double> nd;
  std::vector<double> ps = {1e-300, 1e-100, 1e-20, 1e-10, 1e-5, 0.001, 0.02425, 0.1, 0.3, 0.425, 0.5,
                            0.575,  0.7,    0.9,   0.97575, 0.999, 1 - 1e-5, 1 - 1e-10};
  for (int i = 1; i < 1000; ++i) ps.push_back(i / 1000.0);
  for (double p : ps) {
    const double ref = boost::math::quantile(nd, p);
    const double got = atlas::inverse_normal_cdf(p);
    CAPTURE(p);
    CHECK(std::fabs(got - ref) <= 1e-14 * std::max(1.0, std::fabs(ref)));
  }
  CHECK(atlas::inverse_normal_cdf(0.5) == 0.0);
}

TEST_CASE("stream draws are pure functions of (seed, name, index, purpose)") {
  const ParticleStreams a(42);
  const ParticleStreams b(42);
  const ParticleStreams c(43);
  CHECK(a.seed() == 42);
  for (std::uint32_t name = 0; name < 10; ++name) {
    for (std::uint64_t idx : {0ULL, 1ULL, 1ULL << 32, (1ULL << 40) + 5}) {
      CHECK(a.bits(name, idx) == b.bits(name, idx));
      CHECK(a.bits(name, idx) != c.bits(name, idx));
      CHECK(a.bits(name, idx, StreamPurpose::kStep) != a.bits(name, idx, StreamPurpose::kInitial));
      CHECK(a.bits(name, idx, StreamPurpose::kLazyJump) != a.bits(name, idx, StreamPurpose::kAuxiliary));
    }
  }
  // High and low words of the index land in different counter slots.
  CHECK(a.bits(0, 1) != a.bits(0, 1ULL << 32));
}

TEST_CASE("uniforms lie strictly inside (0, 1) and normals have unit variance") {
  const ParticleStreams s(7);
  std::vector<double> z;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform(3, i);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    z.push_back(s.normal(5, i));
  }
  const double m = atlas::stats::mean(z);
  const double sd = atlas::stats::stddev(z);
  CHECK(std::fabs(m) < 5.0 / std::sqrt(n));
  CHECK(std::fabs(sd - 1.0) < 5.0 * std::sqrt(0.5 / n));
  const boost::math::normal_distribution<double> nd;
  const double d = atlas::stats::ks_statistic(z, [&](double x) { return boost::math::cdf(nd, x); });
  CHECK(d < atlas::stats::ks_critical_value(z.size(), 0.01));
}

TEST_CASE("exponential draws have the requested rate") {
  const ParticleStreams s(11);
  std::vector<double> e;
  for (std::uint32_t i = 0; i < 50000; ++i) e.push_back(s.exponential(2.5, i, 0));
  const double d = atlas::stats::ks_statistic(e, [](double x) { return atlas::stats::exponential_cdf(2.5, x); });
  CHECK(d < atlas::stats::ks_critical_value(e.size(), 0.01));
}

TEST_CASE("derived replica seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 100000; ++r) seen.insert(atlas::derive_seed(12345, r));
  CHECK(seen.size() == 100000);
  CHECK(atlas::derive_seed(1, 0) != atlas::derive_seed(2, 0));
  CHECK(atlas::derive_seed(1, 7) == atlas::derive_seed(1, 7));
}
