#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "atlas/errors.hpp"
#include "atlas/stats.hpp"
#include "doctest.h"

namespace stats = atlas::stats;

namespace {

// Brute force: evaluate the empirical CDF by counting at every sample point
// and just below it.
double brute_ks(const std::vector<double>& xs, const std::function<double(double)>& F) {
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (double x : xs) {
    double at = 0.0;
    double below = 0.0;
    for (double y : xs) {
      at += y <= x ? 1.0 : 0.0;
      below += y < x ? 1.0 : 0.0;
    }
    d = std::max({d, std::fabs(at / n - F(x)), std::fabs(below / n - F(x))});
  }
  return d;
}

double brute_ks2(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  double d = 0.0;
  for (double x : pts) {
    const double fa = static_cast<double>(std::count_if(a.begin(), a.end(), [&](double y) { return y <= x; })) / a.size();
    const double fb = static_cast<double>(std::count_if(b.begin(), b.end(), [&](double y) { return y <= x; })) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

}  // namespace

TEST_CASE("one-sample KS statistic matches the brute-force evaluation") {
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> ex(1.5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> xs(50 + rep * 7);
    for (auto& x : xs) x = ex(gen);
    auto F = [](double x) { return stats::exponential_cdf(2.0, x); };
    CHECK(stats::ks_statistic(xs, F) == doctest::Approx(brute_ks(xs, F)).epsilon(1e-14));
  }
}

TEST_CASE("two-sample KS statistic matches the brute-force evaluation, including ties") {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> d(0, 30);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(40 + rep);
    std::vector<double> b(25 + 2 * rep);
    for (auto& x : a) x = d(gen) * 0.1;
    for (auto& x : b) x = d(gen) * 0.1 + 0.05 * (rep % 2);
    CHECK(stats::ks_two_sample(a, b) == doctest::Approx(brute_ks2(a, b)).epsilon(1e-14));
  }
}

TEST_CASE("KS critical values and p-values match the Kolmogorov table") {
  CHECK(stats::ks_critical_value(1, 0.01) == doctest::Approx(1.6276).epsilon(1e-4));
  CHECK(stats::ks_critical_value(1, 0.05) == doctest::Approx(1.3581).epsilon(1e-4));
  CHECK(stats::ks_critical_value(100, 0.01) == doctest::Approx(0.16276).epsilon(1e-4));
  // P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01, P(K > 1.2238) = 0.10.
  CHECK(stats::ks_pvalue(1.3581, 1) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(stats::ks_pvalue(1.6276, 1) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(stats::ks_pvalue(0.12238, 100) == doctest::Approx(0.10).epsilon(1e-3));
  CHECK(stats::ks_pvalue(0.0, 10) == 1.0);
  CHECK_THROWS_AS((void)stats::ks_critical_value(0), atlas::ParameterError);
  CHECK_THROWS_AS((void)stats::ks_statistic(std::vector<double>{}, [](double) { return 0.0; }), atlas::ParameterError);
}

TEST_CASE("summary statistics and binomial tolerances") {
  const std::vector<double> xs = {1, 2, 3, 4};
  CHECK(stats::mean(xs) == 2.5);
  CHECK(stats::stddev(xs) == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(stats::empirical_tail(xs, 2.0) == 0.5);
  CHECK(stats::empirical_tail(xs, 4.0) == 0.0);
  CHECK(stats::exponential_cdf(2.0, -1.0) == 0.0);
  CHECK(stats::exponential_cdf(2.0, 0.5) == doctest::Approx(1.0 - std::exp(-1.0)));
  // Hand values: 3 sqrt(0.25 / 100) = 0.15; pooled p = 0.3 over 200 + 200.
  CHECK(stats::binomial_tolerance(0.5, 100) == doctest::Approx(0.15));
  CHECK(stats::binomial_tolerance(0.2, 200, 0.4, 200) == doctest::Approx(3.0 * std::sqrt(0.21 * 0.01)));
}
