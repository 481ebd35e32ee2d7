#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace atlas::stats {

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_n - G_m|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic critical value c(alpha)/sqrt(n), c(alpha) = sqrt(-ln(alpha/2)/2)
/// (c(0.01) = 1.628).
double ks_critical_value(std::size_t n, double alpha = 0.01);

/// Asymptotic p-value from the Kolmogorov distribution.
double ks_pvalue(double statistic, std::size_t n);

inline double exponential_cdf(double rate, double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }

double mean(std::span<const double> xs);
double stddev(std::span<const double> xs);

/// Fraction of entries strictly greater than z.
double empirical_tail(std::span<const double> xs, double z);

/// z-score tolerance for the difference of two independent binomial
/// proportions, using the pooled proportion.
double binomial_tolerance(double p1, std::size_t n1, double p2, std::size_t n2, double z = 3.0);

/// Tolerance for an empirical proportion against an exact probability.
double binomial_tolerance(double p, std::size_t n, double z = 3.0);

}  // namespace atlas::stats
