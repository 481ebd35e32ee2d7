#include "atlas/stefan_analytic.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "atlas/errors.hpp"

namespace atlas::stefan {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// z Phi(z) + Phi'(z): an antiderivative of Phi.
double phi_antiderivative(double z) { return z * phi_cdf(z) + phi_pdf(z); }

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("initial intensity lambda must be positive");
  }
}

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("time must be positive");
}

}  // namespace

double phi_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double phi_pdf(double x) { return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi * kInvSqrt2); }

double phi_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double mills_ratio(double x) {
  if (x < 8.0) return phi_sf(x) / phi_pdf(x);
  // Modified Lentz evaluation of 1/(x + 1/(x + 2/(x + 3/(x + ...)))).
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = x + k * d;
    d = d == 0.0 ? tiny : d;
    c = x + k / c;
    c = c == 0.0 ? tiny : c;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

double g(double kappa) { return kappa * mills_ratio(kappa); }

double g_prime(double kappa) { return mills_ratio(kappa) * (1.0 + kappa * kappa) - kappa; }

StefanSolution solve_kappa(double lambda) {
  require_lambda(lambda);
  const double target = 1.0 - 0.5 * lambda;
  StefanSolution sol;
  sol.lambda = lambda;
  double kappa = 0.0;
  if (target != 0.0) {
    auto f = [&](double k) { return g(k) - target; };
    double lo = -6.0;
    double hi = 6.0;
    while (f(lo) > 0.0) lo *= 2.0;
    while (f(hi) < 0.0) hi *= 2.0;
    kappa = target > 0.0 ? std::min(1.0, 0.5 * hi) : std::max(-1.0, 0.5 * lo);
    for (int it = 0; it < 200; ++it) {
      const double fk = f(kappa);
      if (fk == 0.0) break;
      (fk < 0.0 ? lo : hi) = kappa;
      double next = kappa - fk / g_prime(kappa);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::fabs(next - kappa) <= 1e-15 * std::max(1.0, std::fabs(kappa))) {
        kappa = next;
        break;
      }
      kappa = next;
    }
  }
  sol.kappa = kappa;
  sol.c2 = (lambda - 2.0) / phi_sf(kappa);
  sol.c1 = lambda - sol.c2;
  return sol;
}

double u_star(const StefanSolution& sol, double t, double x) {
  require_time(t);
  const double s = std::sqrt(t);
  if (!(x > sol.kappa * s)) return 0.0;
  return sol.c1 + sol.c2 * phi_cdf(x / s);
}

double u_star_front(const StefanSolution& sol) { return sol.c1 + sol.c2 * phi_cdf(sol.kappa); }

double y_star(const StefanSolution& sol, double t) {
  if (!(t >= 0.0)) throw ParameterError("time must be non-negative");
  return sol.kappa * std::sqrt(t);
}

double integrated_profile(const StefanSolution& sol, double t, double x) {
  require_time(t);
  const double s = std::sqrt(t);
  const double y = sol.kappa * s;
  if (x < y) throw DomainError("integrated profile evaluated behind the front");
  // u = 2 + c2 (Phi(z) - Phi(kappa)) with z = x / sqrt(t).
  const double z = x / s;
  const double shifted = phi_antiderivative(z) - phi_antiderivative(sol.kappa) - phi_cdf(sol.kappa) * (z - sol.kappa);
  return 2.0 * (x - y) + sol.c2 * s * shifted;
}

double integrated_profile_inverse(const StefanSolution& sol, double t, double mass) {
  require_time(t);
  if (!(mass >= 0.0)) throw ParameterError("mass must be non-negative");
  const double y = y_star(sol, t);
  if (mass == 0.0) return y;
  // The density is bounded below by min(lambda, 2), which brackets the root.
  const double lo_density = std::min(sol.lambda, 2.0);
  double lo = y;
  double hi = y + mass / lo_density;
  double x = y + mass / std::max(sol.lambda, 2.0);
  for (int it = 0; it < 200; ++it) {
    const double r = integrated_profile(sol, t, x) - mass;
    if (r == 0.0) return x;
    (r < 0.0 ? lo : hi) = x;
    double next = x - r / u_star(sol, t, x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(x))) {
      return next;
    }
    x = next;
  }
  return x;
}

SimilarityBoundary similarity_boundary(double c, double lambda) {
  require_lambda(lambda);
  if (!std::isfinite(c)) throw ParameterError("boundary coefficient must be finite");
  return {lambda, c, (1.0 - 0.5 * lambda) / phi_sf(c)};
}

double similarity_value(const SimilarityBoundary& w, double t, double x) {
  require_time(t);
  return w.a_of_c * (phi_cdf(x / std::sqrt(t)) - phi_cdf(w.c));
}

double fixed_point_map(double c, double lambda) {
  require_lambda(lambda);
  if (!(lambda < 2.0)) {
    throw RegimeError("the boundary iteration is defined for lambda < 2 only");
  }
  if (!std::isfinite(c)) throw ParameterError("boundary coefficient must be finite");
  return (1.0 - 0.5 * lambda) / mills_ratio(c);
}

std::vector<double> iterate_fixed_point(double c0, double lambda, double tol, int max_iter) {
  std::vector<double> out{c0};
  for (int k = 0; k < max_iter; ++k) {
    const double next = fixed_point_map(out.back(), lambda);
    const double step = std::fabs(next - out.back());
    out.push_back(next);
    if (step < tol) break;
  }
  return out;
}

double residual_heat(const StefanSolution& sol, double t, double x, double h) {
  if (!(h > 0.0)) throw ParameterError("difference step must be positive");
  if (!(t - h > 0.0)) throw DomainError("time stencil reaches t <= 0");
  const double front = std::max(y_star(sol, t - h), y_star(sol, t + h));
  if (!(x - h > front)) throw DomainError("heat residual stencil crosses the front");
  const double ut = (u_star(sol, t + h, x) - u_star(sol, t - h, x)) / (2.0 * h);
  const double uxx = (u_star(sol, t, x + h) - 2.0 * u_star(sol, t, x) + u_star(sol, t, x - h)) / (h * h);
  return ut - 0.5 * uxx;
}

double residual_flux(const StefanSolution& sol, double t, double h) {
  if (!(h > 0.0)) throw ParameterError("difference step must be positive");
  if (!(t - h > 0.0)) throw DomainError("time stencil reaches t <= 0");
  const double y = y_star(sol, t);
  const double dy = (y_star(sol, t + h) - y_star(sol, t - h)) / (2.0 * h);
  const double u0 = u_star_front(sol);
  const double ux = (-3.0 * u0 + 4.0 * u_star(sol, t, y + h) - u_star(sol, t, y + 2.0 * h)) / (2.0 * h);
  return u0 * dy + 0.5 * ux;
}

double default_difference_step(double x) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::fabs(x));
}

}  // namespace atlas::stefan
