#pragma once

#include <vector>

namespace atlas::stefan {

/// Standard normal CDF, evaluated through erfc to keep both tails accurate.
double phi_cdf(double x);
/// Standard normal density.
double phi_pdf(double x);
/// Upper tail 1 - Phi(x).
double phi_sf(double x);
/// Mills ratio (1 - Phi(x)) / Phi'(x); finite for all x where Phi'(x) > 0,
/// continued fraction for large positive x.
double mills_ratio(double x);

/// g(k) = k (1 - Phi(k)) / Phi'(k). Strictly increasing, g(0) = 0, g < 1.
double g(double kappa);
double g_prime(double kappa);

/// Closed-form hydrodynamic profile for Atlas particles started from a
/// Poisson configuration of intensity `lambda`:
///   u(t, x) = [c1 + c2 Phi(x / sqrt t)] 1{x > kappa sqrt t}.
struct StefanSolution {
  double lambda = 2.0;
  double kappa = 0.0;
  double c1 = 2.0;
  double c2 = 0.0;
};

/// Solves g(kappa) = 1 - lambda/2 by bracketed Newton with bisection fallback.
StefanSolution solve_kappa(double lambda);

double u_star(const StefanSolution& sol, double t, double x);
/// lim_{x -> y(t)+} u(t, x), equal to 2 for every valid solution.
double u_star_front(const StefanSolution& sol);
double y_star(const StefanSolution& sol, double t);

/// Mass of u(t, .) on [y(t), x], in closed form.
double integrated_profile(const StefanSolution& sol, double t, double x);
/// The x >= y(t) carrying `mass` to its left; inverse of integrated_profile.
double integrated_profile_inverse(const StefanSolution& sol, double t, double mass);

/// Heat-equation solution a(c) (Phi(x/sqrt t) - Phi(c)) that vanishes on the
/// parabola x = c sqrt t and starts from 1 - lambda/2 on the half line.
struct SimilarityBoundary {
  double lambda = 1.0;
  double c = 0.0;
  double a_of_c = 0.0;
};

SimilarityBoundary similarity_boundary(double c, double lambda);
double similarity_value(const SimilarityBoundary& w, double t, double x);

/// c -> (1 - lambda/2) Phi'(c) / (1 - Phi(c)): the front coefficient of half
/// the flux of w(., .; c) through its own boundary. Defined for lambda < 2.
double fixed_point_map(double c, double lambda);

/// c0, I(c0), I(I(c0)), ... until successive iterates differ by less than
/// `tol` or `max_iter` maps have been applied.
std::vector<double> iterate_fixed_point(double c0, double lambda, double tol = 1e-14, int max_iter = 200);

/// Central finite-difference residual of u_t - u_xx / 2 at (t, x).
double residual_heat(const StefanSolution& sol, double t, double x, double h);
/// One-sided residual of u(y+) y' + u_x(y+) / 2 at the front.
double residual_flux(const StefanSolution& sol, double t, double h);
/// Central-difference step conditioned on the evaluation point.
double default_difference_step(double x);

}  // namespace atlas::stefan
