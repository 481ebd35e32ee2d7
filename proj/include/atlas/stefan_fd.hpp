#pragma once

#include <vector>

#include "atlas/measure.hpp"

namespace atlas::stefan_fd {

enum class TimeScheme { kExplicit, kCrankNicolson };

struct FdConfig {
  double dxi = 0.02;
  double length = 50.0;
  /// Time step as a multiple of dxi^2.
  double cfl = 0.4;
  double t0 = 1e-3;
  TimeScheme scheme = TimeScheme::kExplicit;
};

/// Density on a grid attached to the moving front, xi = x - y(t).
/// u[0] is pinned to the equilibrium value 2, u[last] to lambda.
struct FdStefanState {
  double lambda = 2.0;
  std::vector<double> xi;
  std::vector<double> u;
  double y = 0.0;
  double t = 0.0;
  double dt = 0.0;
  double dxi = 0.0;
  TimeScheme scheme = TimeScheme::kExplicit;
  /// Front coefficient used by the short-time bootstrap.
  double bootstrap_coefficient = 0.0;
  std::size_t steps = 0;
};

/// Front coefficient c of the similarity ansatz A + B Phi(x/sqrt t) on
/// x > c sqrt t that matches u = 2 at the front, u = lambda far away and the
/// flux balance u y' + u_x / 2 = 0, found by shooting on c.
double bootstrap_front_coefficient(double lambda);

FdStefanState fd_init(double lambda, const FdConfig& cfg = {});
inline FdStefanState fd_init(double lambda, double dxi, double length) {
  FdConfig cfg;
  cfg.dxi = dxi;
  cfg.length = length;
  return fd_init(lambda, cfg);
}

/// Front speed y' = -u_xi(0+) / (2 u(0+)) from a second-order one-sided difference.
double front_speed(const FdStefanState& s);

/// One step of length `state.dt` (or `dt_override` when positive and smaller).
void fd_step(FdStefanState& state, double dt_override = 0.0);

/// Steps until t_end, shortening the last step to land on it.
void fd_advance(FdStefanState& state, double t_end);

/// Export in lab coordinates: bins [xi_j + y, xi_{j+1} + y] with the
/// trapezoidal cell average as density.
DensityProfile fd_profile(const FdStefanState& state);

}  // namespace atlas::stefan_fd
