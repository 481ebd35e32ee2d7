#include "atlas/stefan_fd.hpp"

#include <cmath>
#include <sstream>

#include "atlas/errors.hpp"

namespace atlas::stefan_fd {

namespace {

constexpr double kFrontDensity = 2.0;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// Amplitude B of the ansatz given the front coefficient c.
double ansatz_amplitude(double lambda, double c) { return (lambda - kFrontDensity) / (0.5 * std::erfc(c / std::sqrt(2.0))); }

// c + (B/2) Phi'(c): positive when the front runs ahead of the flux it carries.
double flux_mismatch(double lambda, double c) { return c + 0.5 * ansatz_amplitude(lambda, c) * normal_pdf(c); }

void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
                       std::vector<double>& rhs) {
  const auto n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  }
}

}  // namespace

double bootstrap_front_coefficient(double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (lambda == kFrontDensity) return 0.0;
  // The mismatch is increasing in c; expand a bracket, then bisect.
  double lo = -1.0;
  double hi = 1.0;
  while (flux_mismatch(lambda, lo) > 0.0) lo *= 2.0;
  while (flux_mismatch(lambda, hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (flux_mismatch(lambda, mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FdStefanState fd_init(double lambda, const FdConfig& cfg) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be positive");
  if (!(cfg.dxi > 0.0)) throw ParameterError("grid spacing must be positive");
  if (!(cfg.length >= 50.0)) throw ParameterError("domain length must be at least 50");
  if (!(cfg.cfl > 0.0)) throw ParameterError("time step factor must be positive");
  if (!(cfg.t0 > 0.0)) throw ParameterError("bootstrap time must be positive");

  FdStefanState s;
  s.lambda = lambda;
  s.dxi = cfg.dxi;
  s.dt = cfg.cfl * cfg.dxi * cfg.dxi;
  s.scheme = cfg.scheme;
  s.t = cfg.t0;
  if (s.scheme == TimeScheme::kExplicit && s.dt > 0.5 * s.dxi * s.dxi) {
    throw ConfigurationError("explicit scheme requires dt <= dxi^2 / 2");
  }
  const auto n = static_cast<std::size_t>(std::llround(cfg.length / cfg.dxi));
  s.xi.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) s.xi[j] = static_cast<double>(j) * cfg.dxi;

  const double c = bootstrap_front_coefficient(lambda);
  s.bootstrap_coefficient = c;
  const double root_t = std::sqrt(cfg.t0);
  s.y = c * root_t;
  const double amp = lambda == kFrontDensity ? 0.0 : ansatz_amplitude(lambda, c);
  const double base = lambda - amp;
  s.u.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    s.u[j] = base + amp * normal_cdf((s.xi[j] + s.y) / root_t);
  }
  s.u.front() = kFrontDensity;
  s.u.back() = lambda;
  return s;
}

double front_speed(const FdStefanState& s) {
  const double ux = (-3.0 * s.u[0] + 4.0 * s.u[1] - s.u[2]) / (2.0 * s.dxi);
  return -ux / (2.0 * s.u[0]);
}

void fd_step(FdStefanState& s, double dt_override) {
  const double dt = dt_override > 0.0 && dt_override < s.dt ? dt_override : s.dt;
  const double h = s.dxi;
  const double v = front_speed(s);
  const auto n = s.u.size() - 1;
  // Diffusion 1/2 u_xx plus upwinded y' u_xi, with y' frozen over the step.
  const double diff = 0.5 / (h * h);
  const double adv = std::fabs(v) / h;
  // Row coefficients of the spatial operator: L u_j = a u_{j-1} + b u_j + c u_{j+1}.
  const double a = diff + (v < 0.0 ? adv : 0.0);
  const double c = diff + (v > 0.0 ? adv : 0.0);
  const double b = -2.0 * diff - adv;

  if (s.scheme == TimeScheme::kExplicit) {
    if (dt * (2.0 * diff + adv) > 1.0) {
      std::ostringstream os;
      os << "explicit step violates the stability bound (dt=" << dt << ", front speed=" << v << ")";
      throw ConfigurationError(os.str());
    }
    std::vector<double> next(s.u.size());
    next.front() = kFrontDensity;
    next.back() = s.lambda;
    for (std::size_t j = 1; j < n; ++j) {
      next[j] = s.u[j] + dt * (a * s.u[j - 1] + b * s.u[j] + c * s.u[j + 1]);
    }
    s.u.swap(next);
  } else {
    const auto m = n - 1;  // interior unknowns
    std::vector<double> lower(m, -0.5 * dt * a);
    std::vector<double> diag(m, 1.0 - 0.5 * dt * b);
    std::vector<double> upper(m, -0.5 * dt * c);
    std::vector<double> rhs(m);
    for (std::size_t j = 1; j < n; ++j) {
      rhs[j - 1] = s.u[j] + 0.5 * dt * (a * s.u[j - 1] + b * s.u[j] + c * s.u[j + 1]);
    }
    rhs.front() += 0.5 * dt * a * kFrontDensity;
    rhs.back() += 0.5 * dt * c * s.lambda;
    solve_tridiagonal(lower, diag, upper, rhs);
    for (std::size_t j = 1; j < n; ++j) s.u[j] = rhs[j - 1];
    s.u.front() = kFrontDensity;
    s.u.back() = s.lambda;
  }
  for (std::size_t j = 0; j <= n; ++j) {
    if (!(s.u[j] >= 0.0)) {
      std::ostringstream os;
      os << "negative density " << s.u[j] << " at xi=" << s.xi[j] << ", t=" << s.t;
      throw InstabilityError(os.str());
    }
  }
  s.y += v * dt;
  s.t += dt;
  ++s.steps;
}

void fd_advance(FdStefanState& s, double t_end) {
  while (s.t < t_end) {
    const double remaining = t_end - s.t;
    if (remaining <= 1e-12 * std::max(1.0, t_end)) break;
    fd_step(s, remaining < s.dt ? remaining : 0.0);
  }
}

DensityProfile fd_profile(const FdStefanState& s) {
  DensityProfile p;
  p.bin_edges.reserve(s.xi.size());
  for (double xi : s.xi) p.bin_edges.push_back(xi + s.y);
  p.bin_density.reserve(s.u.size() - 1);
  for (std::size_t j = 0; j + 1 < s.u.size(); ++j) {
    p.bin_density.push_back(0.5 * (s.u[j] + s.u[j + 1]));
  }
  return p;
}

}  // namespace atlas::stefan_fd
