#include "atlas/measure.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "atlas/errors.hpp"

namespace atlas {

namespace {

void write_metadata(std::ostream& out, const CsvMetadata& meta) {
  for (const auto& [k, v] : meta) {
    out << "# " << k << '=' << v << '\n';
  }
}

}  // namespace

double DensityProfile::mass() const noexcept {
  double m = 0.0;
  for (std::size_t j = 0; j < bin_density.size(); ++j) {
    m += bin_density[j] * (bin_edges[j + 1] - bin_edges[j]);
  }
  return m;
}

EmpiricalMeasure rescale(const ParticleSystemState& state, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw ParameterError("scale b must be positive");
  }
  EmpiricalMeasure m;
  m.mass_per_atom = b;
  m.atoms.reserve(state.size());
  for (Rank k = 0; k < state.size(); ++k) {
    m.atoms.push_back(b * state.ranked_position(k));
  }
  return m;
}

EmpiricalMeasure make_measure(std::vector<double> atoms, double mass_per_atom) {
  if (!(mass_per_atom > 0.0)) throw ParameterError("atom mass must be positive");
  std::sort(atoms.begin(), atoms.end());
  return {mass_per_atom, std::move(atoms)};
}

std::size_t count_at_or_below(const EmpiricalMeasure& m, double x) {
  return static_cast<std::size_t>(std::upper_bound(m.atoms.begin(), m.atoms.end(), x) - m.atoms.begin());
}

double cdf(const EmpiricalMeasure& m, double x) {
  return m.mass_per_atom * static_cast<double>(count_at_or_below(m, x));
}

double quantile(const EmpiricalMeasure& m, double q) {
  if (!(q >= 0.0)) throw ParameterError("quantile level must be non-negative");
  if (q >= m.total_mass()) {
    throw OutOfMassError("quantile level exceeds the total mass of the measure");
  }
  const double b = m.mass_per_atom;
  // Smallest k with b*(k+1) > q, evaluated exactly as cdf() does.
  auto exceeds = [&](std::size_t k) { return b * static_cast<double>(k + 1) > q; };
  auto k = static_cast<std::size_t>(std::floor(q / b));
  k = std::min(k, m.atoms.size() - 1);
  while (k > 0 && exceeds(k - 1)) --k;
  while (!exceeds(k)) ++k;
  // Repeated atoms: the infimum is the first atom sharing the position.
  return m.atoms[k];
}

DensityProfile density_estimate(const EmpiricalMeasure& m, double w, double lo, double hi) {
  if (!(w > 0.0)) throw ParameterError("bin width must be positive");
  if (!(hi > lo)) throw ParameterError("density range must be non-empty");
  DensityProfile p;
  const auto nbins = static_cast<std::size_t>(std::ceil((hi - lo) / w - 1e-12));
  p.bin_edges.reserve(nbins + 1);
  for (std::size_t j = 0; j < nbins; ++j) {
    p.bin_edges.push_back(lo + static_cast<double>(j) * w);
  }
  p.bin_edges.push_back(hi);
  p.bin_density.resize(nbins);
  std::size_t below = count_at_or_below(m, p.bin_edges[0]);
  for (std::size_t j = 0; j < nbins; ++j) {
    const std::size_t upto = count_at_or_below(m, p.bin_edges[j + 1]);
    const double width = p.bin_edges[j + 1] - p.bin_edges[j];
    p.bin_density[j] = m.mass_per_atom * static_cast<double>(upto - below) / width;
    below = upto;
  }
  return p;
}

DensityProfile density_estimate(const EmpiricalMeasure& m, double w) {
  if (!(w > 0.0)) throw ParameterError("bin width must be positive");
  if (m.atoms.empty()) return {};
  // Left-open bins: the smallest atom must sit strictly above the first edge.
  const double lo = (std::ceil(m.atoms.front() / w) - 1.0) * w;
  double hi = std::ceil(m.atoms.back() / w) * w;
  if (hi <= lo) hi = lo + w;
  return density_estimate(m, w, lo, hi);
}

double dstar_surrogate(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2, int r_max) {
  if (r_max < 1) throw ParameterError("r_max must be at least 1");
  double total = 0.0;
  // Sweep the merged atom sequence once; integral accumulates left to right.
  std::size_t i1 = 0;
  std::size_t i2 = 0;
  double integral = 0.0;
  double x_prev = 0.0;
  bool started = false;
  auto diff = [&] {
    return std::fabs(m1.mass_per_atom * static_cast<double>(i1) - m2.mass_per_atom * static_cast<double>(i2));
  };
  for (int r = 1; r <= r_max; ++r) {
    const auto rr = static_cast<double>(r);
    for (;;) {
      const double next1 = i1 < m1.atoms.size() ? m1.atoms[i1] : INFINITY;
      const double next2 = i2 < m2.atoms.size() ? m2.atoms[i2] : INFINITY;
      const double x = std::min(next1, next2);
      if (x > rr) break;
      if (started) integral += diff() * (x - x_prev);
      started = true;
      x_prev = x;
      while (i1 < m1.atoms.size() && m1.atoms[i1] == x) ++i1;
      while (i2 < m2.atoms.size() && m2.atoms[i2] == x) ++i2;
    }
    if (started) {
      integral += diff() * (rr - x_prev);
      x_prev = rr;
    }
    total += std::ldexp(std::min(1.0, integral + diff()), -r);
  }
  return total;
}

void write_density_csv(std::ostream& out, const DensityProfile& p, const CsvMetadata& meta) {
  write_metadata(out, meta);
  out.precision(17);
  out << "x,value\n";
  for (std::size_t j = 0; j < p.bins(); ++j) {
    out << 0.5 * (p.bin_edges[j] + p.bin_edges[j + 1]) << ',' << p.bin_density[j] << '\n';
  }
}

void write_cdf_csv(std::ostream& out, const EmpiricalMeasure& m, const std::vector<double>& xs,
                   const CsvMetadata& meta) {
  write_metadata(out, meta);
  out.precision(17);
  out << "x,value\n";
  for (double x : xs) {
    out << x << ',' << cdf(m, x) << '\n';
  }
}

}  // namespace atlas
