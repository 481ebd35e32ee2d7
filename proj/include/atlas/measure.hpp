#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "atlas/model.hpp"

namespace atlas {

/// Finite point measure with equal atom masses; the rescaled empirical
/// measure of a particle configuration.
struct EmpiricalMeasure {
  double mass_per_atom = 1.0;
  std::vector<double> atoms;  // sorted

  [[nodiscard]] double total_mass() const noexcept {
    return mass_per_atom * static_cast<double>(atoms.size());
  }
};

/// Piecewise-constant density on bins (edges[j], edges[j+1]].
struct DensityProfile {
  std::vector<double> bin_edges;
  std::vector<double> bin_density;

  [[nodiscard]] std::size_t bins() const noexcept { return bin_density.size(); }
  [[nodiscard]] double mass() const noexcept;
};

/// Atoms at b * (ranked positions), each of mass b.
[[nodiscard]] EmpiricalMeasure rescale(const ParticleSystemState& state, double b);

/// Measure with the given atoms (sorted on construction).
[[nodiscard]] EmpiricalMeasure make_measure(std::vector<double> atoms, double mass_per_atom);

/// Mass of (-inf, x].
[[nodiscard]] double cdf(const EmpiricalMeasure& m, double x);
/// Number of atoms in (-inf, x].
[[nodiscard]] std::size_t count_at_or_below(const EmpiricalMeasure& m, double x);

/// inf{ r : cdf(r) > q }. Throws OutOfMassError when q >= total mass.
[[nodiscard]] double quantile(const EmpiricalMeasure& m, double q);

/// Histogram density on [lo, hi] with the given bin width (the last bin is
/// clipped at hi). Bins are left-open so that bin mass equals the CDF increment.
[[nodiscard]] DensityProfile density_estimate(const EmpiricalMeasure& m, double bin_width, double lo, double hi);
/// Same, covering all atoms with bins aligned to multiples of the width.
[[nodiscard]] DensityProfile density_estimate(const EmpiricalMeasure& m, double bin_width);

/// Computable stand-in for the bounded-Lipschitz metric on locally finite
/// measures: sum over r = 1..r_max of
///   2^-r * min(1, int_{-inf}^{r} |F1 - F2| dx + |F1(r) - F2(r)|).
[[nodiscard]] double dstar_surrogate(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2, int r_max);

using CsvMetadata = std::map<std::string, std::string>;

/// Columns x,value with x at bin centers; metadata as leading '#' lines.
void write_density_csv(std::ostream& out, const DensityProfile& p, const CsvMetadata& meta = {});
void write_cdf_csv(std::ostream& out, const EmpiricalMeasure& m, const std::vector<double>& xs,
                   const CsvMetadata& meta = {});

}  // namespace atlas
