#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "atlas/rng.hpp"

namespace atlas {

using Name = std::uint32_t;
using Rank = std::uint32_t;

/// Named particle configuration together with its ranking permutation.
///
/// Names and ranks are zero-based. `name_at_rank[k]` is the name of the
/// (k+1)-th leftmost particle, ties resolved by the smaller name first.
/// `accumulated_drift[i]` is the total drift (in time units of the drift
/// coefficient) particle i has received so far.
struct ParticleSystemState {
  std::vector<double> positions;
  std::vector<Rank> rank_of;
  std::vector<Name> name_at_rank;
  std::vector<double> accumulated_drift;
  double sim_time = 0.0;
  /// Number of Euler steps taken since the initial configuration; used as the
  /// counter of the per-particle random streams.
  std::uint64_t step_index = 0;

  /// Builds a state from named positions, computing the ranking permutation.
  static ParticleSystemState from_positions(std::vector<double> positions);

  [[nodiscard]] std::size_t size() const noexcept { return positions.size(); }
  [[nodiscard]] double ranked_position(Rank k) const { return positions[name_at_rank[k]]; }
  [[nodiscard]] double leftmost() const { return ranked_position(0); }
  [[nodiscard]] double rightmost() const { return ranked_position(static_cast<Rank>(size() - 1)); }
  [[nodiscard]] std::vector<double> ranked_positions() const;
  [[nodiscard]] double total_accumulated_drift() const noexcept;
};

/// Throws ParameterError describing the first violated invariant.
void validate(const ParticleSystemState& state);

/// Strict ranking order: by position, then by name.
inline bool ranks_before(double xa, Name a, double xb, Name b) noexcept {
  return xa < xb || (xa == xb && a < b);
}

struct SpacingsSequence {
  std::vector<double> gaps;
};

[[nodiscard]] SpacingsSequence spacings_of(const ParticleSystemState& state);

/// Ranked positions `leftmost, leftmost+g1, leftmost+g1+g2, ...`.
[[nodiscard]] std::vector<double> positions_from_spacings(double leftmost, const SpacingsSequence& s);

/// Per-rank drift and diffusion coefficients, padded by tail values.
struct DriftSpec {
  std::vector<double> gamma;
  std::vector<double> sigma;
  double gamma_tail = 0.0;
  double sigma_tail = 1.0;

  static DriftSpec atlas(double gamma = 1.0);
  static DriftSpec harris();

  [[nodiscard]] double gamma_at(Rank k) const noexcept { return k < gamma.size() ? gamma[k] : gamma_tail; }
  [[nodiscard]] double sigma_at(Rank k) const noexcept { return k < sigma.size() ? sigma[k] : sigma_tail; }
  /// Number of leading ranks whose coefficients are not both equal to the tail.
  [[nodiscard]] Rank active_prefix() const noexcept;
  [[nodiscard]] double max_abs_gamma() const noexcept;
  [[nodiscard]] double max_sigma() const noexcept;
  void validate() const;
};

struct PoissonHalfLine {
  double lambda = 1.0;
};

/// Independent Exponential(rates[k]) gaps; entries beyond `rates` use `tail_rate`
/// (or the last listed rate when `tail_rate` is zero).
struct ProductExponentialSpacings {
  std::vector<double> rates;
  double tail_rate = 0.0;

  [[nodiscard]] double rate_at(std::size_t k) const;
};

using InitialLaw = std::variant<PoissonHalfLine, ProductExponentialSpacings>;

/// Leftmost particle at the origin, n-1 i.i.d. Exponential(lambda) gaps.
[[nodiscard]] ParticleSystemState sample_ppp_half_line(double lambda, std::size_t n, std::uint64_t seed);

[[nodiscard]] ParticleSystemState sample_spacings_law(const ProductExponentialSpacings& law, std::size_t n,
                                                      std::uint64_t seed);
[[nodiscard]] ParticleSystemState sample_spacings_law(std::span<const double> rates, std::size_t n,
                                                      std::uint64_t seed);

[[nodiscard]] ParticleSystemState sample_initial(const InitialLaw& law, std::size_t n, std::uint64_t seed);

/// Gap rates 2 - 2k/n, k = 1..n-1: invariant spacings law of the n-particle Atlas model.
[[nodiscard]] std::vector<double> finite_atlas_invariant_rates(std::size_t n);

/// Gap rates 2 + k*a, k = 1..count.
[[nodiscard]] std::vector<double> tilted_invariant_rates(double a, std::size_t count);

// Serialization. CSV columns: name,position (names written 1-based).
void write_configuration_csv(std::ostream& out, const ParticleSystemState& state);
[[nodiscard]] ParticleSystemState read_configuration_csv(std::istream& in);
[[nodiscard]] std::string configuration_to_json(const ParticleSystemState& state);
[[nodiscard]] ParticleSystemState configuration_from_json(const std::string& text);

}  // namespace atlas
