#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "atlas/dynamics.hpp"
#include "atlas/measure.hpp"

namespace atlas::experiments {

enum class ExperimentTag {
  kLeftmostScaling,
  kDensityProfile,
  kParticleCount,
  kSpacingsEquilibrium,
  kDomination,
  kQuantileLaw,
};

[[nodiscard]] std::string_view to_string(ExperimentTag tag) noexcept;
/// Accepts the CamelCase names ("LeftmostScaling") and kebab-case aliases
/// ("leftmost-scaling"). Throws ConfigurationError otherwise.
[[nodiscard]] ExperimentTag parse_experiment_tag(std::string_view text);

struct Tolerances {
  double leftmost = 0.05;          // |mean Y1(s)/sqrt(s) - kappa|
  double bin_relative = 0.07;      // pooled bin mass vs the limit integral
  double count_relative = 0.07;    // cumulative counts vs the limit integral
  double quantile = 0.05;          // |Y_{q sqrt s}/sqrt s - y(1, q)|
  double spacing_relative = 0.10;  // windowed mean spacing vs 1/u(1, y(1, q))
  double mean_gap_relative = 0.10; // E Z1 vs 1/2 at the final time
  double ks_alpha = 0.01;
  double binomial_z = 3.0;
};

/// All times are unscaled (the simulation clock). Runs always use the Atlas
/// drift gamma = 1 started from a Poisson configuration of intensity lambda
/// anchored at the origin; the scale b = 1/sqrt(horizon) enters the analysis
/// only.
struct ExperimentConfig {
  ExperimentTag tag = ExperimentTag::kLeftmostScaling;
  double lambda = 1.0;
  std::size_t n = 10000;
  double dt = 1e-3;
  double horizon = 1e4;
  std::size_t replicas = 50;
  std::uint64_t seed = 20240607;
  unsigned threads = 0;  // 0: hardware concurrency

  /// Sample times for the spacings and domination experiments.
  std::vector<double> times;
  /// Scaled-coordinate bins [bin_lo, bin_hi] relative to kappa (density,
  /// particle count).
  double bin_lo = 0.5;
  double bin_hi = 3.0;
  double bin_width = 0.5;
  /// Scales for the d* surrogate trend and the replicas spent on each.
  std::vector<double> scales{0.1, 0.05, 0.02, 0.01};
  std::size_t scale_replicas = 30;
  int dstar_rmax = 8;
  /// Masses q for the ranked-particle quantile law and the rank windows eps.
  std::vector<double> quantiles{1.0};
  std::vector<double> windows{0.1, 0.2};
  /// Number of leading spacings pooled by the KS test.
  std::size_t spacings = 5;
  /// Spacing ranks (1-based) and tail grid for the domination test.
  std::vector<std::size_t> spacing_ranks{1, 2};
  std::vector<double> z_grid;

  Tolerances tol;
  LocalizationConfig localization;
  std::string output_dir;

  [[nodiscard]] double scale() const;
  void validate() const;
};

/// Defaults that match the documented experiment of each tag.
[[nodiscard]] ExperimentConfig defaults_for(ExperimentTag tag);

struct ClaimRecord {
  std::string claim_id;
  /// Plain statement of the limit property being checked.
  std::string anchor;
  std::string statistic;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  /// Informational records are reported but do not affect the verdict.
  bool required = true;
  std::size_t replicas = 0;
  std::string note;
};

struct VerificationReport {
  ExperimentConfig config;
  std::vector<ClaimRecord> records;
  std::vector<std::uint64_t> seeds;
  std::string timestamp;  // excluded from the config hash
  [[nodiscard]] bool passed() const noexcept;
};

/// Per-replica seeds derived from the base seed.
[[nodiscard]] std::vector<std::uint64_t> replica_seeds(std::uint64_t base, std::size_t count);

/// Truncation monitor. Throws InvalidatedRunError when the particle count is
/// below lambda (|kappa| + 10) sqrt(T) or when an analysis reads unscaled
/// positions within 5 sqrt(T) of the rightmost initial particle.
void check_truncation(std::size_t n, double lambda, double kappa, double horizon, double rightmost_initial,
                      double analysis_reach);

/// Runs `body(r, seed_r)` for r = 0..R-1 on `threads` workers; results come
/// back in replica order regardless of scheduling.
template <class Result, class Body>
std::vector<Result> run_replicas(const std::vector<std::uint64_t>& seeds, unsigned threads, Body&& body);

[[nodiscard]] VerificationReport run_leftmost_scaling(const ExperimentConfig& cfg);
[[nodiscard]] VerificationReport run_density_profile(const ExperimentConfig& cfg);
[[nodiscard]] VerificationReport run_particle_count(const ExperimentConfig& cfg);
[[nodiscard]] VerificationReport run_quantile_law(const ExperimentConfig& cfg);
[[nodiscard]] VerificationReport run_spacings_equilibrium(const ExperimentConfig& cfg);
[[nodiscard]] VerificationReport run_domination(const ExperimentConfig& cfg);
/// Leftmost scaling at dt and dt/2 with independent seeds; passes when the
/// two replica means agree within binomial_z combined standard errors.
[[nodiscard]] VerificationReport run_step_refinement(const ExperimentConfig& cfg);
[[nodiscard]] VerificationReport run_experiment(const ExperimentConfig& cfg);

/// Discretized limit measure at scaled time 1: atoms of mass `atom_mass` at
/// the limit quantiles, covering (-inf, reach].
[[nodiscard]] EmpiricalMeasure limit_measure(double lambda, double atom_mass, double reach);

// Report emission (report.cpp).
enum class ReportFormat { kCsv, kJson, kMarkdown };
[[nodiscard]] ReportFormat parse_report_format(std::string_view text);
[[nodiscard]] std::string config_to_json(const ExperimentConfig& cfg);
/// Keys absent from `text` keep their value from `base`.
[[nodiscard]] ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
/// FNV-1a 64 of the canonical config JSON, as 16 hex digits.
[[nodiscard]] std::string config_hash(const ExperimentConfig& cfg);
void emit_report(std::ostream& out, const VerificationReport& report, ReportFormat format);
[[nodiscard]] VerificationReport report_from_json(const std::string& text);
[[nodiscard]] std::string current_timestamp();

}  // namespace atlas::experiments

#include "atlas/detail/replicas.hpp"
