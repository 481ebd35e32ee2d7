#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "atlas/model.hpp"
#include "atlas/rng.hpp"

namespace atlas {

enum class Scheme { kRankFrozenEuler };
enum class ResortStrategy { kAdaptiveInsertion, kFullSort };

struct StepConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::kRankFrozenEuler;
  ResortStrategy resort = ResortStrategy::kAdaptiveInsertion;

  void validate() const;
};

struct Snapshot {
  double requested_time = 0.0;
  double time = 0.0;  // snapped to the step grid
  std::uint64_t step_index = 0;
  double leftmost = 0.0;
  std::vector<double> tracked;  // positions of `TrajectoryRecorder::tracked_ranks`
  std::optional<ParticleSystemState> full_state;
};

/// Collects snapshots at requested times. Requested times are snapped to the
/// nearest completed step; `Snapshot::time` holds the snapped value.
struct TrajectoryRecorder {
  std::vector<double> sample_times;
  std::vector<Rank> tracked_ranks;
  bool keep_full_state = false;
  bool track_leftmost_names = false;

  std::vector<Snapshot> recorded;
  /// Name at rank 0 at the start of every step (when tracking is enabled).
  std::vector<Name> leftmost_name_history;
  double history_dt = 0.0;
};

/// Ranking repair. Returns the number of adjacent transpositions performed
/// (always zero for the full-sort strategy, which is kept as an oracle).
std::size_t resort(ParticleSystemState& state, ResortStrategy strategy = ResortStrategy::kAdaptiveInsertion);

/// One rank-frozen Euler-Maruyama step: every particle moves by
/// gamma(rank)*dt + sigma(rank)*sqrt(dt)*xi with ranks taken at the step start.
void step(ParticleSystemState& state, const DriftSpec& drift, const StepConfig& cfg, const ParticleStreams& streams);

/// Advances `state` to `horizon` (rounded to a whole number of steps),
/// filling `recorder` if given.
void run(ParticleSystemState& state, const DriftSpec& drift, const StepConfig& cfg, double horizon,
         TrajectoryRecorder* recorder, const ParticleStreams& streams);

struct OccupationTime {
  Name name = 0;
  std::uint64_t steps = 0;
  double time = 0.0;
};

/// Time each named particle spent at rank 0; entries with zero time omitted.
/// The step counts sum to the number of recorded steps exactly.
[[nodiscard]] std::vector<OccupationTime> leftmost_occupation_histogram(const TrajectoryRecorder& recorder);

/// Tuning of the localized engine. A particle is tracked step by step only if
/// it could reach the lowest `active_prefix` ranks during the current window
/// with a deviation smaller than `sigma_buffer` standard deviations.
struct LocalizationConfig {
  double sigma_buffer = 8.0;
  double window = 0.1;
  double hysteresis = 1.0;
};

/// Rank-frozen Euler engine for drift specs whose coefficients equal the tail
/// (zero drift, constant diffusion) beyond a finite prefix of ranks.
///
/// Particles far from the low ranks are driftless Brownian motions between
/// visits; they are left untouched and later advanced by a single Gaussian
/// increment of the accumulated variance, which is their exact law. Only
/// particles within a moving buffer of the low ranks are stepped.
class LocalizedEngine {
 public:
  LocalizedEngine(const ParticleSystemState& initial, DriftSpec drift, StepConfig cfg, std::uint64_t seed,
                  LocalizationConfig loc = {});

  void advance_to(double horizon, TrajectoryRecorder* recorder = nullptr);

  /// Full ranked state at the current time (materializes every particle).
  [[nodiscard]] ParticleSystemState snapshot();

  [[nodiscard]] double leftmost() const { return positions_[active_.front()]; }
  [[nodiscard]] double sim_time() const noexcept { return sim_time_; }
  [[nodiscard]] std::uint64_t step_index() const noexcept { return step_index_; }
  [[nodiscard]] std::size_t active_count() const noexcept { return active_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return positions_.size(); }
  [[nodiscard]] double total_accumulated_drift() const noexcept;

 private:
  struct Deadline {
    std::uint64_t step;
    Name name;
    bool operator>(const Deadline& o) const noexcept {
      return step > o.step || (step == o.step && name > o.name);
    }
  };

  void refresh_active_set();
  void single_step(TrajectoryRecorder* recorder);
  void materialize(Name i);
  void activate(Name i);
  void release(Name i);
  void materialize_all();
  void rebuild_deadlines();
  void record(TrajectoryRecorder& rec, double requested);
  /// Earliest step at which lazy particle i could come within reach of the
  /// reference rank, or the current step if it already can.
  [[nodiscard]] std::uint64_t deadline_of(Name i, double ref) const;
  [[nodiscard]] double reference_position() const { return positions_[active_[prefix_ - 1]]; }

  DriftSpec drift_;
  StepConfig cfg_;
  ParticleStreams streams_;
  LocalizationConfig loc_;
  Rank prefix_;
  std::uint64_t window_steps_;

  std::vector<double> positions_;
  std::vector<double> accumulated_drift_;
  std::vector<std::uint64_t> last_step_;
  std::vector<Name> active_;  // ranked
  std::vector<char> is_lazy_;
  std::priority_queue<Deadline, std::vector<Deadline>, std::greater<>> deadlines_;
  double sim_time_ = 0.0;
  std::uint64_t step_index_ = 0;
};

/// Number of steps of size dt closest to `duration`.
[[nodiscard]] std::uint64_t steps_for(double duration, double dt);

}  // namespace atlas
