#include "atlas/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "atlas/errors.hpp"

namespace atlas {

namespace {

[[noreturn]] void non_finite(Name i, double x) {
  std::ostringstream os;
  os << "non-finite position after step: particle " << (i + 1) << " at " << x;
  throw NumericalError(os.str());
}

struct PendingSamples {
  // (target step, requested time), ascending
  std::vector<std::pair<std::uint64_t, double>> targets;
  std::size_t next = 0;
};

PendingSamples plan_samples(const TrajectoryRecorder& rec, double t0, std::uint64_t step0, double dt,
                            std::uint64_t last_step) {
  PendingSamples p;
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : rec.sample_times) {
    if (!(t > prev)) throw ParameterError("recorder sample times must be strictly increasing");
    prev = t;
    if (t < t0 - 0.5 * dt) continue;  // already in the past
    const auto target = step0 + steps_for(t - t0, dt);
    if (target > last_step) continue;
    p.targets.emplace_back(target, t);
  }
  return p;
}

void record_full(TrajectoryRecorder& rec, const ParticleSystemState& s, double requested) {
  Snapshot snap;
  snap.requested_time = requested;
  snap.time = s.sim_time;
  snap.step_index = s.step_index;
  snap.leftmost = s.leftmost();
  for (Rank k : rec.tracked_ranks) {
    if (k >= s.size()) throw UnsupportedQueryError("tracked rank exceeds particle count");
    snap.tracked.push_back(s.ranked_position(k));
  }
  if (rec.keep_full_state) snap.full_state = s;
  rec.recorded.push_back(std::move(snap));
}

}  // namespace

void StepConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ParameterError("time step must be positive");
  }
}

std::uint64_t steps_for(double duration, double dt) {
  if (duration <= 0.0) return 0;
  return static_cast<std::uint64_t>(std::llround(duration / dt));
}

std::size_t resort(ParticleSystemState& s, ResortStrategy strategy) {
  auto& order = s.name_at_rank;
  const auto& x = s.positions;
  std::size_t swaps = 0;
  if (strategy == ResortStrategy::kFullSort) {
    std::sort(order.begin(), order.end(), [&](Name a, Name b) { return ranks_before(x[a], a, x[b], b); });
  } else {
    for (std::size_t k = 1; k < order.size(); ++k) {
      const Name cur = order[k];
      const double xc = x[cur];
      std::size_t j = k;
      while (j > 0 && ranks_before(xc, cur, x[order[j - 1]], order[j - 1])) {
        order[j] = order[j - 1];
        --j;
      }
      swaps += k - j;
      order[j] = cur;
    }
  }
  for (Rank k = 0; k < order.size(); ++k) {
    s.rank_of[order[k]] = k;
  }
  return swaps;
}

void step(ParticleSystemState& s, const DriftSpec& drift, const StepConfig& cfg, const ParticleStreams& streams) {
  const double dt = cfg.dt;
  const double sqdt = std::sqrt(dt);
  const auto n = static_cast<Name>(s.size());
  const auto prefix = drift.active_prefix();
  const double tail_drift = drift.gamma_tail * dt;
  const double tail_noise = drift.sigma_tail * sqdt;
  for (Name i = 0; i < n; ++i) {
    const Rank k = s.rank_of[i];
    const double z = streams.normal(i, s.step_index);
    double increment;
    double dd;
    if (k < prefix) {
      dd = drift.gamma_at(k) * dt;
      increment = dd + drift.sigma_at(k) * sqdt * z;
    } else {
      dd = tail_drift;
      increment = dd + tail_noise * z;
    }
    s.positions[i] += increment;
    if (dd != 0.0) s.accumulated_drift[i] += dd;
    if (!std::isfinite(s.positions[i])) non_finite(i, s.positions[i]);
  }
  resort(s, cfg.resort);
  s.sim_time += dt;
  ++s.step_index;
}

void run(ParticleSystemState& s, const DriftSpec& drift, const StepConfig& cfg, double horizon,
         TrajectoryRecorder* recorder, const ParticleStreams& streams) {
  cfg.validate();
  drift.validate();
  if (horizon < s.sim_time - 0.5 * cfg.dt) {
    throw ParameterError("horizon precedes the current simulation time");
  }
  const auto nsteps = steps_for(horizon - s.sim_time, cfg.dt);
  const auto last = s.step_index + nsteps;
  PendingSamples pending;
  if (recorder != nullptr) {
    pending = plan_samples(*recorder, s.sim_time, s.step_index, cfg.dt, last);
    recorder->history_dt = cfg.dt;
    if (recorder->track_leftmost_names) recorder->leftmost_name_history.reserve(nsteps);
  }
  auto flush = [&] {
    while (recorder != nullptr && pending.next < pending.targets.size() &&
           pending.targets[pending.next].first == s.step_index) {
      record_full(*recorder, s, pending.targets[pending.next].second);
      ++pending.next;
    }
  };
  flush();
  for (std::uint64_t m = 0; m < nsteps; ++m) {
    if (recorder != nullptr && recorder->track_leftmost_names) {
      recorder->leftmost_name_history.push_back(s.name_at_rank[0]);
    }
    step(s, drift, cfg, streams);
    flush();
  }
}

std::vector<OccupationTime> leftmost_occupation_histogram(const TrajectoryRecorder& rec) {
  if (!rec.track_leftmost_names) {
    throw UnsupportedQueryError("recorder did not capture the leftmost-name history");
  }
  std::vector<std::uint64_t> counts;
  for (Name i : rec.leftmost_name_history) {
    if (i >= counts.size()) counts.resize(i + 1, 0);
    ++counts[i];
  }
  std::vector<OccupationTime> out;
  for (Name i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) {
      out.push_back({i, counts[i], static_cast<double>(counts[i]) * rec.history_dt});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// LocalizedEngine

LocalizedEngine::LocalizedEngine(const ParticleSystemState& initial, DriftSpec drift, StepConfig cfg,
                                 std::uint64_t seed, LocalizationConfig loc)
    : drift_(std::move(drift)), cfg_(cfg), streams_(seed), loc_(loc) {
  cfg_.validate();
  drift_.validate();
  validate(initial);
  if (drift_.gamma_tail != 0.0) {
    throw ParameterError("localized engine requires zero drift beyond a finite prefix of ranks");
  }
  if (!(loc_.window > 0.0) || !(loc_.sigma_buffer > 0.0) || !(loc_.hysteresis >= 0.0)) {
    throw ParameterError("invalid localization parameters");
  }
  prefix_ = std::max<Rank>(1, drift_.active_prefix());
  window_steps_ = std::max<std::uint64_t>(1, steps_for(loc_.window, cfg_.dt));
  positions_ = initial.positions;
  accumulated_drift_ = initial.accumulated_drift;
  last_step_.assign(size(), initial.step_index);
  is_lazy_.assign(size(), 1);
  sim_time_ = initial.sim_time;
  step_index_ = initial.step_index;
  // Seed the active set with the lowest ranks, then schedule everyone else.
  for (Rank k = 0; k < std::min<std::size_t>(prefix_, size()); ++k) {
    const Name i = initial.name_at_rank[k];
    is_lazy_[i] = 0;
    active_.push_back(i);
  }
  rebuild_deadlines();
  refresh_active_set();
}

double LocalizedEngine::total_accumulated_drift() const noexcept {
  double sum = 0.0;
  for (double d : accumulated_drift_) sum += d;
  return sum;
}

std::uint64_t LocalizedEngine::deadline_of(Name i, double ref) const {
  const double dt = cfg_.dt;
  const double tau = static_cast<double>(window_steps_) * dt;
  const double k = loc_.sigma_buffer;
  const double e0 = static_cast<double>(step_index_ - last_step_[i]) * dt;
  const double gmax = drift_.max_abs_gamma();
  const double smax = drift_.max_sigma();
  const double stail = drift_.sigma_tail;
  const double x = positions_[i];
  // Gap left after the reference rank rises and the lazy particle falls by
  // their K-sigma envelopes over a duration d; decreasing in d.
  auto slack = [&](double d) {
    return x - k * stail * std::sqrt(e0 + d) - ref - gmax * d - k * smax * std::sqrt(d);
  };
  if (slack(tau) <= 0.0) return 0;
  double lo = tau;
  double hi = 2.0 * tau;
  while (slack(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  // Checks only happen at window starts, so window resolution suffices.
  for (int it = 0; it < 60 && hi - lo > tau; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slack(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::max<std::uint64_t>(window_steps_, static_cast<std::uint64_t>(lo / dt));
}

void LocalizedEngine::rebuild_deadlines() {
  deadlines_ = {};
  if (active_.empty()) return;
  const double ref = positions_[active_[std::min<std::size_t>(prefix_, active_.size()) - 1]];
  for (Name i = 0; i < size(); ++i) {
    if (is_lazy_[i]) deadlines_.push({step_index_ + deadline_of(i, ref), i});
  }
}

void LocalizedEngine::materialize(Name i) {
  const auto elapsed = step_index_ - last_step_[i];
  if (elapsed > 0) {
    const double sd = drift_.sigma_tail * std::sqrt(static_cast<double>(elapsed) * cfg_.dt);
    positions_[i] += sd * streams_.normal(i, step_index_, StreamPurpose::kLazyJump);
    if (!std::isfinite(positions_[i])) non_finite(i, positions_[i]);
  }
  last_step_[i] = step_index_;
}

void LocalizedEngine::activate(Name i) {
  materialize(i);
  is_lazy_[i] = 0;
  const auto it = std::upper_bound(active_.begin(), active_.end(), i, [&](Name a, Name b) {
    return ranks_before(positions_[a], a, positions_[b], b);
  });
  active_.insert(it, i);
}

void LocalizedEngine::release(Name i) {
  is_lazy_[i] = 1;
  last_step_[i] = step_index_;
  deadlines_.push({step_index_ + deadline_of(i, reference_position()), i});
}

void LocalizedEngine::refresh_active_set() {
  const double ref = reference_position();
  const auto horizon = step_index_ + window_steps_;
  std::vector<Name> to_activate;
  std::vector<Deadline> rescheduled;
  while (!deadlines_.empty() && deadlines_.top().step < horizon) {
    const Name i = deadlines_.top().name;
    deadlines_.pop();
    // Sampling the current position resets the uncertainty envelope, so a
    // particle that is far in reality gets a distant deadline.
    materialize(i);
    const auto d = deadline_of(i, ref);
    if (d == 0) {
      to_activate.push_back(i);
    } else {
      rescheduled.push_back({step_index_ + d, i});
    }
  }
  for (const auto& d : rescheduled) deadlines_.push(d);
  for (Name i : to_activate) activate(i);

  // Release particles that could not return within `kReleaseWindows`
  // windows; the deadline queue re-admits them in time.
  constexpr double kReleaseWindows = 16.0;
  const double tau = static_cast<double>(window_steps_) * cfg_.dt;
  const double k = loc_.sigma_buffer;
  const double d = kReleaseWindows * tau;
  const double release_above = reference_position() + drift_.max_abs_gamma() * d +
                               k * drift_.max_sigma() * std::sqrt(d) + k * drift_.sigma_tail * std::sqrt(d) +
                               loc_.hysteresis;
  while (active_.size() > prefix_ && positions_[active_.back()] > release_above) {
    const Name i = active_.back();
    active_.pop_back();
    release(i);
  }
}

void LocalizedEngine::single_step(TrajectoryRecorder* recorder) {
  if (recorder != nullptr && recorder->track_leftmost_names) {
    recorder->leftmost_name_history.push_back(active_.front());
  }
  const double dt = cfg_.dt;
  const double sqdt = std::sqrt(dt);
  const double tail_noise = drift_.sigma_tail * sqdt;
  const auto m = static_cast<Rank>(active_.size());
  for (Rank k = 0; k < m; ++k) {
    const Name i = active_[k];
    const double z = streams_.normal(i, step_index_);
    if (k < prefix_) {
      const double dd = drift_.gamma_at(k) * dt;
      positions_[i] += dd + drift_.sigma_at(k) * sqdt * z;
      if (dd != 0.0) accumulated_drift_[i] += dd;
    } else {
      positions_[i] += tail_noise * z;
    }
    if (!std::isfinite(positions_[i])) non_finite(i, positions_[i]);
  }
  for (std::size_t k = 1; k < active_.size(); ++k) {
    const Name cur = active_[k];
    const double xc = positions_[cur];
    std::size_t j = k;
    while (j > 0 && ranks_before(xc, cur, positions_[active_[j - 1]], active_[j - 1])) {
      active_[j] = active_[j - 1];
      --j;
    }
    active_[j] = cur;
  }
  sim_time_ += dt;
  ++step_index_;
}

void LocalizedEngine::materialize_all() {
  for (Name i = 0; i < size(); ++i) {
    if (is_lazy_[i]) materialize(i);
  }
  rebuild_deadlines();
}

ParticleSystemState LocalizedEngine::snapshot() {
  materialize_all();
  auto s = ParticleSystemState::from_positions(positions_);
  s.accumulated_drift = accumulated_drift_;
  s.sim_time = sim_time_;
  s.step_index = step_index_;
  return s;
}

void LocalizedEngine::record(TrajectoryRecorder& rec, double requested) {
  if (rec.tracked_ranks.empty() && !rec.keep_full_state) {
    Snapshot snap;
    snap.requested_time = requested;
    snap.time = sim_time_;
    snap.step_index = step_index_;
    snap.leftmost = leftmost();
    rec.recorded.push_back(std::move(snap));
    return;
  }
  record_full(rec, snapshot(), requested);
}

void LocalizedEngine::advance_to(double horizon, TrajectoryRecorder* recorder) {
  if (horizon < sim_time_ - 0.5 * cfg_.dt) {
    throw ParameterError("horizon precedes the current simulation time");
  }
  const auto nsteps = steps_for(horizon - sim_time_, cfg_.dt);
  const auto last = step_index_ + nsteps;
  PendingSamples pending;
  if (recorder != nullptr) {
    pending = plan_samples(*recorder, sim_time_, step_index_, cfg_.dt, last);
    recorder->history_dt = cfg_.dt;
  }
  auto flush = [&] {
    while (recorder != nullptr && pending.next < pending.targets.size() &&
           pending.targets[pending.next].first == step_index_) {
      record(*recorder, pending.targets[pending.next].second);
      ++pending.next;
    }
  };
  flush();
  while (step_index_ < last) {
    if (step_index_ % window_steps_ == 0) refresh_active_set();
    single_step(recorder);
    flush();
  }
}

}  // namespace atlas
