#include "atlas/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "atlas/errors.hpp"

namespace atlas {

namespace {

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

ParticleSystemState from_ranked_positions(std::vector<double> ranked) {
  ParticleSystemState s;
  const auto n = ranked.size();
  s.positions = std::move(ranked);
  s.rank_of.resize(n);
  s.name_at_rank.resize(n);
  std::iota(s.rank_of.begin(), s.rank_of.end(), Rank{0});
  std::iota(s.name_at_rank.begin(), s.name_at_rank.end(), Name{0});
  s.accumulated_drift.assign(n, 0.0);
  return s;
}

}  // namespace

ParticleSystemState ParticleSystemState::from_positions(std::vector<double> positions) {
  const auto n = positions.size();
  if (n == 0) {
    throw ParameterError("particle configuration must be non-empty");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(positions[i])) {
      throw ParameterError("non-finite position for particle " + std::to_string(i + 1));
    }
  }
  ParticleSystemState s;
  s.positions = std::move(positions);
  s.name_at_rank.resize(n);
  std::iota(s.name_at_rank.begin(), s.name_at_rank.end(), Name{0});
  std::sort(s.name_at_rank.begin(), s.name_at_rank.end(), [&](Name a, Name b) {
    return ranks_before(s.positions[a], a, s.positions[b], b);
  });
  s.rank_of.resize(n);
  for (Rank k = 0; k < n; ++k) {
    s.rank_of[s.name_at_rank[k]] = k;
  }
  s.accumulated_drift.assign(n, 0.0);
  return s;
}

std::vector<double> ParticleSystemState::ranked_positions() const {
  std::vector<double> out(size());
  for (Rank k = 0; k < out.size(); ++k) {
    out[k] = positions[name_at_rank[k]];
  }
  return out;
}

double ParticleSystemState::total_accumulated_drift() const noexcept {
  return std::accumulate(accumulated_drift.begin(), accumulated_drift.end(), 0.0);
}

void validate(const ParticleSystemState& s) {
  const auto n = s.positions.size();
  if (s.rank_of.size() != n || s.name_at_rank.size() != n || s.accumulated_drift.size() != n) {
    throw ParameterError("state arrays have inconsistent lengths");
  }
  for (Rank k = 0; k < n; ++k) {
    const Name i = s.name_at_rank[k];
    if (i >= n || s.rank_of[i] != k) {
      throw ParameterError("rank_of and name_at_rank are not mutually inverse at rank " + std::to_string(k + 1));
    }
    if (k + 1 < n) {
      const Name j = s.name_at_rank[k + 1];
      if (!ranks_before(s.positions[i], i, s.positions[j], j)) {
        throw ParameterError("ranked order violated between ranks " + std::to_string(k + 1) + " and " +
                             std::to_string(k + 2));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s.accumulated_drift[i] >= 0.0)) {
      throw ParameterError("negative accumulated drift for particle " + std::to_string(i + 1));
    }
  }
  if (!(s.sim_time >= 0.0)) {
    throw ParameterError("negative simulation time");
  }
}

SpacingsSequence spacings_of(const ParticleSystemState& state) {
  SpacingsSequence out;
  const auto n = state.size();
  if (n < 2) {
    return out;
  }
  out.gaps.resize(n - 1);
  for (Rank k = 0; k + 1 < n; ++k) {
    out.gaps[k] = state.ranked_position(k + 1) - state.ranked_position(k);
  }
  return out;
}

std::vector<double> positions_from_spacings(double leftmost, const SpacingsSequence& s) {
  std::vector<double> out;
  out.reserve(s.gaps.size() + 1);
  out.push_back(leftmost);
  for (double g : s.gaps) {
    out.push_back(out.back() + g);
  }
  return out;
}

DriftSpec DriftSpec::atlas(double gamma) {
  DriftSpec d;
  d.gamma = {gamma};
  return d;
}

DriftSpec DriftSpec::harris() { return DriftSpec{}; }

Rank DriftSpec::active_prefix() const noexcept {
  Rank p = 0;
  for (Rank k = 0; k < gamma.size(); ++k) {
    if (gamma[k] != gamma_tail) p = k + 1;
  }
  for (Rank k = 0; k < sigma.size(); ++k) {
    if (sigma[k] != sigma_tail) p = std::max(p, k + 1);
  }
  return p;
}

double DriftSpec::max_abs_gamma() const noexcept {
  double m = std::fabs(gamma_tail);
  for (double g : gamma) m = std::max(m, std::fabs(g));
  return m;
}

double DriftSpec::max_sigma() const noexcept {
  double m = sigma_tail;
  for (double s : sigma) m = std::max(m, s);
  return m;
}

void DriftSpec::validate() const {
  if (!(sigma_tail > 0.0) || !std::isfinite(sigma_tail)) {
    throw ParameterError("diffusion coefficients must be positive");
  }
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("diffusion coefficients must be positive");
  }
  if (!std::isfinite(gamma_tail)) throw ParameterError("drift coefficients must be finite");
  for (double g : gamma) {
    if (!std::isfinite(g)) throw ParameterError("drift coefficients must be finite");
  }
}

double ProductExponentialSpacings::rate_at(std::size_t k) const {
  if (k < rates.size()) return rates[k];
  if (tail_rate > 0.0) return tail_rate;
  if (rates.empty()) throw ParameterError("spacings law has no rates");
  return rates.back();
}

ParticleSystemState sample_ppp_half_line(double lambda, std::size_t n, std::uint64_t seed) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("Poisson intensity must be positive, got " + format_double(lambda));
  }
  return sample_spacings_law(ProductExponentialSpacings{{lambda}, lambda}, n, seed);
}

ParticleSystemState sample_spacings_law(const ProductExponentialSpacings& law, std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    throw ParameterError("particle count must be positive");
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double r = law.rate_at(k);
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ParameterError("gap rate " + std::to_string(k + 1) + " must be positive, got " + format_double(r));
    }
  }
  const ParticleStreams streams(seed);
  std::vector<double> ranked(n);
  ranked[0] = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    ranked[k + 1] = ranked[k] + streams.exponential(law.rate_at(k), static_cast<Name>(k), 0);
  }
  return from_ranked_positions(std::move(ranked));
}

ParticleSystemState sample_spacings_law(std::span<const double> rates, std::size_t n, std::uint64_t seed) {
  return sample_spacings_law(ProductExponentialSpacings{{rates.begin(), rates.end()}, 0.0}, n, seed);
}

ParticleSystemState sample_initial(const InitialLaw& law, std::size_t n, std::uint64_t seed) {
  return std::visit(
      [&](const auto& l) -> ParticleSystemState {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PoissonHalfLine>) {
          return sample_ppp_half_line(l.lambda, n, seed);
        } else {
          return sample_spacings_law(l, n, seed);
        }
      },
      law);
}

std::vector<double> finite_atlas_invariant_rates(std::size_t n) {
  if (n == 0) throw ParameterError("particle count must be positive");
  std::vector<double> rates;
  rates.reserve(n - 1);
  for (std::size_t k = 1; k < n; ++k) {
    rates.push_back(2.0 - 2.0 * static_cast<double>(k) / static_cast<double>(n));
  }
  return rates;
}

std::vector<double> tilted_invariant_rates(double a, std::size_t count) {
  std::vector<double> rates;
  rates.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) {
    rates.push_back(2.0 + static_cast<double>(k) * a);
  }
  return rates;
}

void write_configuration_csv(std::ostream& out, const ParticleSystemState& state) {
  out << "name,position\n";
  for (std::size_t i = 0; i < state.size(); ++i) {
    out << (i + 1) << ',' << format_double(state.positions[i]) << '\n';
  }
}

ParticleSystemState read_configuration_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("name,position", 0) != 0) {
    throw ParameterError("configuration CSV must start with header 'name,position'");
  }
  std::vector<std::pair<std::size_t, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParameterError("malformed configuration row: " + line);
    const auto name = std::stoull(line.substr(0, comma));
    const double x = std::stod(line.substr(comma + 1));
    if (name == 0) throw ParameterError("particle names are 1-based");
    rows.emplace_back(name - 1, x);
  }
  std::vector<double> positions(rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [name, x] : rows) {
    if (name >= rows.size() || seen[name]) {
      throw ParameterError("particle names must be a permutation of 1..n");
    }
    seen[name] = true;
    positions[name] = x;
  }
  return ParticleSystemState::from_positions(std::move(positions));
}

std::string configuration_to_json(const ParticleSystemState& state) {
  nlohmann::json j;
  j["schema"] = "atlas-configuration/1";
  j["sim_time"] = state.sim_time;
  j["step_index"] = state.step_index;
  j["positions"] = state.positions;
  j["accumulated_drift"] = state.accumulated_drift;
  return j.dump(1);
}

ParticleSystemState configuration_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("schema", "") != "atlas-configuration/1") {
    throw ParameterError("unsupported configuration schema");
  }
  auto s = ParticleSystemState::from_positions(j.at("positions").get<std::vector<double>>());
  s.sim_time = j.value("sim_time", 0.0);
  s.step_index = j.value("step_index", std::uint64_t{0});
  if (j.contains("accumulated_drift")) {
    s.accumulated_drift = j.at("accumulated_drift").get<std::vector<double>>();
  }
  validate(s);
  return s;
}

}  // namespace atlas
