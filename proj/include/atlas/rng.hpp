#pragma once

#include <array>
#include <cstdint>

namespace atlas {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// Stateless: the output is a pure function of (key, counter).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Purpose tags keep the draws of different consumers on disjoint counters.
enum class StreamPurpose : std::uint32_t {
  kStep = 0,
  kInitial = 1,
  kLazyJump = 2,
  kAuxiliary = 3,
};

/// Independent stream per (seed, particle name). Draw `index` of purpose `p`
/// is a pure function of its arguments, so draws can be generated in any
/// order and replicas are reproducible.
class ParticleStreams {
 public:
  explicit ParticleStreams(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  [[nodiscard]] std::uint64_t seed() const noexcept {
    return (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
  }

  /// 64 random bits.
  [[nodiscard]] std::uint64_t bits(std::uint32_t name, std::uint64_t index,
                                   StreamPurpose purpose = StreamPurpose::kStep) const noexcept {
    const auto out = Philox4x32::generate(
        {name, static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
         static_cast<std::uint32_t>(purpose)},
        key_);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  }

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  [[nodiscard]] double uniform(std::uint32_t name, std::uint64_t index,
                               StreamPurpose purpose = StreamPurpose::kStep) const noexcept {
    return (static_cast<double>(bits(name, index, purpose) >> 11) + 0.5) * 0x1.0p-53;
  }

  [[nodiscard]] double normal(std::uint32_t name, std::uint64_t index,
                              StreamPurpose purpose = StreamPurpose::kStep) const noexcept;

  [[nodiscard]] double exponential(double rate, std::uint32_t name, std::uint64_t index,
                                   StreamPurpose purpose = StreamPurpose::kInitial) const noexcept;

 private:
  Philox4x32::Key key_;
};

/// Inverse of the standard normal CDF (Wichura, AS 241, PPND16).
/// Relative accuracy about 1e-16 on (0, 1).
double inverse_normal_cdf(double p) noexcept;

/// Derives a well-mixed 64-bit seed for replica `index` from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

}  // namespace atlas
