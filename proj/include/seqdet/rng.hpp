#pragma once

#include <cstdint>
#include <limits>

namespace seqdet {

/// SplitMix64: a counter-based generator (the state is a Weyl sequence, each output a bijective
/// mix of the counter). Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix(state_ += kGamma); }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

/// Independent substream for (master seed, purpose, hypothesis, replication).
inline SplitMix64 substream(std::uint64_t master_seed, std::uint64_t purpose, std::uint64_t hypothesis,
                            std::uint64_t replication) noexcept {
  std::uint64_t k = SplitMix64::mix(master_seed + 0x9e3779b97f4a7c15ULL);
  k = SplitMix64::mix(k ^ (purpose + 0x632be59bd9b4e019ULL));
  k = SplitMix64::mix(k ^ (hypothesis + 0x8cb92ba72f3d8dd7ULL));
  k = SplitMix64::mix(k ^ replication);
  return SplitMix64(k);
}

}  // namespace seqdet
