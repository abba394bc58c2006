#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace dipr {

// Deterministic seeded RNG with named substreams. All randomness in the
// project flows through this type so that a single master seed reproduces
// every component exactly, on any platform. Substream derivation uses
// FNV-1a rather than std::hash (whose output is implementation-defined).
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : engine_(seed) {}

  // Derives an independent stream identified by a name, e.g. "scene_gen".
  SplitRng substream(std::string_view name) const;
  // Derives an independent stream identified by an index, e.g. a step number.
  SplitRng substream(std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  // Standard normal via Box-Muller; the spare sample is cached.
  double normal();

  // Samples an index from unnormalized non-negative weights.
  int categorical(std::span<const double> weights);

 private:
  std::uint64_t seed_for_substream(std::uint64_t stream_id) const;

  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// FNV-1a 64-bit hash; stable across platforms.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace dipr
