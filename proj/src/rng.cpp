#include "dipr/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dipr {

namespace {

// splitmix64 finalizer; decorrelates derived seeds.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t SplitRng::seed_for_substream(std::uint64_t stream_id) const {
  // The engine state is not consumed; children are derived from a snapshot
  // of the engine's own deterministic output stream seeded at construction.
  std::mt19937_64 probe = engine_;
  return mix64(probe() ^ mix64(stream_id));
}

SplitRng SplitRng::substream(std::string_view name) const {
  return SplitRng(seed_for_substream(fnv1a64(name)));
}

SplitRng SplitRng::substream(std::uint64_t index) const {
  return SplitRng(seed_for_substream(mix64(index)));
}

double SplitRng::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_normal_ = true;
  return radius * std::cos(angle);
}

int SplitRng::categorical(std::span<const double> weights) {
  if (weights.empty()) {
    throw std::invalid_argument("categorical: empty weight vector");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument("categorical: negative or NaN weight");
    }
    total += w;
  }
  if (total <= 0.0) {
    throw std::invalid_argument("categorical: all weights are zero");
  }
  const double u = uniform() * total;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cumulative += weights[i];
    if (u < cumulative) {
      return static_cast<int>(i);
    }
  }
  return static_cast<int>(weights.size() - 1);
}

}  // namespace dipr
