#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace sirs {

// Counter-based Philox4x32-10 generator. Every stream is addressed by a
// (seed, stream id) pair, so any number of workers can draw from disjoint
// streams without sharing state, and results do not depend on scheduling.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 2) {
      refill();
    }
    const auto lo = static_cast<std::uint64_t>(buffer_[2 * lane_]);
    const auto hi = static_cast<std::uint64_t>(buffer_[2 * lane_ + 1]);
    ++lane_;
    return lo | (hi << 32);
  }

  // Uniform double in the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t stream() const { return stream_; }

  // Raw ten-round bijection, exposed for known-answer tests.
  static Block encrypt(Block ctr, Key key);

 private:
  void refill();

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int lane_ = 2;
};

using Rng = Philox4x32;

// SplitMix64 finalizer; used to fold stream coordinates into one id.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_id(std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  for (auto c : coords) {
    h = mix64(h ^ mix64(c));
  }
  return h;
}

// A (seed, namespace) pair from which child streams are derived
// deterministically, e.g. key.child(step, particle).
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t ns = 0;

  StreamKey child(std::initializer_list<std::uint64_t> coords) const {
    std::uint64_t h = ns;
    for (auto c : coords) {
      h = mix64(h ^ mix64(c + 0x632BE59BD9B4E019ULL));
    }
    return {seed, h};
  }
  Rng rng() const { return Rng(seed, ns); }
  Rng rng(std::initializer_list<std::uint64_t> coords) const { return child(coords).rng(); }
};

// Purpose tags used when deriving streams.
enum class Purpose : std::uint64_t {
  kInitial = 1,
  kPropagate = 2,
  kResample = 3,
  kTrajectory = 4,
  kProposal = 5,
  kAccept = 6,
  kFilter = 7,
  kObservation = 8,
  kPredict = 9,
  kDecomposition = 10,
  kResidual = 11,
};

constexpr std::uint64_t tag(Purpose p) { return static_cast<std::uint64_t>(p); }

// Distribution helpers that accept degenerate parameters (zero means,
// zero trials) which the standard distributions reject.
inline std::int64_t draw_poisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(rng);
}

inline std::int64_t draw_binomial(Rng& rng, std::int64_t trials, double p) {
  if (trials <= 0 || !(p > 0.0)) return 0;
  if (p >= 1.0) return trials;
  return std::binomial_distribution<std::int64_t>(trials, p)(rng);
}

inline double draw_exponential(Rng& rng, double rate) { return -std::log(rng.uniform_open()) / rate; }

inline double draw_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace sirs
