#pragma once

#include <cstdint>

namespace olqr {

// Streams used by the generators. Values are part of the reproducibility
// contract: changing one changes every generated instance.
enum class Stream : std::uint64_t {
  kCostQ = 1,
  kCostR = 2,
  kDisturbance = 3,
  kInitialState = 4,
  kPredictionNoise = 5,
  kSystem = 6,
  kCostShape = 7,
};

// Counter-based generator: the k-th draw of a stream is a pure function of
// (seed, stream, k). Draws are SplitMix64 outputs keyed by a per-stream
// 64-bit key, so any draw can be reproduced without replaying earlier ones.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream);
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t bits(std::uint64_t counter) const;

  // Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform(std::uint64_t counter) const;
  double uniform(std::uint64_t counter, double lo, double hi) const;

  // Standard normal from the Box-Muller cosine branch applied to draws
  // 2k and 2k+1.
  double gaussian(std::uint64_t counter) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

// Combines an ordered list of identifiers into one seed, for splitting
// streams per (experiment, cell, seed).
std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b);

}  // namespace olqr
