#include "olqr/rng.hpp"

#include <cmath>
#include <numbers>

namespace olqr {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64_mix(splitmix64_mix(a + kGolden) ^ (b * kGolden + 1));
}

CounterRng::CounterRng(std::uint64_t seed, Stream stream)
    : CounterRng(seed, static_cast<std::uint64_t>(stream)) {}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(derive_seed(seed, stream)) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64_mix(key_ + (counter + 1) * kGolden);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::uniform(std::uint64_t counter, double lo,
                           double hi) const {
  return lo + (hi - lo) * uniform(counter);
}

double CounterRng::gaussian(std::uint64_t counter) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace olqr
