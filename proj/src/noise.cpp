#include "lmsa/noise.hpp"

#include <cmath>
#include <numbers>

namespace lmsa {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b * 0xD1B54A32D192ED03ull);
  return splitmix64(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// xoshiro256** keyed by a hash of the counter tuple.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t key) {
    for (auto& w : s_) w = splitmix64(key);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // (0, 1]
  double uniform() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

 private:
  std::uint64_t s_[4];
};

std::uint64_t counter_key(std::uint64_t seed, std::uint64_t replica, std::uint64_t step,
                          std::uint32_t lane) {
  return mix(mix(mix(seed, replica), step), lane);
}

}  // namespace

void NoiseStream::fill(std::uint64_t replica, std::uint64_t step, std::span<double> out,
                       std::uint32_t lane) const {
  Xoshiro256 gen(counter_key(seed_, replica, step, lane));
  // Box-Muller, both outputs used.
  std::size_t i = 0;
  for (; i + 1 < out.size(); i += 2) {
    const double radius = std::sqrt(-2.0 * std::log(gen.uniform()));
    const double angle = 2.0 * std::numbers::pi * gen.uniform();
    out[i] = radius * std::cos(angle);
    out[i + 1] = radius * std::sin(angle);
  }
  if (i < out.size()) {
    const double radius = std::sqrt(-2.0 * std::log(gen.uniform()));
    const double angle = 2.0 * std::numbers::pi * gen.uniform();
    out[i] = radius * std::cos(angle);
  }
}

void NoiseStream::fill_uniform(std::uint64_t replica, std::uint64_t step, std::span<double> out,
                               std::uint32_t lane) const {
  Xoshiro256 gen(counter_key(seed_, replica, step, lane) ^ 0x5851F42D4C957F2Dull);
  for (auto& u : out) u = gen.uniform();
}

}  // namespace lmsa
