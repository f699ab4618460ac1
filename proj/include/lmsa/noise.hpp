#pragma once

#include <cstdint>
#include <span>

namespace lmsa {

/// Counter-based source of standard Gaussian vectors.
///
/// A draw is a pure function of (seed, replica, step, lane): the same tuple
/// always yields the same vector regardless of call order or thread. Lanes
/// separate independent uses of the same (replica, step) slot, e.g. the fine
/// Brownian increments of one coarse step.
class NoiseStream {
 public:
  // Reserved lanes.
  static constexpr std::uint32_t kCoarseLane = 0;
  static constexpr std::uint32_t kStartLane = 0xFFFF0001u;
  static constexpr std::uint32_t kAuxLane = 0xFFFF0002u;
  static constexpr std::uint32_t kStartLaneY = 0xFFFF0003u;

  explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  void fill(std::uint64_t replica, std::uint64_t step, std::span<double> out,
            std::uint32_t lane = kCoarseLane) const;

  /// Uniform draws in (0, 1], same determinism contract as fill().
  void fill_uniform(std::uint64_t replica, std::uint64_t step, std::span<double> out,
                    std::uint32_t lane = kCoarseLane) const;

 private:
  std::uint64_t seed_;
};

}  // namespace lmsa
