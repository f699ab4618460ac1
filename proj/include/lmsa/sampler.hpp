#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lmsa/noise.hpp"
#include "lmsa/potentials.hpp"

namespace lmsa {

/// Initial law of a chain: a point mass or a product Gaussian.
struct StartSpec {
  enum class Kind { Point, Gaussian };
  Kind kind = Kind::Point;
  Vector mean;
  Vector variance;  // empty for Point

  static StartSpec point(Vector x);
  static StartSpec gaussian(Vector mean, Vector variance);
  /// N(0, diag(1/lambda)), the target law of a quadratic potential.
  static StartSpec stationary(const QuadraticSpec& q);

  std::size_t dim() const { return mean.size(); }
  /// E|x0|^2.
  double expected_sq_norm() const;
  void draw(const NoiseStream& noise, std::uint64_t replica, std::span<double> out,
            std::uint32_t lane = NoiseStream::kStartLane) const;
};

struct ChainConfig {
  double h = 0.1;
  std::size_t steps = 0;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  StartSpec x0;
  /// Worker threads; 0 picks hardware concurrency. Never affects results.
  std::size_t workers = 0;
};

/// Rejects non-positive h and, for quadratic targets, h >= 2/L.
void check_step_size(const PotentialModel& p, double h);

/// One LMC update x - h grad f(x) + sqrt(2h) xi.
/// Throws NumericalDivergence (replica 0, `step`) on a non-finite result.
Vector lmc_step(std::span<const double> x, const PotentialModel& p, double h,
                std::span<const double> xi, std::size_t step = 0);

/// Replica statistics at one recorded step.
struct StepMoments {
  std::size_t step = 0;
  Vector mean;           // per-coordinate empirical mean
  Vector second_moment;  // per-coordinate empirical E x_i^2
  double mean_sq_norm = 0.0;      // empirical E|x|^2
  double sq_norm_variance = 0.0;  // empirical Var |x|^2
  Vector states;                  // replica-major M x d, only when kept

  Vector variance() const;
};

struct ChainRun {
  std::size_t replicas = 0;
  std::size_t dim = 0;
  std::vector<StepMoments> records;  // ascending step order

  const StepMoments& at_step(std::size_t step) const;
};

/// Advances cfg.replicas independent chains cfg.steps steps. Replica j at
/// step k consumes NoiseStream(cfg.seed).fill(j, k); results are
/// bit-identical for any worker count.
ChainRun run_chains(const PotentialModel& p, const ChainConfig& cfg, std::vector<std::size_t> record,
                    bool keep_states = false);

/// Squared-distance statistics of synchronously coupled chain pairs.
struct CoupledRun {
  std::size_t replicas = 0;
  Vector mean_sq_distance;      // indexed by step 0..K
  Vector sq_distance_variance;  // across pairs
  std::vector<Vector> coord_mean_sq;  // per step, per coordinate E (x_i - y_i)^2
};

/// Runs x and y chains from x0 / y0 on identical noise (cfg.x0 is ignored).
CoupledRun run_coupled_pair(const PotentialModel& p, const ChainConfig& cfg, std::span<const double> x0,
                            std::span<const double> y0);

/// Brownian increments of one coarse step of length h split into `substeps`
/// pieces: fine[j*d + i] are standard normals with dW_j = sqrt(h/substeps)
/// * fine_j. The coarse normal is their normalized sum. `aux` is an extra
/// independent normal vector used where the fine path underdetermines a draw.
struct BrownianPartition {
  std::size_t substeps = 1;
  std::size_t d = 0;
  Vector fine;
  Vector aux;

  static BrownianPartition draw(const NoiseStream& noise, std::uint64_t replica, std::uint64_t step,
                                std::size_t substeps, std::size_t d);
  /// xi = sum_j fine_j / sqrt(substeps) ~ N(0, I).
  Vector coarse() const;
};

/// Solution of the Langevin SDE over [0, h] from x on the Brownian path
/// described by `noise`.
///
/// Quadratic targets use the exact OU transition, drawn from its conditional
/// law given the fine increments (aux supplies the residual). Other targets
/// use Euler-Maruyama on the fine grid; with one substep this is exactly
/// lmc_step with the coarse normal.
Vector reference_solution(const PotentialModel& p, std::span<const double> x, double h,
                          const BrownianPartition& noise);

}  // namespace lmsa
