#pragma once

#include <cstddef>
#include <span>

#include "lmsa/potentials.hpp"

namespace lmsa {

/// Product Gaussian N(means, diag(variances)).
struct DiagonalGaussian {
  Vector means;
  Vector variances;

  std::size_t dim() const { return means.size(); }
  double expected_sq_norm() const;
  static DiagonalGaussian point(Vector x);
};

/// Exact law of the k-th LMC iterate on a quadratic target started from x0:
/// mean (1 - lam h)^k x0, variance 2/(lam (2 - lam h)) (1 - (1 - lam h)^{2k}).
/// Throws StabilityError when h >= 2 / max lam.
DiagonalGaussian lmc_iterate_law(const QuadraticSpec& q, double h, std::size_t k, std::span<const double> x0);

/// Same, for a product-Gaussian start.
DiagonalGaussian lmc_iterate_law(const QuadraticSpec& q, double h, std::size_t k, const DiagonalGaussian& start);

/// Target law N(0, diag(1/lam)).
DiagonalGaussian stationary_law(const QuadraticSpec& q);

/// Law of the Langevin diffusion at time t from a product-Gaussian start
/// (exact OU transition).
DiagonalGaussian ou_law(const QuadraticSpec& q, double t, const DiagonalGaussian& start);

/// W2 between product Gaussians: sqrt(sum (mu1-mu2)^2 + (sigma1-sigma2)^2).
double w2_diag(const DiagonalGaussian& a, const DiagonalGaussian& b);

struct MixingResult {
  std::size_t k = 0;
  double h = 0.0;
};

inline constexpr std::size_t kDefaultMixingCap = 10'000'000;

/// Smallest k with W2(Law(x_k), target) <= eps at a fixed step size. Returns
/// false in `reached` when W2 never drops to eps within `cap` iterations.
struct FixedStepMixing {
  bool reached = false;
  std::size_t k = 0;
};
FixedStepMixing mixing_time_at(const QuadraticSpec& q, const DiagonalGaussian& start, double eps, double h,
                               std::size_t cap = kDefaultMixingCap);

/// Minimum over h_grid of the exact mixing time; ties go to the larger h.
/// Throws NotReached when no grid point reaches eps within `cap`.
MixingResult exact_mixing_time(const QuadraticSpec& q, const DiagonalGaussian& start, double eps,
                               std::span<const double> h_grid, std::size_t cap = kDefaultMixingCap);
MixingResult exact_mixing_time(const QuadraticSpec& q, std::span<const double> x0, double eps,
                               std::span<const double> h_grid, std::size_t cap = kDefaultMixingCap);

/// Coupled exact OU solutions from x0 and y0 driven by one Brownian path:
/// |x_t - y_t| = sqrt(sum e^{-2 lam t} (x0 - y0)^2). Deterministic.
double ou_coupled_distance(const QuadraticSpec& q, std::span<const double> x0, std::span<const double> y0,
                           double t);

}  // namespace lmsa
