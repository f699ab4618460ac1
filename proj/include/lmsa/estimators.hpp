#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lmsa/analytic.hpp"
#include "lmsa/potentials.hpp"
#include "lmsa/sampler.hpp"

namespace lmsa {

/// Least-squares line through `points`.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::pair<double, double>> points;
};

/// Line fit in log-log coordinates: points hold (log x, log y).
struct OrderFit : LineFit {};

/// Ordinary least squares. Needs >= 2 points with distinct x. r2 is 1 when
/// the y values are all equal (the constant line fits exactly).
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

/// Throws InvalidArgument on nonpositive input or fewer than 2 points.
OrderFit fit_loglog(std::span<const double> xs, std::span<const double> ys);

/// Per-step-size one-step error statistics of LMC against the reference
/// solution on a shared Brownian path.
struct LocalErrorPoint {
  double h = 0.0;
  double strong_rms = 0.0;      // (E|x1 - x_h|^2)^{1/2}
  double strong_rms_se = 0.0;   // standard error of strong_rms (delta method)
  double weak_norm = 0.0;       // |E(x1 - x_h)|
  Vector weak_mean;             // E(x1 - x_h)
  double weak_se = 0.0;         // RMS standard error of the weak_mean coordinates
};

struct LocalErrorOptions {
  std::size_t replicas = 100'000;
  std::size_t substeps = 16;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
};

std::vector<LocalErrorPoint> local_errors(const PotentialModel& p, const StartSpec& start,
                                          std::span<const double> h_grid, const LocalErrorOptions& opt);

/// Fitted order of (E|x1 - x_h|^2)^{1/2} in h; LMC predicts 3/2.
OrderFit local_strong_order(const PotentialModel& p, const StartSpec& start, std::span<const double> h_grid,
                            const LocalErrorOptions& opt);

/// Fitted order of |E(x1 - x_h)| in h; LMC predicts 2.
OrderFit local_weak_order(const PotentialModel& p, const StartSpec& start, std::span<const double> h_grid,
                          const LocalErrorOptions& opt);

/// Exact local weak error of LMC for a 1D unit-curvature quadratic from a
/// deterministic x: |e^{-h} - 1 + h| |x|.
double exact_weak_error_unit_quadratic(double h, double x);

struct ContractionEstimate {
  bool degenerate = false;  // distance zero from the start; no fit
  double rate = 0.0;        // minus the slope of log RMS distance against t
  LineFit fit;              // points are (t, log RMS distance)
};

/// Distances below this are excluded from the log-distance fit.
inline constexpr double kDistanceFloor = 1e-12;

/// Contraction rate of synchronously coupled LMC chains. `burn_in` leading
/// steps are excluded from the fit.
ContractionEstimate contraction_rate(const PotentialModel& p, const ChainConfig& cfg, std::span<const double> x0,
                                     std::span<const double> y0, std::size_t burn_in = 0);

/// Same fit applied to coupled exact OU solutions sampled at `times`.
ContractionEstimate ou_contraction_rate(const QuadraticSpec& q, std::span<const double> x0,
                                        std::span<const double> y0, std::span<const double> times);

/// |mean of states - mu_mean|; states is replica-major M x d.
double mean_error_surrogate(std::span<const double> states, std::size_t d, std::span<const double> mu_mean);

/// Same from a precomputed empirical mean.
double mean_error(std::span<const double> empirical_mean, std::span<const double> mu_mean);

/// Outcome of a proven inequality lhs <= rhs at one configuration.
struct InequalityCheck {
  std::string label;
  double h = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  double margin() const { return rhs - lhs; }
};

/// E|x_h - x|^2 <= 6 (d + (m/2) E|x|^2) h, with the left side from exact
/// OU moments for x ~ start.
std::vector<InequalityCheck> growth_bound_check(const QuadraticSpec& q, const DiagonalGaussian& start,
                                                std::span<const double> h_grid);

/// |z|^2 <= (m/4) |x - y|^2 h with z = (x_h - y_h) - (x - y) on coupled OU
/// solutions, for each deterministic pair.
std::vector<InequalityCheck> evolved_deviation_check(
    const QuadraticSpec& q, const std::vector<std::pair<Vector, Vector>>& pairs, std::span<const double> h_grid);

/// Empirical E|x_k|^2 <= E|x0|^2 + 8d/(7m) + 3 standard errors at every
/// recorded step of `run`.
std::vector<InequalityCheck> boundedness_check(const PotentialModel& p, const ChainRun& run, double ex0_sq);

}  // namespace lmsa
