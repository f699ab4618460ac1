#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lmsa {

using Vector = std::vector<double>;

/// Writes a vector-valued evaluation of x into out (same length as x).
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;
using ScalarField = std::function<double(std::span<const double> x)>;

/// Diagonal quadratic potential f(x) = 1/2 sum_i curvatures[i] x_i^2.
struct QuadraticSpec {
  Vector curvatures;

  std::size_t dim() const { return curvatures.size(); }
  double min_curvature() const;
  double max_curvature() const;
};

/// Target potential f with its regularity constants.
///
/// m and L bound the Hessian spectrum (m I <= Hess f <= L I). G, when known,
/// bounds the growth of grad(Laplacian f): |grad Lap f(x)| <= G (1 + |x|).
/// The evaluators are pure and may be called concurrently.
struct PotentialModel {
  std::string name;
  std::size_t d = 0;
  double m = 0.0;
  double L = 0.0;
  std::optional<double> G;

  VectorField gradient;
  VectorField grad_laplacian;  // empty when unavailable
  ScalarField value;           // empty when unavailable

  // Set for diagonal quadratic targets; enables exact OU transitions.
  std::optional<QuadraticSpec> quadratic;

  double kappa() const { return L / m; }

  Vector grad(std::span<const double> x) const;
  Vector grad_lap(std::span<const double> x) const;
};

PotentialModel make_quadratic(const Vector& curvatures);

/// Two-block Gaussian target: d coordinates with curvature m followed by d
/// coordinates with curvature L (total dimension 2d).
PotentialModel make_two_block_quadratic(double m, double L, std::size_t d);

/// f1(x) = |x|^2/2 + log sum_i exp(x_i). m = 1, L = 2.
PotentialModel make_f1(std::size_t d);

/// f2(x) = |x|^2/2 - (1/(2 sqrt d)) sum_i cos(d^{1/4} x_i). L = 3/2, m = 1/2.
PotentialModel make_f2(std::size_t d);

/// Max over `samples` uniform points in the ball of radius `radius` of
/// |grad Lap f(x)| / (1 + |x|). Deterministic in `seed`.
double estimate_G(const PotentialModel& p, double radius, std::size_t samples, std::uint64_t seed);

/// Parsed potential selector, e.g. "f1(10)", "f2" (dimension supplied
/// later), "quadratic(1,4)", "quadratic(m=1,L=4,d=16)".
struct PotentialSpec {
  enum class Family { Quadratic, TwoBlock, F1, F2 };
  Family family = Family::F1;
  Vector curvatures;         // Quadratic
  double block_m = 1.0;      // TwoBlock
  double block_L = 4.0;      // TwoBlock
  std::size_t d = 0;         // F1/F2 dimension, TwoBlock block size; 0 = unset

  /// Canonical text form; parse(to_string()) round-trips.
  std::string to_string() const;
};

PotentialSpec parse_potential(const std::string& text);

/// Builds the potential. When `dim` is given it overrides the spec's
/// dimension (block size for TwoBlock); a single-curvature quadratic is
/// broadcast to `dim` coordinates.
PotentialModel instantiate(const PotentialSpec& spec, std::optional<std::size_t> dim = std::nullopt);

}  // namespace lmsa
