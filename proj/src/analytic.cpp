#include "lmsa/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "lmsa/errors.hpp"

namespace lmsa {

double DiagonalGaussian::expected_sq_norm() const {
  double s = 0.0;
  for (double v : means) s += v * v;
  for (double v : variances) s += v;
  return s;
}

DiagonalGaussian DiagonalGaussian::point(Vector x) {
  DiagonalGaussian g;
  g.variances.assign(x.size(), 0.0);
  g.means = std::move(x);
  return g;
}

namespace {

void check_stable(const QuadraticSpec& q, double h) {
  if (!(h > 0.0)) throw InvalidArgument("step size must be positive");
  const double limit = 2.0 / q.max_curvature();
  if (h >= limit) {
    throw StabilityError("step size " + std::to_string(h) + " violates stability h < 2/L = " + std::to_string(limit));
  }
}

// One coordinate (or a group of identical coordinates) of the LMC iterate law.
struct Coordinate {
  double lam;
  double mean0;
  double var0;
};

struct CoordinateLaw {
  double mean;
  double var;
};

// (1 - lam h)^k evaluated as sign * exp(k log|r|).
double power(double r, std::size_t k) {
  if (k == 0) return 1.0;
  if (r == 0.0) return 0.0;
  const double mag = std::exp(static_cast<double>(k) * std::log(std::abs(r)));
  return (r < 0.0 && (k % 2 == 1)) ? -mag : mag;
}

CoordinateLaw iterate(const Coordinate& c, double h, std::size_t k) {
  const double r = 1.0 - c.lam * h;
  const double limit_var = 2.0 / (c.lam * (2.0 - c.lam * h));
  if (k == 0) return {c.mean0, c.var0};
  double r2k;       // r^{2k}
  double one_minus; // 1 - r^{2k}
  if (r == 0.0) {
    r2k = 0.0;
    one_minus = 1.0;
  } else {
    const double log_r2k = 2.0 * static_cast<double>(k) * std::log(std::abs(r));
    r2k = std::exp(log_r2k);
    one_minus = -std::expm1(log_r2k);
  }
  return {power(r, k) * c.mean0, r2k * c.var0 + limit_var * one_minus};
}

double w2_term(const Coordinate& c, double h, std::size_t k) {
  const auto law = iterate(c, h, k);
  const double sd_target = 1.0 / std::sqrt(c.lam);
  const double ds = std::sqrt(law.var) - sd_target;
  return law.mean * law.mean + ds * ds;
}

struct Group {
  Coordinate c;
  double count;
};

std::vector<Group> group_coordinates(const QuadraticSpec& q, const DiagonalGaussian& start) {
  std::map<std::tuple<double, double, double>, double> counts;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    counts[{q.curvatures[i], start.means[i], start.variances[i]}] += 1.0;
  }
  std::vector<Group> groups;
  for (const auto& [key, n] : counts) {
    groups.push_back({{std::get<0>(key), std::get<1>(key), std::get<2>(key)}, n});
  }
  return groups;
}

double w2_groups(const std::vector<Group>& groups, double h, std::size_t k) {
  double s = 0.0;
  for (const auto& g : groups) s += g.count * w2_term(g.c, h, k);
  return std::sqrt(s);
}

constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();

// Last k up to which the group's W2 contribution is nonincreasing. The mean
// part always decays; the spread part decays until sigma_k crosses the target.
std::size_t turning_step(const Coordinate& c, double h) {
  const double r = 1.0 - c.lam * h;
  if (r == 0.0) return kNever;
  const double target_var = 1.0 / c.lam;
  const double limit_var = 2.0 / (c.lam * (2.0 - c.lam * h));
  if (c.var0 == limit_var) return kNever;
  const double cross = (target_var - limit_var) / (c.var0 - limit_var);  // r^{2k} at the crossing
  if (cross >= 1.0) return 0;
  if (cross <= 0.0) return kNever;
  const double k = std::log(cross) / (2.0 * std::log(std::abs(r)));
  if (k >= 1e18) return kNever;
  return static_cast<std::size_t>(std::floor(k));
}

// Step after which every transient r^{2k} is below 1e-40, so W2 is constant
// to double precision.
std::size_t settle_step(const Coordinate& c, double h) {
  const double r = 1.0 - c.lam * h;
  if (r == 0.0) return 1;
  const double k = std::log(1e-40) / (2.0 * std::log(std::abs(r)));
  if (k >= 1e18) return kNever;
  return static_cast<std::size_t>(std::ceil(k)) + 1;
}

}  // namespace

DiagonalGaussian lmc_iterate_law(const QuadraticSpec& q, double h, std::size_t k, const DiagonalGaussian& start) {
  check_stable(q, h);
  if (start.dim() != q.dim() || start.variances.size() != q.dim()) {
    throw InvalidArgument("lmc_iterate_law: dimension mismatch");
  }
  DiagonalGaussian out;
  out.means.resize(q.dim());
  out.variances.resize(q.dim());
  for (std::size_t i = 0; i < q.dim(); ++i) {
    const auto law = iterate({q.curvatures[i], start.means[i], start.variances[i]}, h, k);
    out.means[i] = law.mean;
    out.variances[i] = law.var;
  }
  return out;
}

DiagonalGaussian lmc_iterate_law(const QuadraticSpec& q, double h, std::size_t k, std::span<const double> x0) {
  return lmc_iterate_law(q, h, k, DiagonalGaussian::point(Vector(x0.begin(), x0.end())));
}

DiagonalGaussian stationary_law(const QuadraticSpec& q) {
  DiagonalGaussian g;
  g.means.assign(q.dim(), 0.0);
  g.variances.resize(q.dim());
  for (std::size_t i = 0; i < q.dim(); ++i) g.variances[i] = 1.0 / q.curvatures[i];
  return g;
}

DiagonalGaussian ou_law(const QuadraticSpec& q, double t, const DiagonalGaussian& start) {
  if (!(t >= 0.0)) throw InvalidArgument("ou_law: t must be nonnegative");
  if (start.dim() != q.dim()) throw InvalidArgument("ou_law: dimension mismatch");
  DiagonalGaussian out;
  out.means.resize(q.dim());
  out.variances.resize(q.dim());
  for (std::size_t i = 0; i < q.dim(); ++i) {
    const double lam = q.curvatures[i];
    const double decay = std::exp(-lam * t);
    out.means[i] = decay * start.means[i];
    out.variances[i] = decay * decay * start.variances[i] - std::expm1(-2.0 * lam * t) / lam;
  }
  return out;
}

double w2_diag(const DiagonalGaussian& a, const DiagonalGaussian& b) {
  if (a.dim() != b.dim() || a.variances.size() != b.variances.size() || a.variances.size() != a.dim()) {
    throw InvalidArgument("w2_diag: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double dm = a.means[i] - b.means[i];
    const double ds = std::sqrt(a.variances[i]) - std::sqrt(b.variances[i]);
    s += dm * dm + ds * ds;
  }
  return std::sqrt(s);
}

FixedStepMixing mixing_time_at(const QuadraticSpec& q, const DiagonalGaussian& start, double eps, double h,
                               std::size_t cap) {
  check_stable(q, h);
  if (!(eps > 0.0)) throw InvalidArgument("mixing time: eps must be positive");
  if (start.dim() != q.dim()) throw InvalidArgument("mixing time: dimension mismatch");

  const auto groups = group_coordinates(q, start);
  auto w2 = [&](std::size_t k) { return w2_groups(groups, h, k); };
  if (w2(0) <= eps) return {true, 0};

  std::size_t monotone_end = cap;
  std::size_t settle = 0;
  for (const auto& g : groups) {
    monotone_end = std::min(monotone_end, turning_step(g.c, h));
    settle = std::max(settle, settle_step(g.c, h));
  }

  if (monotone_end > 0 && w2(monotone_end) <= eps) {
    // W2 is nonincreasing on [0, monotone_end]: doubling, then bisection.
    std::size_t lo = 0;
    std::size_t hi = 1;
    while (hi < monotone_end && w2(hi) > eps) {
      lo = hi;
      hi = std::min(monotone_end, 2 * hi);
    }
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (w2(mid) <= eps ? hi : lo) = mid;
    }
    return {true, hi};
  }

  // Possibly non-monotone tail: scan until W2 has settled or the cap.
  const std::size_t last = std::min(cap, settle);
  for (std::size_t k = monotone_end + 1; k <= last; ++k) {
    if (w2(k) <= eps) return {true, k};
  }
  return {false, 0};
}

MixingResult exact_mixing_time(const QuadraticSpec& q, const DiagonalGaussian& start, double eps,
                               std::span<const double> h_grid, std::size_t cap) {
  if (h_grid.empty()) throw InvalidArgument("exact_mixing_time: empty step-size grid");
  bool found = false;
  MixingResult best;
  for (double h : h_grid) {
    const auto r = mixing_time_at(q, start, eps, h, cap);
    if (!r.reached) continue;
    if (!found || r.k < best.k || (r.k == best.k && h > best.h)) {
      best = {r.k, h};
      found = true;
    }
  }
  if (!found) {
    throw NotReached("exact_mixing_time: no step size on the grid reaches eps=" + std::to_string(eps) +
                     " within " + std::to_string(cap) + " iterations");
  }
  return best;
}

MixingResult exact_mixing_time(const QuadraticSpec& q, std::span<const double> x0, double eps,
                               std::span<const double> h_grid, std::size_t cap) {
  return exact_mixing_time(q, DiagonalGaussian::point(Vector(x0.begin(), x0.end())), eps, h_grid, cap);
}

double ou_coupled_distance(const QuadraticSpec& q, std::span<const double> x0, std::span<const double> y0,
                           double t) {
  if (x0.size() != q.dim() || y0.size() != q.dim()) throw InvalidArgument("ou_coupled_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    const double diff = std::exp(-q.curvatures[i] * t) * (x0[i] - y0[i]);
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace lmsa
