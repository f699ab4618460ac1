#include "lmsa/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "lmsa/errors.hpp"
#include "lmsa/parallel.hpp"

namespace lmsa {

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("fit: x/y length mismatch");
  if (xs.size() < 2) throw InvalidArgument("fit: at least 2 points required");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit: x values must not all coincide");

  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += r * r;
    fit.points.emplace_back(xs[i], ys[i]);
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return fit;
}

OrderFit fit_loglog(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("fit_loglog: x/y length mismatch");
  if (xs.size() < 2) throw InvalidArgument("fit_loglog: at least 2 points required");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw InvalidArgument("fit_loglog: inputs must be positive");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  OrderFit out;
  static_cast<LineFit&>(out) = fit_line(lx, ly);
  return out;
}

std::vector<LocalErrorPoint> local_errors(const PotentialModel& p, const StartSpec& start,
                                          std::span<const double> h_grid, const LocalErrorOptions& opt) {
  if (start.dim() != p.d) throw InvalidArgument("local_errors: start dimension mismatch");
  if (opt.replicas < 2) throw InvalidArgument("local_errors: need at least 2 replicas");
  const std::size_t d = p.d;
  const NoiseStream noise(opt.seed);

  struct Acc {
    Vector diff_sum;
    Vector diff_sq;  // per coordinate, for the weak standard error
    double sq = 0.0;
    double sq2 = 0.0;
  };

  std::vector<LocalErrorPoint> out;
  for (double h : h_grid) {
    check_step_size(p, h);
    const std::size_t nblocks = block_count(opt.replicas);
    std::vector<Acc> blocks(nblocks, Acc{Vector(d, 0.0), Vector(d, 0.0)});
    parallel_for_blocks(nblocks, opt.workers, [&](std::size_t b) {
      const std::size_t lo = b * kReplicaBlock;
      const std::size_t hi = std::min(opt.replicas, lo + kReplicaBlock);
      Vector x(d);
      auto& acc = blocks[b];
      for (std::size_t j = lo; j < hi; ++j) {
        start.draw(noise, j, x);
        // Same Brownian path for every h: increments are rescaled normals.
        const auto path = BrownianPartition::draw(noise, j, 0, opt.substeps, d);
        const auto xi = path.coarse();
        const auto coarse = lmc_step(x, p, h, xi);
        const auto exact = reference_solution(p, x, h, path);
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double diff = coarse[i] - exact[i];
          acc.diff_sum[i] += diff;
          acc.diff_sq[i] += diff * diff;
          s += diff * diff;
        }
        acc.sq += s;
        acc.sq2 += s * s;
      }
    });
    tree_reduce(blocks, [](Acc& a, const Acc& b) {
      for (std::size_t i = 0; i < a.diff_sum.size(); ++i) {
        a.diff_sum[i] += b.diff_sum[i];
        a.diff_sq[i] += b.diff_sq[i];
      }
      a.sq += b.sq;
      a.sq2 += b.sq2;
    });

    const double M = static_cast<double>(opt.replicas);
    LocalErrorPoint pt;
    pt.h = h;
    const double ms = blocks[0].sq / M;
    const double var_sq = std::max(0.0, blocks[0].sq2 / M - ms * ms);
    pt.strong_rms = std::sqrt(ms);
    pt.strong_rms_se = ms > 0.0 ? std::sqrt(var_sq / M) / (2.0 * pt.strong_rms) : 0.0;
    pt.weak_mean.resize(d);
    double wn = 0.0, se2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double mean = blocks[0].diff_sum[i] / M;
      pt.weak_mean[i] = mean;
      wn += mean * mean;
      se2 += std::max(0.0, blocks[0].diff_sq[i] / M - mean * mean) / M;
    }
    pt.weak_norm = std::sqrt(wn);
    pt.weak_se = std::sqrt(se2);
    out.push_back(std::move(pt));
  }
  return out;
}

OrderFit local_strong_order(const PotentialModel& p, const StartSpec& start, std::span<const double> h_grid,
                            const LocalErrorOptions& opt) {
  if (h_grid.size() < 2) throw InvalidArgument("local_strong_order: need at least 2 step sizes");
  const auto pts = local_errors(p, start, h_grid, opt);
  std::vector<double> hs, es;
  for (const auto& pt : pts) {
    hs.push_back(pt.h);
    es.push_back(pt.strong_rms);
  }
  return fit_loglog(hs, es);
}

OrderFit local_weak_order(const PotentialModel& p, const StartSpec& start, std::span<const double> h_grid,
                          const LocalErrorOptions& opt) {
  if (h_grid.size() < 2) throw InvalidArgument("local_weak_order: need at least 2 step sizes");
  const auto pts = local_errors(p, start, h_grid, opt);
  std::vector<double> hs, es;
  for (const auto& pt : pts) {
    hs.push_back(pt.h);
    es.push_back(pt.weak_norm);
  }
  return fit_loglog(hs, es);
}

double exact_weak_error_unit_quadratic(double h, double x) {
  // e^{-h} - 1 + h without cancellation.
  return std::abs(std::expm1(-h) + h) * std::abs(x);
}

namespace {

ContractionEstimate fit_log_distance(std::span<const double> times, std::span<const double> dist) {
  ContractionEstimate est;
  if (dist.empty() || dist[0] == 0.0) {
    est.degenerate = true;
    return est;
  }
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] < kDistanceFloor) break;
    ts.push_back(times[i]);
    ls.push_back(std::log(dist[i]));
  }
  if (ts.size() < 2) {
    est.degenerate = true;
    return est;
  }
  est.fit = fit_line(ts, ls);
  est.rate = -est.fit.slope;
  return est;
}

}  // namespace

ContractionEstimate contraction_rate(const PotentialModel& p, const ChainConfig& cfg, std::span<const double> x0,
                                     std::span<const double> y0, std::size_t burn_in) {
  const auto run = run_coupled_pair(p, cfg, x0, y0);
  if (run.mean_sq_distance[0] == 0.0) {
    ContractionEstimate est;
    est.degenerate = true;
    return est;
  }
  std::vector<double> ts, ds;
  for (std::size_t k = burn_in; k < run.mean_sq_distance.size(); ++k) {
    ts.push_back(static_cast<double>(k) * cfg.h);
    ds.push_back(std::sqrt(run.mean_sq_distance[k]));
  }
  return fit_log_distance(ts, ds);
}

ContractionEstimate ou_contraction_rate(const QuadraticSpec& q, std::span<const double> x0,
                                        std::span<const double> y0, std::span<const double> times) {
  if (ou_coupled_distance(q, x0, y0, 0.0) == 0.0) {
    ContractionEstimate est;
    est.degenerate = true;
    return est;
  }
  std::vector<double> ds;
  for (double t : times) ds.push_back(ou_coupled_distance(q, x0, y0, t));
  return fit_log_distance(times, ds);
}

double mean_error_surrogate(std::span<const double> states, std::size_t d, std::span<const double> mu_mean) {
  if (d == 0 || states.size() % d != 0 || states.empty()) throw InvalidArgument("mean_error_surrogate: bad state shape");
  if (mu_mean.size() != d) throw InvalidArgument("mean_error_surrogate: dimension mismatch");
  const std::size_t M = states.size() / d;
  Vector mean(d, 0.0);
  for (std::size_t j = 0; j < M; ++j) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += states[j * d + i];
  }
  for (auto& v : mean) v /= static_cast<double>(M);
  return mean_error(mean, mu_mean);
}

double mean_error(std::span<const double> empirical_mean, std::span<const double> mu_mean) {
  if (empirical_mean.size() != mu_mean.size()) throw InvalidArgument("mean_error: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mu_mean.size(); ++i) {
    const double diff = empirical_mean[i] - mu_mean[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

std::vector<InequalityCheck> growth_bound_check(const QuadraticSpec& q, const DiagonalGaussian& start,
                                                std::span<const double> h_grid) {
  if (start.dim() != q.dim()) throw InvalidArgument("growth_bound_check: dimension mismatch");
  const double m = q.min_curvature();
  const double ex_sq = start.expected_sq_norm();
  std::vector<InequalityCheck> out;
  for (double h : h_grid) {
    // x_h - x = (e^{-lam h} - 1) x + I with I ~ N(0, (1 - e^{-2 lam h})/lam) independent of x.
    double lhs = 0.0;
    for (std::size_t i = 0; i < q.dim(); ++i) {
      const double lam = q.curvatures[i];
      const double a = std::expm1(-lam * h);
      lhs += a * a * (start.means[i] * start.means[i] + start.variances[i]) - std::expm1(-2.0 * lam * h) / lam;
    }
    const double rhs = 6.0 * (static_cast<double>(q.dim()) + 0.5 * m * ex_sq) * h;
    out.push_back({"growth", h, lhs, rhs, lhs <= rhs});
  }
  return out;
}

std::vector<InequalityCheck> evolved_deviation_check(
    const QuadraticSpec& q, const std::vector<std::pair<Vector, Vector>>& pairs, std::span<const double> h_grid) {
  const double m = q.min_curvature();
  std::vector<InequalityCheck> out;
  for (double h : h_grid) {
    for (const auto& [x, y] : pairs) {
      if (x.size() != q.dim() || y.size() != q.dim()) throw InvalidArgument("evolved_deviation_check: dimension mismatch");
      double z2 = 0.0, dev2 = 0.0;
      for (std::size_t i = 0; i < q.dim(); ++i) {
        const double diff = x[i] - y[i];
        const double z = std::expm1(-q.curvatures[i] * h) * diff;
        z2 += z * z;
        dev2 += diff * diff;
      }
      const double rhs = 0.25 * m * dev2 * h;
      out.push_back({"evolved-deviation", h, z2, rhs, z2 <= rhs});
    }
  }
  return out;
}

std::vector<InequalityCheck> boundedness_check(const PotentialModel& p, const ChainRun& run, double ex0_sq) {
  const double bound = ex0_sq + 8.0 * static_cast<double>(p.d) / (7.0 * p.m);
  std::vector<InequalityCheck> out;
  for (const auto& rec : run.records) {
    const double se = std::sqrt(rec.sq_norm_variance / static_cast<double>(run.replicas));
    InequalityCheck c{"boundedness step " + std::to_string(rec.step), 0.0, rec.mean_sq_norm, bound + 3.0 * se, false};
    c.pass = c.lhs <= c.rhs;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace lmsa
