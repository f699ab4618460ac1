#include "lmsa/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmsa/errors.hpp"
#include "lmsa/parallel.hpp"

namespace lmsa {

StartSpec StartSpec::point(Vector x) {
  StartSpec s;
  s.kind = Kind::Point;
  s.mean = std::move(x);
  return s;
}

StartSpec StartSpec::gaussian(Vector mean, Vector variance) {
  if (mean.size() != variance.size()) throw InvalidArgument("start: mean/variance length mismatch");
  for (double v : variance) {
    if (!(v >= 0.0)) throw InvalidArgument("start: variances must be nonnegative");
  }
  StartSpec s;
  s.kind = Kind::Gaussian;
  s.mean = std::move(mean);
  s.variance = std::move(variance);
  return s;
}

StartSpec StartSpec::stationary(const QuadraticSpec& q) {
  Vector var(q.dim());
  for (std::size_t i = 0; i < q.dim(); ++i) var[i] = 1.0 / q.curvatures[i];
  return gaussian(Vector(q.dim(), 0.0), std::move(var));
}

double StartSpec::expected_sq_norm() const {
  double s = 0.0;
  for (double v : mean) s += v * v;
  for (double v : variance) s += v;
  return s;
}

void StartSpec::draw(const NoiseStream& noise, std::uint64_t replica, std::span<double> out,
                     std::uint32_t lane) const {
  if (kind == Kind::Point) {
    std::copy(mean.begin(), mean.end(), out.begin());
    return;
  }
  noise.fill(replica, 0, out, lane);
  for (std::size_t i = 0; i < mean.size(); ++i) out[i] = mean[i] + std::sqrt(variance[i]) * out[i];
}

void check_step_size(const PotentialModel& p, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("step size must be positive and finite");
  if (p.quadratic && h >= 2.0 / p.L) {
    throw StabilityError("step size " + std::to_string(h) + " violates stability h < 2/L = " +
                         std::to_string(2.0 / p.L) + " for " + p.name);
  }
}

namespace {

// x <- x - h grad f(x) + scale * xi; false if any coordinate is non-finite.
bool lmc_update(std::span<double> x, std::span<double> grad, const PotentialModel& p, double h,
                double scale, std::span<const double> xi) {
  p.gradient(x, grad);
  bool finite = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = x[i] - h * grad[i] + scale * xi[i];
    finite = finite && std::isfinite(x[i]);
  }
  return finite;
}

struct BlockMoments {
  std::vector<Vector> sum;
  std::vector<Vector> sum_sq;
  Vector sum_norm2;
  Vector sum_norm4;

  BlockMoments(std::size_t records, std::size_t d)
      : sum(records, Vector(d, 0.0)), sum_sq(records, Vector(d, 0.0)), sum_norm2(records, 0.0),
        sum_norm4(records, 0.0) {}

  void add(std::size_t r, std::span<const double> x) {
    double n2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum[r][i] += x[i];
      sum_sq[r][i] += x[i] * x[i];
      n2 += x[i] * x[i];
    }
    sum_norm2[r] += n2;
    sum_norm4[r] += n2 * n2;
  }

  void merge(const BlockMoments& o) {
    for (std::size_t r = 0; r < sum.size(); ++r) {
      for (std::size_t i = 0; i < sum[r].size(); ++i) {
        sum[r][i] += o.sum[r][i];
        sum_sq[r][i] += o.sum_sq[r][i];
      }
      sum_norm2[r] += o.sum_norm2[r];
      sum_norm4[r] += o.sum_norm4[r];
    }
  }
};

void check_dims(const PotentialModel& p, std::size_t n, const char* what) {
  if (n != p.d) {
    throw InvalidArgument(std::string(what) + ": dimension " + std::to_string(n) +
                          " does not match potential dimension " + std::to_string(p.d));
  }
}

}  // namespace

Vector lmc_step(std::span<const double> x, const PotentialModel& p, double h, std::span<const double> xi,
                std::size_t step) {
  check_dims(p, x.size(), "lmc_step");
  check_dims(p, xi.size(), "lmc_step noise");
  Vector out(x.begin(), x.end());
  Vector grad(x.size());
  if (!lmc_update(out, grad, p, h, std::sqrt(2.0 * h), xi)) throw NumericalDivergence(0, step);
  return out;
}

Vector StepMoments::variance() const {
  Vector v(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) v[i] = std::max(0.0, second_moment[i] - mean[i] * mean[i]);
  return v;
}

const StepMoments& ChainRun::at_step(std::size_t step) const {
  for (const auto& r : records) {
    if (r.step == step) return r;
  }
  throw InvalidArgument("step " + std::to_string(step) + " was not recorded");
}

ChainRun run_chains(const PotentialModel& p, const ChainConfig& cfg, std::vector<std::size_t> record,
                    bool keep_states) {
  check_step_size(p, cfg.h);
  check_dims(p, cfg.x0.dim(), "run_chains start");
  if (cfg.replicas == 0) throw InvalidArgument("run_chains: replicas must be positive");
  std::sort(record.begin(), record.end());
  record.erase(std::unique(record.begin(), record.end()), record.end());
  if (!record.empty() && record.back() > cfg.steps) {
    throw InvalidArgument("run_chains: recorded step beyond the horizon");
  }

  const std::size_t d = p.d;
  const std::size_t nrec = record.size();
  // slot[k] = index into record, or nrec when step k is not recorded.
  std::vector<std::size_t> slot(cfg.steps + 1, nrec);
  for (std::size_t r = 0; r < nrec; ++r) slot[record[r]] = r;

  const NoiseStream noise(cfg.seed);
  const double scale = std::sqrt(2.0 * cfg.h);
  const std::size_t nblocks = block_count(cfg.replicas);
  std::vector<BlockMoments> blocks(nblocks, BlockMoments(nrec, d));
  std::vector<Vector> states;
  if (keep_states) states.assign(nrec, Vector(cfg.replicas * d));

  parallel_for_blocks(nblocks, cfg.workers, [&](std::size_t b) {
    const std::size_t lo = b * kReplicaBlock;
    const std::size_t hi = std::min(cfg.replicas, lo + kReplicaBlock);
    const std::size_t n = hi - lo;
    Vector x(n * d), grad(d), xi(d);
    auto& acc = blocks[b];

    auto observe = [&](std::size_t k) {
      const std::size_t r = slot[k];
      if (r == nrec) return;
      for (std::size_t j = 0; j < n; ++j) {
        std::span<const double> xj(x.data() + j * d, d);
        acc.add(r, xj);
        if (keep_states) std::copy(xj.begin(), xj.end(), states[r].begin() + static_cast<std::ptrdiff_t>((lo + j) * d));
      }
    };

    for (std::size_t j = 0; j < n; ++j) cfg.x0.draw(noise, lo + j, std::span<double>(x.data() + j * d, d));
    observe(0);
    for (std::size_t k = 1; k <= cfg.steps; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        noise.fill(lo + j, k, xi);
        if (!lmc_update(std::span<double>(x.data() + j * d, d), grad, p, cfg.h, scale, xi)) {
          throw NumericalDivergence(lo + j, k);
        }
      }
      observe(k);
    }
  });

  tree_reduce(blocks, [](BlockMoments& a, const BlockMoments& b) { a.merge(b); });

  ChainRun run;
  run.replicas = cfg.replicas;
  run.dim = d;
  const double inv = 1.0 / static_cast<double>(cfg.replicas);
  for (std::size_t r = 0; r < nrec; ++r) {
    StepMoments sm;
    sm.step = record[r];
    sm.mean = blocks[0].sum[r];
    sm.second_moment = blocks[0].sum_sq[r];
    for (auto& v : sm.mean) v *= inv;
    for (auto& v : sm.second_moment) v *= inv;
    sm.mean_sq_norm = blocks[0].sum_norm2[r] * inv;
    sm.sq_norm_variance = std::max(0.0, blocks[0].sum_norm4[r] * inv - sm.mean_sq_norm * sm.mean_sq_norm);
    if (keep_states) sm.states = std::move(states[r]);
    run.records.push_back(std::move(sm));
  }
  return run;
}

CoupledRun run_coupled_pair(const PotentialModel& p, const ChainConfig& cfg, std::span<const double> x0,
                            std::span<const double> y0) {
  check_step_size(p, cfg.h);
  check_dims(p, x0.size(), "run_coupled_pair x0");
  check_dims(p, y0.size(), "run_coupled_pair y0");
  if (cfg.replicas == 0) throw InvalidArgument("run_coupled_pair: replicas must be positive");

  const std::size_t d = p.d;
  const std::size_t K = cfg.steps;
  struct Acc {
    Vector dist2, dist4;
    std::vector<Vector> coord;
  };
  const std::size_t nblocks = block_count(cfg.replicas);
  std::vector<Acc> blocks(nblocks, Acc{Vector(K + 1, 0.0), Vector(K + 1, 0.0), std::vector<Vector>(K + 1, Vector(d, 0.0))});
  const NoiseStream noise(cfg.seed);
  const double scale = std::sqrt(2.0 * cfg.h);

  parallel_for_blocks(nblocks, cfg.workers, [&](std::size_t b) {
    const std::size_t lo = b * kReplicaBlock;
    const std::size_t hi = std::min(cfg.replicas, lo + kReplicaBlock);
    Vector x(d), y(d), grad(d), xi(d);
    auto& acc = blocks[b];
    auto observe = [&](std::size_t k) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double diff = x[i] - y[i];
        acc.coord[k][i] += diff * diff;
        s += diff * diff;
      }
      acc.dist2[k] += s;
      acc.dist4[k] += s * s;
    };
    for (std::size_t j = lo; j < hi; ++j) {
      std::copy(x0.begin(), x0.end(), x.begin());
      std::copy(y0.begin(), y0.end(), y.begin());
      observe(0);
      for (std::size_t k = 1; k <= K; ++k) {
        noise.fill(j, k, xi);
        if (!lmc_update(x, grad, p, cfg.h, scale, xi) || !lmc_update(y, grad, p, cfg.h, scale, xi)) {
          throw NumericalDivergence(j, k);
        }
        observe(k);
      }
    }
  });

  tree_reduce(blocks, [](Acc& a, const Acc& b) {
    for (std::size_t k = 0; k < a.dist2.size(); ++k) {
      a.dist2[k] += b.dist2[k];
      a.dist4[k] += b.dist4[k];
      for (std::size_t i = 0; i < a.coord[k].size(); ++i) a.coord[k][i] += b.coord[k][i];
    }
  });

  CoupledRun out;
  out.replicas = cfg.replicas;
  const double inv = 1.0 / static_cast<double>(cfg.replicas);
  out.mean_sq_distance.resize(K + 1);
  out.sq_distance_variance.resize(K + 1);
  out.coord_mean_sq = std::move(blocks[0].coord);
  for (std::size_t k = 0; k <= K; ++k) {
    const double m1 = blocks[0].dist2[k] * inv;
    out.mean_sq_distance[k] = m1;
    out.sq_distance_variance[k] = std::max(0.0, blocks[0].dist4[k] * inv - m1 * m1);
    for (auto& v : out.coord_mean_sq[k]) v *= inv;
  }
  return out;
}

BrownianPartition BrownianPartition::draw(const NoiseStream& noise, std::uint64_t replica, std::uint64_t step,
                                          std::size_t substeps, std::size_t d) {
  if (substeps == 0) throw InvalidArgument("partition: substeps must be >= 1");
  BrownianPartition bp;
  bp.substeps = substeps;
  bp.d = d;
  bp.fine.resize(substeps * d);
  bp.aux.resize(d);
  for (std::size_t j = 0; j < substeps; ++j) {
    noise.fill(replica, step, std::span<double>(bp.fine.data() + j * d, d), static_cast<std::uint32_t>(1 + j));
  }
  noise.fill(replica, step, bp.aux, NoiseStream::kAuxLane);
  return bp;
}

Vector BrownianPartition::coarse() const {
  Vector xi(d, 0.0);
  for (std::size_t j = 0; j < substeps; ++j) {
    for (std::size_t i = 0; i < d; ++i) xi[i] += fine[j * d + i];
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(substeps));
  for (auto& v : xi) v *= norm;
  return xi;
}

Vector reference_solution(const PotentialModel& p, std::span<const double> x, double h,
                          const BrownianPartition& noise) {
  check_dims(p, x.size(), "reference_solution");
  check_dims(p, noise.d, "reference_solution noise");
  if (!(h > 0.0)) throw InvalidArgument("reference_solution: h must be positive");
  const std::size_t S = noise.substeps;
  const std::size_t d = p.d;
  const double delta = h / static_cast<double>(S);

  if (p.quadratic) {
    // x_h = e^{-lam h} x + I, I = sqrt2 int_0^h e^{-lam (h-s)} dW_s. Given the
    // fine increments, I = sum_j w_j fine_j + sqrt(V - sum w_j^2) aux with
    // w_j = E[I fine_j] and V = Var I = (1 - e^{-2 lam h}) / lam.
    Vector out(d);
    const double sqrt_delta = std::sqrt(delta);
    for (std::size_t i = 0; i < d; ++i) {
      const double lam = p.quadratic->curvatures[i];
      const double var = -std::expm1(-2.0 * lam * h) / lam;
      const double piece = -std::expm1(-lam * delta) / lam;  // int over one substep of e^{-lam (s_j - s)}
      double projected = 0.0;
      double explained = 0.0;
      for (std::size_t j = 0; j < S; ++j) {
        const double tail = h - static_cast<double>(j + 1) * delta;
        const double w = std::sqrt(2.0) * std::exp(-lam * std::max(tail, 0.0)) * piece / sqrt_delta;
        projected += w * noise.fine[j * d + i];
        explained += w * w;
      }
      const double residual = std::sqrt(std::max(0.0, var - explained));
      out[i] = std::exp(-lam * h) * x[i] + projected + residual * noise.aux[i];
      if (!std::isfinite(out[i])) throw NumericalDivergence(0, 0);
    }
    return out;
  }

  Vector y(x.begin(), x.end());
  Vector grad(d);
  const double scale = std::sqrt(2.0 * delta);
  for (std::size_t j = 0; j < S; ++j) {
    if (!lmc_update(y, grad, p, delta, scale, std::span<const double>(noise.fine.data() + j * d, d))) {
      throw NumericalDivergence(0, j + 1);
    }
  }
  return y;
}

}  // namespace lmsa
