#pragma once

// Reference values computed independently of the library: direct
// recursions, brute-force scans and hand-derived closed forms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace oracle {

/// Mean and variance of a 1D LMC chain on f = lam x^2 / 2 by direct recursion.
struct Moments {
  double mean;
  double var;
};

inline Moments lmc_recursion(double lam, double h, std::size_t k, double mean0, double var0) {
  Moments m{mean0, var0};
  const double r = 1.0 - lam * h;
  for (std::size_t i = 0; i < k; ++i) {
    m.mean *= r;
    m.var = r * r * m.var + 2.0 * h;
  }
  return m;
}

/// Smallest k with W2 <= eps for the two-block target (d coordinates at
/// m, d at L) from x0 = 1, by linear scan. Returns cap + 1 if not reached.
inline std::size_t scan_mixing(double m, double L, std::size_t d, double h, double eps, std::size_t cap) {
  Moments a{1.0, 0.0}, b{1.0, 0.0};
  auto w2sq = [](const Moments& x, double lam) {
    const double ds = std::sqrt(x.var) - 1.0 / std::sqrt(lam);
    return x.mean * x.mean + ds * ds;
  };
  for (std::size_t k = 0; k <= cap; ++k) {
    if (std::sqrt(static_cast<double>(d) * (w2sq(a, m) + w2sq(b, L))) <= eps) return k;
    a = lmc_recursion(m, h, 1, a.mean, a.var);
    b = lmc_recursion(L, h, 1, b.mean, b.var);
  }
  return cap + 1;
}

/// E|x1 - x_h|^2 for one coordinate of f = lam x^2/2 with E x^2 = ex2, LMC
/// and the exact solution driven by the same Brownian motion.
inline double strong_error_sq(double lam, double h, double ex2) {
  const double a = std::exp(-lam * h) - 1.0 + lam * h;
  return a * a * ex2 + (1.0 - std::exp(-2.0 * lam * h)) / lam + 2.0 * h - 4.0 * (1.0 - std::exp(-lam * h)) / lam;
}

/// Empirical W2 between two 1D samples of equal size (sorted coupling).
inline double empirical_w2(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

inline std::vector<double> normal_sample(double mean, double sd, std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(mean, sd);
  std::vector<double> out(n);
  for (auto& v : out) v = nd(rng);
  return out;
}

/// Value and central-difference gradient of a scalar function.
template <typename F>
std::vector<double> fd_gradient(F f, std::vector<double> x, double step = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + step;
    const double fp = f(x);
    x[i] = xi - step;
    const double fm = f(x);
    x[i] = xi;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

/// Laplacian of f1 = |x|^2/2 + logsumexp(x): d + 1 - sum softmax_i^2.
inline double f1_laplacian(const std::vector<double>& x) {
  const double mx = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (double v : x) z += std::exp(v - mx);
  double s2 = 0.0;
  for (double v : x) {
    const double s = std::exp(v - mx) / z;
    s2 += s * s;
  }
  return static_cast<double>(x.size()) + 1.0 - s2;
}

/// Laplacian of f2: d + (1/2) sum cos(d^{1/4} x_i).
inline double f2_laplacian(const std::vector<double>& x) {
  const double q = std::pow(static_cast<double>(x.size()), 0.25);
  double s = static_cast<double>(x.size());
  for (double v : x) s += 0.5 * std::cos(q * v);
  return s;
}

/// Mean-square constant of the LMC ledger, simplified by hand:
/// 2 S (2 (L^2 + G)/m + 3 L) with S = sqrt(2d/m + E|x0|^2 + 1).
inline double lmc_global_constant(double m, double L, double G, double d, double ex0) {
  const double S = std::sqrt(2.0 * d / m + ex0 + 1.0);
  return 2.0 * S * (2.0 * (L * L + G) / m + 3.0 * L);
}

}  // namespace oracle
