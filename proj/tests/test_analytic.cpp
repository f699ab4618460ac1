#include <cmath>
#include <random>

#include "doctest.h"
#include "lmsa/analytic.hpp"
#include "lmsa/errors.hpp"
#include "oracles.hpp"

using namespace lmsa;

TEST_CASE("closed-form iterate law matches the recursion") {
  const QuadraticSpec q{{1.0, 4.0, 0.3}};
  const Vector x0{1.0, -2.0, 0.5};
  for (double h : {0.01, 0.1, 0.3, 0.45}) {
    for (std::size_t k : {0u, 1u, 7u, 100u, 1000u}) {
      const auto law = lmc_iterate_law(q, h, k, x0);
      for (std::size_t i = 0; i < 3; ++i) {
        const auto o = oracle::lmc_recursion(q.curvatures[i], h, k, x0[i], 0.0);
        CHECK(law.means[i] == doctest::Approx(o.mean).epsilon(1e-10).scale(1e-300));
        CHECK(law.variances[i] == doctest::Approx(o.var).epsilon(1e-10));
      }
    }
  }
  CHECK_THROWS_AS(lmc_iterate_law(q, 0.5, 3, x0), StabilityError);
}

TEST_CASE("Gaussian start propagates its variance") {
  const QuadraticSpec q{{2.0}};
  DiagonalGaussian start{{1.5}, {0.7}};
  const auto law = lmc_iterate_law(q, 0.1, 9, start);
  const auto o = oracle::lmc_recursion(2.0, 0.1, 9, 1.5, 0.7);
  CHECK(law.means[0] == doctest::Approx(o.mean));
  CHECK(law.variances[0] == doctest::Approx(o.var));
}

TEST_CASE("stationary variance bias shrinks monotonically with h") {
  const QuadraticSpec q{{1.0}};
  double prev = INFINITY;
  for (double h : {0.5, 0.25, 0.1, 0.01, 0.001}) {
    const double v = lmc_iterate_law(q, h, 1'000'000, Vector{0.0}).variances[0];
    CHECK(v > 1.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("W2 between product Gaussians") {
  const DiagonalGaussian a{{0.0}, {1.0}};
  const DiagonalGaussian b{{1.0}, {4.0}};
  CHECK(w2_diag(a, a) == 0.0);
  CHECK(w2_diag(a, b) == doctest::Approx(std::sqrt(2.0)));
  // Sorted-sample estimate.
  const double emp = oracle::empirical_w2(oracle::normal_sample(0, 1, 400000, 1), oracle::normal_sample(1, 2, 400000, 2));
  CHECK(emp == doctest::Approx(std::sqrt(2.0)).epsilon(0.01));
  CHECK_THROWS_AS(w2_diag(a, DiagonalGaussian{{0, 0}, {1, 1}}), InvalidArgument);
}

TEST_CASE("W2 is symmetric and satisfies the triangle inequality") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mu(-2, 2), var(0.01, 3);
  for (int t = 0; t < 200; ++t) {
    DiagonalGaussian g[3];
    for (auto& x : g) {
      for (int i = 0; i < 4; ++i) {
        x.means.push_back(mu(rng));
        x.variances.push_back(var(rng));
      }
    }
    CHECK(w2_diag(g[0], g[1]) == w2_diag(g[1], g[0]));
    CHECK(w2_diag(g[0], g[2]) <= w2_diag(g[0], g[1]) + w2_diag(g[1], g[2]) + 1e-12);
  }
}

TEST_CASE("W2 of the two-block target matches the displayed expression") {
  const std::size_t d = 5;
  const double m = 1.0, L = 4.0, h = 0.05;
  const QuadraticSpec q{[&] {
    Vector c(d, m);
    c.insert(c.end(), d, L);
    return c;
  }()};
  const auto target = stationary_law(q);
  for (std::size_t k : {0u, 3u, 40u}) {
    const double w = w2_diag(lmc_iterate_law(q, h, k, Vector(2 * d, 1.0)), target);
    auto block = [&](double lam) {
      const double r2k = std::pow(1 - lam * h, 2.0 * k);
      const double s = std::sqrt(2.0 / (2.0 - lam * h)) * std::sqrt(1 - r2k) - 1.0;
      return d * r2k + d / lam * s * s;
    };
    CHECK(w * w == doctest::Approx(block(m) + block(L)).epsilon(1e-12));
  }
}

TEST_CASE("OU law") {
  const QuadraticSpec q{{2.0}};
  const auto law = ou_law(q, 0.3, DiagonalGaussian::point({1.0}));
  CHECK(law.means[0] == doctest::Approx(std::exp(-0.6)));
  CHECK(law.variances[0] == doctest::Approx((1 - std::exp(-1.2)) / 2.0));
  // The target is invariant.
  const auto stat = ou_law(q, 5.0, stationary_law(q));
  CHECK(stat.variances[0] == doctest::Approx(0.5));
}

TEST_CASE("mixing time agrees with a linear scan") {
  for (std::size_t d : {1u, 4u, 16u}) {
    Vector c(d, 1.0);
    c.insert(c.end(), d, 4.0);
    const QuadraticSpec q{c};
    for (double eps : {0.1, 0.2, 0.5}) {
      for (double h : {0.005, 0.02, 0.1, 0.3, 0.45}) {
        const auto r = mixing_time_at(q, DiagonalGaussian::point(Vector(2 * d, 1.0)), eps, h, 20000);
        const auto k = oracle::scan_mixing(1.0, 4.0, d, h, eps, 20000);
        if (k > 20000) {
          CHECK_FALSE(r.reached);
        } else {
          CHECK(r.reached);
          CHECK(r.k == k);
        }
      }
    }
  }
}

TEST_CASE("exact mixing time edge cases") {
  const QuadraticSpec q{{1.0}};
  const std::vector<double> grid{0.01, 0.1};
  // Already mixed.
  CHECK(exact_mixing_time(q, stationary_law(q), 0.1, grid).k == 0);
  CHECK(exact_mixing_time(q, Vector{1.0}, 2.0, grid).k == 0);
  // Ties go to the larger h.
  CHECK(exact_mixing_time(q, Vector{1.0}, 2.0, grid).h == 0.1);
  CHECK_THROWS_AS(exact_mixing_time(q, Vector{1.0}, 1e-6, grid, 10), NotReached);
  CHECK_THROWS_AS(exact_mixing_time(q, Vector{1.0}, 0.1, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("coupled OU distance decays at each curvature") {
  const QuadraticSpec q{{1.0, 4.0}};
  const Vector x{1.0, 1.0}, y{-1.0, -1.0};
  const double t = 0.7;
  CHECK(ou_coupled_distance(q, x, y, t) ==
        doctest::Approx(std::sqrt(4 * std::exp(-2 * t) + 4 * std::exp(-8 * t))));
}
