#include <cmath>

#include "doctest.h"
#include "lmsa/analytic.hpp"
#include "lmsa/errors.hpp"
#include "lmsa/estimators.hpp"
#include "oracles.hpp"

using namespace lmsa;

TEST_CASE("log-log fit recovers exact power laws") {
  const std::vector<double> x{0.1, 0.2, 0.4, 0.8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.5));
  const auto f = fit_loglog(x, y);
  CHECK(f.slope == doctest::Approx(1.5));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.points.size() == 4);
}

TEST_CASE("fit input validation") {
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(fit_loglog(one, one), InvalidArgument);
  const std::vector<double> x{1.0, 2.0}, bad{1.0, 0.0};
  CHECK_THROWS_AS(fit_loglog(x, bad), InvalidArgument);
  const std::vector<double> same{2.0, 2.0};
  CHECK_THROWS_AS(fit_line(same, x), InvalidArgument);
  CHECK(fit_line(x, same).r2 == 1.0);
}

TEST_CASE("analytic weak error has order 2") {
  const std::vector<double> hs{1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
  std::vector<double> e;
  for (double h : hs) e.push_back(exact_weak_error_unit_quadratic(h, 1.0));
  const auto f = fit_loglog(hs, e);
  CHECK(f.slope > 1.95);
  CHECK(f.slope < 2.05);
  CHECK(exact_weak_error_unit_quadratic(1e-8, 1.0) == doctest::Approx(0.5e-16).epsilon(1e-6));
}

TEST_CASE("local strong error matches the exact expression") {
  const auto p = make_quadratic({1.0});
  const std::vector<double> hs{0.0625, 0.25};
  LocalErrorOptions opt;
  opt.replicas = 50000;
  opt.seed = 3;
  const auto pts = local_errors(p, StartSpec::stationary(*p.quadratic), hs, opt);
  for (const auto& pt : pts) {
    const double exact = std::sqrt(oracle::strong_error_sq(1.0, pt.h, 1.0));
    CHECK(std::abs(pt.strong_rms - exact) < 4.0 * pt.strong_rms_se);
  }
}

TEST_CASE("local weak error matches the exact expression with a point start") {
  const auto p = make_quadratic({1.0});
  const std::vector<double> hs{0.125, 0.25};
  LocalErrorOptions opt;
  opt.replicas = 50000;
  opt.seed = 4;
  const auto pts = local_errors(p, StartSpec::point({1.0}), hs, opt);
  for (const auto& pt : pts) {
    // E(LMC - exact) = ((1 - h) - e^{-h}) x.
    const double expected = -(std::exp(-pt.h) - 1.0 + pt.h);
    CHECK(std::abs(pt.weak_mean[0] - expected) < 4.0 * pt.weak_se);
  }
}

TEST_CASE("local error statistics are reproducible across workers") {
  const auto p = make_f2(3);
  const std::vector<double> hs{0.01, 0.02};
  LocalErrorOptions opt;
  opt.replicas = 3000;
  opt.workers = 1;
  const auto a = local_errors(p, StartSpec::point({1, 1, 1}), hs, opt);
  opt.workers = 3;
  const auto b = local_errors(p, StartSpec::point({1, 1, 1}), hs, opt);
  for (std::size_t i = 0; i < hs.size(); ++i) {
    CHECK(a[i].strong_rms == b[i].strong_rms);
    CHECK(a[i].weak_mean == b[i].weak_mean);
  }
}

TEST_CASE("order fits reject single-point grids") {
  const auto p = make_quadratic({1.0});
  const std::vector<double> hs{0.1};
  CHECK_THROWS_AS(local_strong_order(p, StartSpec::point({1.0}), hs, {}), InvalidArgument);
  CHECK_THROWS_AS(local_weak_order(p, StartSpec::point({1.0}), hs, {}), InvalidArgument);
}

TEST_CASE("contraction rates") {
  const auto p = make_quadratic({1.0, 4.0});
  ChainConfig cfg;
  cfg.h = 0.1;
  cfg.steps = 100;
  cfg.replicas = 64;
  const Vector x{1.0, 1.0}, y{-1.0, -1.0};
  const auto lmc = contraction_rate(p, cfg, x, y, 20);
  CHECK_FALSE(lmc.degenerate);
  CHECK(lmc.rate == doctest::Approx(-std::log(0.9) / 0.1).epsilon(1e-6));

  std::vector<double> ts;
  for (int i = 20; i <= 100; ++i) ts.push_back(0.1 * i);
  const auto ou = ou_contraction_rate(*p.quadratic, x, y, ts);
  CHECK(ou.rate == doctest::Approx(1.0).epsilon(1e-4));

  CHECK(contraction_rate(p, cfg, x, x).degenerate);
  CHECK(ou_contraction_rate(*p.quadratic, x, x, ts).degenerate);
}

TEST_CASE("contraction fit ignores distances below the floor") {
  const auto p = make_quadratic({1.0});
  ChainConfig cfg;
  cfg.h = 0.5;
  cfg.steps = 200;  // 0.5^200 underflows the floor long before the end
  cfg.replicas = 2;
  const auto est = contraction_rate(p, cfg, Vector{1.0}, Vector{-1.0});
  CHECK(est.rate == doctest::Approx(std::log(2.0) / 0.5).epsilon(1e-6));
  for (const auto& [t, logd] : est.fit.points) CHECK(logd >= std::log(kDistanceFloor));
}

TEST_CASE("mean-error surrogate") {
  const std::vector<double> states{1.0, 2.0, 3.0, 4.0};  // two replicas in d = 2
  const std::vector<double> mu{2.0, 3.0};
  CHECK(mean_error_surrogate(states, 2, mu) == 0.0);
  const std::vector<double> mu2{0.0, 0.0};
  CHECK(mean_error_surrogate(states, 2, mu2) == doctest::Approx(std::sqrt(13.0)));
  CHECK_THROWS_AS(mean_error_surrogate(states, 3, mu), InvalidArgument);
}

TEST_CASE("proven inequalities hold on admissible grids") {
  for (const Vector& c : {Vector{1.0}, Vector{1.0, 4.0}, Vector{0.5, 0.5, 3.0}}) {
    const QuadraticSpec q{c};
    const double kappa = q.max_curvature() / q.min_curvature();
    const double hmax = 1.0 / (4.0 * kappa * q.max_curvature());
    std::vector<double> hs;
    for (int i = 0; i < 8; ++i) hs.push_back(hmax * std::pow(0.5, i));

    for (const auto& start : {stationary_law(q), DiagonalGaussian::point(Vector(c.size(), 3.0)),
                              DiagonalGaussian::point(Vector(c.size(), 0.0))}) {
      for (const auto& r : growth_bound_check(q, start, hs)) CHECK(r.pass);
    }
    std::vector<std::pair<Vector, Vector>> pairs{{Vector(c.size(), 1.0), Vector(c.size(), -1.0)},
                                                 {Vector(c.size(), 5.0), Vector(c.size(), 0.0)}};
    for (const auto& r : evolved_deviation_check(q, pairs, hs)) {
      CHECK(r.pass);
      CHECK(r.margin() >= 0.0);
    }
  }
}

TEST_CASE("boundedness of LMC second moments") {
  for (const auto& p : {make_f1(5), make_f2(5), make_quadratic({1.0, 4.0})}) {
    ChainConfig cfg;
    cfg.h = 1.0 / (4.0 * p.kappa() * p.L);
    cfg.steps = 400;
    cfg.replicas = 4000;
    cfg.seed = 9;
    cfg.x0 = StartSpec::point(Vector(p.d, 2.0));
    const auto run = run_chains(p, cfg, {0, 1, 10, 100, 400});
    for (const auto& r : boundedness_check(p, run, cfg.x0.expected_sq_norm())) CHECK(r.pass);
  }
}
