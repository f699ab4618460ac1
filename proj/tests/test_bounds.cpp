#include <cmath>

#include "doctest.h"
#include "lmsa/analytic.hpp"
#include "lmsa/bounds.hpp"
#include "lmsa/errors.hpp"
#include "oracles.hpp"

using namespace lmsa;

TEST_CASE("LMC ledger on an isotropic quadratic") {
  const auto p = make_quadratic({1.0, 1.0});
  const auto c = lmc_ledger(p, 0.0, 2.0);
  CHECK(c.beta == 1.0);
  CHECK(c.kappa_A == 1.0);
  CHECK(c.h0 == 0.25);
  CHECK(c.C0 == 0.5);
  CHECK(c.D1 == 0.0);
  CHECK(c.D2 == 0.0);
  CHECK(c.p1 == 2.0);
  CHECK(c.p2 == 1.5);
  CHECK(c.Usq == 12.0);
  CHECK(c.h1 == 0.25);
}

TEST_CASE("h1 for f1") {
  auto p = make_f1(10);
  p.G = 1.0;
  CHECK(lmc_ledger(p, 0.0, 1.0).h1 == doctest::Approx(1.0 / 16));
  p.G.reset();
  CHECK_THROWS_AS(lmc_ledger(p, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("mean-square constant matches the hand-simplified form and is below C_LMC") {
  for (double m : {0.5, 1.0, 2.0}) {
    for (double L : {2.0, 4.0, 10.0}) {
      for (double G : {0.0, 1.5}) {
        const std::size_t d = 7;
        const double ex0 = 3.0;
        auto p = make_quadratic({m, L});
        p.G = G;
        p.d = d;  // ledger constants depend on d only through S
        const auto c = lmc_ledger(p, ex0, 1.0);
        CHECK(c.C == doctest::Approx(oracle::lmc_global_constant(m, L, G, d, ex0)).epsilon(1e-12));
        CHECK(c.C <= *c.C_lmc);
        CHECK(*c.C_lmc == doctest::Approx(10 * (L * L + G) / std::pow(m, 1.5) * std::sqrt(2.0 * d + m * (ex0 + 1))));
      }
    }
  }
}

TEST_CASE("c_lmc is monotone in each argument") {
  const double base = c_lmc(1.0, 4.0, 1.0, 10, 2.0);
  CHECK(c_lmc(1.0, 5.0, 1.0, 10, 2.0) > base);
  CHECK(c_lmc(1.0, 4.0, 2.0, 10, 2.0) > base);
  CHECK(c_lmc(1.0, 4.0, 1.0, 11, 2.0) > base);
  CHECK(c_lmc(1.0, 4.0, 1.0, 10, 3.0) > base);
  CHECK(c_lmc(1.2, 4.0, 1.0, 10, 2.0) < base);
  CHECK_THROWS_AS(c_lmc(0.0, 4.0, 1.0, 10, 2.0), InvalidArgument);
}

TEST_CASE("h1 uses the D terms when present") {
  ConstantsLedger c;
  c.beta = 1.0;
  c.kappa_A = 1.0;
  c.h0 = 1.0;
  c.C0 = 0.0;
  c.D1 = 0.0;
  c.D2 = 1.0;
  c.p1 = 2.0;
  c.p2 = 1.5;
  // (sqrt(1)/(4 sqrt2))^1 < 1/4.
  CHECK(h1_threshold(c) == doctest::Approx(1.0 / (4.0 * std::sqrt(2.0))));
  c.D2 = 0.0;
  CHECK(h1_threshold(c) == 0.25);
  c.p2 = 0.5;
  CHECK_THROWS_AS(h1_threshold(c), InvalidArgument);
}

TEST_CASE("mixing upper bound arithmetic") {
  ConstantsLedger c;
  c.beta = 1.0;
  c.h1 = 0.25;
  c.C = 1.0;
  c.p2 = 1.5;
  CHECK(mixing_upper(1.0, std::exp(1.0) / 2.0, c) == 4);
  CHECK(mixing_upper(1.0, 0.5, c) == 0);
  CHECK(mixing_upper_step(1.0, c) == 0.25);
  CHECK(mixing_upper_step(0.1, c) == doctest::Approx(0.05));
}

TEST_CASE("LMC high-accuracy branch") {
  auto p = make_two_block_quadratic(1.0, 4.0, 16);
  const auto c = with_relaxed_constant(lmc_ledger(p, 32.0, 20.0));
  const double w0 = 5.0, eps = 0.01;
  const auto k = mixing_upper(eps, w0, c);
  CHECK(k == static_cast<std::size_t>(std::ceil(2.0 * *c.C_lmc / eps * std::log(2 * w0 / eps))));
  // The count is attained at the bound's step size.
  CHECK(w2_upper(k, mixing_upper_step(eps, c), w0, c) <= eps);
}

TEST_CASE("mixing lower bound values") {
  CHECK(mixing_lower(16, 0.2) == doctest::Approx(2.5 * std::log(20.0)));
  CHECK(mixing_lower(16, 0.2) == doctest::Approx(7.489).epsilon(1e-4));
  CHECK(mixing_lower(100, 0.1) == doctest::Approx(57.565).epsilon(1e-4));
  CHECK(mixing_lower(4, 2.0) == 0.0);
  CHECK(mixing_lower(4, 3.0) == 0.0);
}

TEST_CASE("W2 bound is sound on the two-block target") {
  for (std::size_t d : {1u, 4u, 16u}) {
    const auto p = make_two_block_quadratic(1.0, 4.0, d);
    const Vector x0(2 * d, 1.0);
    const auto target = stationary_law(*p.quadratic);
    const double w0 = w2_diag(DiagonalGaussian::point(x0), target);
    const auto c = with_relaxed_constant(lmc_ledger(p, 2.0 * d, target.expected_sq_norm()));
    const double h = c.h1;
    for (std::size_t k = 0; k <= 2000; k += 7) {
      CHECK(w2_diag(lmc_iterate_law(*p.quadratic, h, k, x0), target) <= w2_upper(k, h, w0, c));
    }
    CHECK_THROWS_AS(w2_upper(1, 2 * h, w0, c), OutOfCertifiedRange);
  }
}
