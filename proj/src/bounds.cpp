#include "lmsa/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lmsa/errors.hpp"

namespace lmsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ceiling that absorbs rounding noise in an exactly-integral argument.
std::size_t ceil_count(double x) {
  if (!(x > 0.0)) return 0;
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-12 * std::max(1.0, x)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

}  // namespace

void ConstantsLedger::validate() const {
  const double vals[] = {beta, kappa_A, C0, C1, D1, C2, D2, p1, p2, h0, Usq};
  for (double v : vals) {
    if (!std::isfinite(v)) throw InvalidArgument("ledger: non-finite constant");
  }
  if (!(beta > 0.0)) throw InvalidArgument("ledger: beta must be positive");
  if (!(kappa_A >= 1.0)) throw InvalidArgument("ledger: kappa_A must be >= 1");
  if (C0 < 0 || C1 < 0 || D1 < 0 || C2 < 0 || D2 < 0 || Usq < 0) {
    throw InvalidArgument("ledger: constants must be nonnegative");
  }
  if (!(p2 > 0.5) || !(p1 >= p2 + 0.5)) throw InvalidArgument("ledger: need p2 > 1/2 and p1 >= p2 + 1/2");
  if (!(h0 > 0.0)) throw InvalidArgument("ledger: h0 must be positive");
}

double h1_threshold(const ConstantsLedger& c) {
  c.validate();
  const double expo = 1.0 / (c.p2 - 0.5);
  double h1 = std::min(c.h0, 1.0 / (4.0 * c.beta));
  const double strong = 4.0 * std::sqrt(2.0) * c.kappa_A * c.D2;
  const double t3 = strong > 0.0 ? std::pow(std::sqrt(c.beta) / strong, expo) : kInf;
  const double weak = 8.0 * std::sqrt(2.0) * c.kappa_A * c.kappa_A * (c.D1 + c.C0 * c.D2);
  const double t4 = weak > 0.0 ? std::pow(c.beta / weak, expo) : kInf;
  return std::min({h1, t3, t4});
}

double global_constant(const ConstantsLedger& c) {
  c.validate();
  const double U = std::sqrt(c.Usq);
  const double sb = std::sqrt(c.beta);
  const double inner = (c.C1 + c.C0 * c.C2 + std::sqrt(2.0) * U * (c.D1 + c.C0 * c.D2)) / sb + c.C2 +
                       std::sqrt(2.0) * c.D2 * U;
  return 2.0 / sb * c.kappa_A * c.kappa_A * inner;
}

double c_lmc(double m, double L, double G, std::size_t d, double ex0_sq) {
  if (!(m > 0.0) || !(L >= m)) throw InvalidArgument("c_lmc: need 0 < m <= L");
  if (!(G >= 0.0)) throw InvalidArgument("c_lmc: G must be nonnegative");
  if (d < 1) throw InvalidArgument("c_lmc: d must be >= 1");
  if (!(ex0_sq >= 0.0)) throw InvalidArgument("c_lmc: E|x0|^2 must be nonnegative");
  return 10.0 * (L * L + G) / std::pow(m, 1.5) * std::sqrt(2.0 * static_cast<double>(d) + m * (ex0_sq + 1.0));
}

double w2_upper(std::size_t k, double h, double w2_initial, const ConstantsLedger& c) {
  if (!(h > 0.0)) throw InvalidArgument("w2_upper: h must be positive");
  if (h > c.h1 * (1.0 + 1e-12)) {
    throw OutOfCertifiedRange("w2_upper: h=" + std::to_string(h) + " exceeds certified h1=" + std::to_string(c.h1));
  }
  return std::exp(-c.beta * static_cast<double>(k) * h) * w2_initial + c.C * std::pow(h, c.p2 - 0.5);
}

std::size_t mixing_upper(double eps, double w2_initial, const ConstantsLedger& c) {
  if (!(eps > 0.0)) throw InvalidArgument("mixing_upper: eps must be positive");
  if (!(w2_initial >= 0.0)) throw InvalidArgument("mixing_upper: W2_0 must be nonnegative");
  if (w2_initial <= eps / 2.0) return 0;
  const double expo = 1.0 / (c.p2 - 0.5);
  const double rate = std::max(1.0 / (c.beta * c.h1), std::pow(2.0 * c.C / eps, expo) / c.beta);
  return ceil_count(rate * std::log(2.0 * w2_initial / eps));
}

double mixing_upper_step(double eps, const ConstantsLedger& c) {
  if (!(eps > 0.0)) throw InvalidArgument("mixing_upper_step: eps must be positive");
  if (c.C <= 0.0) return c.h1;
  return std::min(c.h1, std::pow(eps / (2.0 * c.C), 1.0 / (c.p2 - 0.5)));
}

double mixing_lower(std::size_t d, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("mixing_lower: eps must be positive");
  const double root = std::sqrt(static_cast<double>(d));
  if (eps >= root) return 0.0;
  return root / (8.0 * eps) * std::log(root / eps);
}

ConstantsLedger lmc_ledger(const PotentialModel& p, double ex0_sq, double emu_sq) {
  if (!p.G) {
    throw InvalidArgument(p.name + ": growth constant G unknown; set it in the config or estimate it with estimate_G");
  }
  if (!(p.m > 0.0) || !(p.L >= p.m)) throw InvalidArgument("lmc_ledger: need 0 < m <= L");
  const double m = p.m;
  const double L = p.L;
  const double G = *p.G;
  const double S = std::sqrt(2.0 * static_cast<double>(p.d) / m + ex0_sq + 1.0);

  ConstantsLedger c;
  c.beta = m;
  c.kappa_A = 1.0;
  c.h0 = 1.0 / (4.0 * p.kappa() * L);
  c.C0 = std::sqrt(m) / 2.0;
  c.C1 = 2.0 * (L * L + G) * S;
  c.D1 = 0.0;
  c.C2 = 2.0 * L * std::sqrt(m) * S;
  c.D2 = 0.0;
  c.p1 = 2.0;
  c.p2 = 1.5;
  c.Usq = 4.0 * ex0_sq + 6.0 * emu_sq;
  c.h1 = h1_threshold(c);
  c.C = global_constant(c);
  c.C_lmc = c_lmc(m, L, G, p.d, ex0_sq);
  return c;
}

ConstantsLedger with_relaxed_constant(ConstantsLedger ledger) {
  if (!ledger.C_lmc) throw InvalidArgument("ledger has no relaxed LMC constant");
  ledger.C = *ledger.C_lmc;
  return ledger;
}

}  // namespace lmsa
