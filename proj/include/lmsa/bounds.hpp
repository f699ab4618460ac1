#pragma once

#include <cstddef>
#include <optional>

#include "lmsa/potentials.hpp"

namespace lmsa {

/// Constants of the mean-square global error bound.
///
/// Local errors of the integrator are assumed to satisfy
///   |E(x_h - x1)|           <= (C1 + D1 sqrt(E|x|^2)) h^p1
///   (E|x_h - x1|^2)^{1/2}   <= (C2^2 + D2^2 E|x|^2)^{1/2} h^p2
/// for h <= h0, with the continuous dynamics contractive at rate beta in a
/// norm with condition number kappa_A, and C0 the evolved-deviation constant.
struct ConstantsLedger {
  double beta = 1.0;
  double kappa_A = 1.0;
  double C0 = 0.0;
  double C1 = 0.0;
  double D1 = 0.0;
  double C2 = 0.0;
  double D2 = 0.0;
  double p1 = 2.0;
  double p2 = 1.5;
  double h0 = 1.0;
  double h1 = 0.0;   // filled by h1_threshold
  double Usq = 0.0;  // 4 E|x0|^2 + 6 E_mu |x|^2
  double C = 0.0;    // filled by global_constant
  std::optional<double> C_lmc;  // closed-form relaxation, LMC ledgers only

  /// Throws InvalidArgument unless p2 > 1/2, p1 >= p2 + 1/2 and the
  /// constants are finite and nonnegative.
  void validate() const;
};

/// min{h0, 1/(4 beta), (sqrt(beta)/(4 sqrt2 kappa_A D2))^{1/(p2-1/2)},
///     (beta/(8 sqrt2 kappa_A^2 (D1 + C0 D2)))^{1/(p2-1/2)}};
/// the D terms count as +inf when their denominator is 0.
double h1_threshold(const ConstantsLedger& ledger);

/// Global error constant C for the ledger (uses U = sqrt(Usq)).
double global_constant(const ConstantsLedger& ledger);

/// 10 (L^2 + G) / m^{3/2} * sqrt(2d + m (E|x0|^2 + 1)).
double c_lmc(double m, double L, double G, std::size_t d, double ex0_sq);

/// e^{-beta k h} W2_0 + C h^{p2 - 1/2}. Throws OutOfCertifiedRange for h > h1.
double w2_upper(std::size_t k, double h, double w2_initial, const ConstantsLedger& ledger);

/// Upper bound on the W2 mixing time (integer, rounded up); 0 when
/// W2_0 <= eps/2.
std::size_t mixing_upper(double eps, double w2_initial, const ConstantsLedger& ledger);

/// Step size at which mixing_upper's iteration count is attained:
/// min{h1, (eps / (2C))^{1/(p2-1/2)}}.
double mixing_upper_step(double eps, const ConstantsLedger& ledger);

/// sqrt(d)/(8 eps) log(sqrt(d)/eps) for the two-block Gaussian with block
/// size d; 0 when eps >= sqrt(d).
double mixing_lower(std::size_t d, double eps);

/// LMC constants: beta = m, kappa_A = 1, h0 = 1/(4 kappa L), C0 = sqrt(m)/2,
/// C1 = 2(L^2+G) S, C2 = 2 L sqrt(m) S with S = sqrt(2d/m + E|x0|^2 + 1),
/// D1 = D2 = 0, p1 = 2, p2 = 3/2. Throws InvalidArgument when p.G is unset.
ConstantsLedger lmc_ledger(const PotentialModel& p, double ex0_sq, double emu_sq);

/// Copy of the ledger with C replaced by the relaxed C_lmc.
ConstantsLedger with_relaxed_constant(ConstantsLedger ledger);

}  // namespace lmsa
