#pragma once

#include <array>
#include <vector>

// Dispersion relations and carrier-frequency expansions for the two example
// systems (1D Klein-Gordon and 3D Maxwell-Lorentz), plus the rational
// ([3,2] Pade) fit of the Klein-Gordon branch and the symbol-error functions
// used to compare the scalar envelope models.

namespace pulseprop::dispersion {

struct KGParams {
  double v = 1.0;     // coupling constant, nonzero
  double kbar = 1.0;  // carrier wavenumber, nonzero

  KGParams() = default;
  KGParams(double v_, double kbar_);  // throws std::invalid_argument on zeros
};

// Upper Klein-Gordon branch omega1(k) = sqrt(k^2 + v^2); the lower branch is
// its negative.
double kg_omega1(double k, double v);

// The seven Maxwell-Lorentz branches evaluated at |k| = k_mag >= 0, sorted
// descending: omega5 = -omega3, omega6 = -omega2, omega7 = -omega1.
std::array<double, 7> maxwell_omegas(double k_mag);

// Numerically computed spectrum of the hermitian matrix A(k) + E/i, sorted
// descending. Ground truth for the closed-form branch values above.
std::vector<double> eigen_oracle_kg(double k, double v);
std::vector<double> eigen_oracle_maxwell(const std::array<double, 3>& k);

// Expansion data of omega1 at the carrier wavenumber.
struct CarrierPoint {
  double kbar = 0;
  double omega = 0;  // omega1(kbar)
  double cg = 0;     // omega1'(kbar), group velocity
  double hess = 0;   // omega1''(kbar)
  double third = 0;  // omega1'''(kbar)

  static CarrierPoint at(const KGParams& p);
  double v() const;  // recovered from omega^2 - kbar^2
};

// Coefficients of the [3,2] rational fit of omega1(kbar + s) - omega1(kbar),
//   (cg s + (hess/2 + cg b) s^2 + C s^3) / (1 + b s + B s^2),
// which matches the Taylor series of the branch through fifth order.
struct PadeCoefficients {
  double b = 0;
  double B = 0;
  double C = 0;
  double hyp_margin = 0;  // 4 - b^2/B, must be positive
};

// Throws std::invalid_argument if the positivity constraints fail.
PadeCoefficients pade_coefficients(double kbar, double v);

// Carrier admissibility: no third-harmonic resonance and a spectral gap to
// the other branch.
struct AssumptionReport {
  double omega_bar = 0;
  double c0 = 0;                           // inf_k |omega_bar - omega2(k)|
  bool third_harmonic_free = false;        // (3 omega_bar, 3 kbar) not characteristic
  int offending_branch = -1;               // 1 or 2 when a resonance is found
  std::array<double, 2> omega_at_3kbar{};  // +-omega1(3 kbar)

  bool ok() const { return third_harmonic_free && c0 > 0; }
};
AssumptionReport assumption_checks(double kbar, double v);

enum class SymbolKind { Exact, Taylor2, Pade32 };

// Real symbols m(xi) such that the linear part of each scalar model reads
// d_t f + i m(D) f = 0. The exact branch symbol is evaluated in the
// rationalized form (2 kbar xi + eps xi^2) / (omega1(kbar + eps xi) + omega),
// which stays accurate where the raw difference quotient loses digits.
double symbol_exact(double xi, double eps, const CarrierPoint& c);
double symbol_taylor2(double xi, double eps, const CarrierPoint& c);
double symbol_pade32(double xi, double eps, const CarrierPoint& c,
                     const PadeCoefficients& p);

struct SymbolModel {
  SymbolKind kind = SymbolKind::Exact;
  CarrierPoint carrier;
  PadeCoefficients pade;  // used when kind == Pade32

  double operator()(double xi, double eps) const;
};

// Quotient-form symbol defects of the Taylor and rational models against the
// exact branch, scaled by eps^3 (1 + |xi|^3). Both stay bounded in eps.
double c_schrod(double xi, double eps, const CarrierPoint& c);
double c_improved(double xi, double eps, const CarrierPoint& c,
                  const PadeCoefficients& p);

}  // namespace pulseprop::dispersion
