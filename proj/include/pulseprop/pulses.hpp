#pragma once

#include <complex>
#include <functional>
#include <string>

#include "pulseprop/spectral.hpp"

// Initial-condition families: dilated profiles ("short") and internally
// chirped profiles, the polarized Klein-Gordon initial state built from
// them, and the envelope-gradient diagnostic that decides whether the
// envelope description is trustworthy at a given eps.

namespace pulseprop::pulses {

enum class PulseKind { Short, Chirped };

using Profile = std::function<double(double)>;

// Named pointwise profiles; "gaussian" (exp(-x^2)) is registered by default.
void register_profile(const std::string& name, Profile fn);
Profile get_profile(const std::string& name);

struct PulseSpec {
  PulseKind kind = PulseKind::Short;
  double beta = 1.0;  // width parameter in (0, 1]
  double x0 = 15.0;   // center
  std::string profile = "gaussian";

  void validate() const;  // throws std::invalid_argument
};

// Polarization factor (1 - i)/sqrt(2) tying the second Klein-Gordon
// component to the first on the carrier eigenspace.
std::complex<double> polarization_factor();

// Envelope samples G((x - x0)/beta) on the grid; throws when the tail at the
// domain boundary exceeds 1e-12 of the peak.
spectral::Field build_short(const PulseSpec& spec, spectral::GridPtr grid);

// Envelope samples G(x - x0) cos((1/beta) cos((x - x0)/beta)).
spectral::Field build_chirped(const PulseSpec& spec, spectral::GridPtr grid);

spectral::Field build_envelope(const PulseSpec& spec, spectral::GridPtr grid);

// Real Klein-Gordon initial state (f, g) with
//   f = f0(x) e^{i x kbar/eps} + c.c.,  g = polarization_factor * same + c.c.
struct ExactInitialState {
  spectral::Field f;
  spectral::Field g;
};
ExactInitialState assemble_exact_ic(const spectral::Field& envelope, double eps,
                                    double kbar = 1.0);

// eps * |d/dx envelope|_W; the envelope description is suspect when this is
// not small. scales like eps/beta for dilated profiles.
double practical_rule(const spectral::Field& envelope, double eps);

inline constexpr double kPracticalRuleThreshold = 0.3;
bool practical_rule_flag(const spectral::Field& envelope, double eps,
                         double threshold = kPracticalRuleThreshold);

}  // namespace pulseprop::pulses
