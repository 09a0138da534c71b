#include "pulseprop/pulses.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace pulseprop::pulses {

namespace {

std::mutex profile_mutex;

std::map<std::string, Profile>& profile_registry() {
  static std::map<std::string, Profile> registry{
      {"gaussian", [](double x) { return std::exp(-x * x); }},
  };
  return registry;
}

void check_boundary_tail(const spectral::Field& envelope) {
  double peak = 0.0;
  for (const auto& z : envelope.values()) peak = std::max(peak, std::abs(z));
  const double tail =
      std::max(std::abs(envelope[0]), std::abs(envelope[envelope.size() - 1]));
  if (peak > 0.0 && tail > 1e-12 * peak)
    throw std::invalid_argument(
        "pulse support reaches the domain boundary (tail above 1e-12 of peak)");
}

}  // namespace

void register_profile(const std::string& name, Profile fn) {
  std::scoped_lock lock(profile_mutex);
  profile_registry()[name] = std::move(fn);
}

Profile get_profile(const std::string& name) {
  std::scoped_lock lock(profile_mutex);
  auto it = profile_registry().find(name);
  if (it == profile_registry().end())
    throw std::invalid_argument("unknown pulse profile: " + name);
  return it->second;
}

void PulseSpec::validate() const {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("PulseSpec: beta must lie in (0, 1]");
  get_profile(profile);
}

std::complex<double> polarization_factor() {
  return {1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2};
}

spectral::Field build_short(const PulseSpec& spec, spectral::GridPtr grid) {
  spec.validate();
  const Profile G = get_profile(spec.profile);
  spectral::Field out(std::move(grid), spectral::Space::Physical);
  for (std::size_t m = 0; m < out.size(); ++m)
    out[m] = G((out.grid().node(m) - spec.x0) / spec.beta);
  check_boundary_tail(out);
  return out;
}

spectral::Field build_chirped(const PulseSpec& spec, spectral::GridPtr grid) {
  spec.validate();
  const Profile G = get_profile(spec.profile);
  spectral::Field out(std::move(grid), spectral::Space::Physical);
  for (std::size_t m = 0; m < out.size(); ++m) {
    const double y = out.grid().node(m) - spec.x0;
    out[m] = G(y) * std::cos(std::cos(y / spec.beta) / spec.beta);
  }
  check_boundary_tail(out);
  return out;
}

spectral::Field build_envelope(const PulseSpec& spec, spectral::GridPtr grid) {
  return spec.kind == PulseKind::Short ? build_short(spec, std::move(grid))
                                       : build_chirped(spec, std::move(grid));
}

ExactInitialState assemble_exact_ic(const spectral::Field& envelope, double eps,
                                    double kbar) {
  if (!(eps > 0.0)) throw std::invalid_argument("assemble_exact_ic: eps must be positive");
  const spectral::Field phys = to_space(envelope, spectral::Space::Physical);
  ExactInitialState out{
      spectral::Field(phys.grid_ptr(), spectral::Space::Physical),
      spectral::Field(phys.grid_ptr(), spectral::Space::Physical),
  };
  const std::complex<double> pol = polarization_factor();
  for (std::size_t m = 0; m < phys.size(); ++m) {
    const std::complex<double> carrier =
        std::polar(1.0, kbar * phys.grid().node(m) / eps);
    const std::complex<double> a = phys[m] * carrier;
    out.f[m] = 2.0 * a.real();
    out.g[m] = 2.0 * (pol * a).real();
  }
  return out;
}

double practical_rule(const spectral::Field& envelope, double eps) {
  return eps * spectral::wiener_norm(spectral::derivative(envelope));
}

bool practical_rule_flag(const spectral::Field& envelope, double eps, double threshold) {
  return practical_rule(envelope, eps) >= threshold;
}

}  // namespace pulseprop::pulses
