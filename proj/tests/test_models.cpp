#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pulseprop/dispersion.hpp"
#include "pulseprop/models.hpp"
#include "pulseprop/pulses.hpp"
#include "pulseprop/spectral.hpp"

using namespace pulseprop;
using namespace pulseprop::models;
using doctest::Approx;
using cplx = std::complex<double>;

namespace {

const double kLength = 30.0 * std::numbers::pi;

spectral::Field constant_field(spectral::GridPtr grid, cplx value) {
  spectral::Field f(std::move(grid), spectral::Space::Physical);
  for (auto& z : f.values()) z = value;
  return f;
}

pulses::ExactInitialState constant_state(spectral::GridPtr grid, double f0, double g0) {
  return {constant_field(grid, f0), constant_field(std::move(grid), g0)};
}

SolverConfig base_config(spectral::GridPtr grid, double eps, double dt) {
  SolverConfig cfg;
  cfg.eps = eps;
  cfg.dt = dt;
  cfg.grid = std::move(grid);
  return cfg;
}

// Straightforward full-spectrum reference step for the exact system: the
// same Strang composition evaluated with generic complex transforms and the
// per-mode matrix exponential, used to cross-check the half-spectrum solver.
void reference_kg_step(spectral::Field& f, spectral::Field& g, double eps, double dt) {
  const auto& grid = f.grid();
  const std::size_t n = grid.size();
  auto linear = [&](double tau) {
    auto F = to_space(f, spectral::Space::Spectral);
    auto G = to_space(g, spectral::Space::Spectral);
    for (std::size_t m = 0; m < n; ++m) {
      const double xi = grid.wavenumber(m);
      const double mu = std::hypot(xi, 1.0 / eps);
      const double co = std::cos(mu * tau), si = std::sin(mu * tau) / mu;
      const cplx fm = F[m], gm = G[m];
      F[m] = co * fm - si * cplx(-1.0 / eps, xi) * gm;
      G[m] = -si * cplx(1.0 / eps, xi) * fm + co * gm;
    }
    if (n % 2 == 0) {  // match the solver's Nyquist handling
      F[n / 2] = 0.0;
      G[n / 2] = 0.0;
    }
    f = inverse(F);
    g = inverse(G);
  };
  auto nonlinear = [&]() {
    for (std::size_t i = 0; i < n; ++i) {
      const double fi = f[i].real(), gi = g[i].real();
      const double theta = eps * dt * (fi * fi + gi * gi);
      f[i] = std::cos(theta) * fi - std::sin(theta) * gi;
      g[i] = std::sin(theta) * fi + std::cos(theta) * gi;
    }
  };
  linear(dt / 2);
  nonlinear();
  linear(dt / 2);
}

}  // namespace

TEST_CASE("model names") {
  CHECK(model_name(ModelKind::FullDispersion) == "fd");
  CHECK(parse_model("improved") == ModelKind::ImprovedNLS);
  CHECK_THROWS_AS(parse_model("unknown"), std::invalid_argument);
}

TEST_CASE("exact solver nonlinear substep is the rigid rotation") {
  auto grid = spectral::make_grid(kLength, 16);
  auto cfg = base_config(grid, 0.1, 1.0);
  ExactKGSolver solver(cfg, constant_state(grid, 1.0, 0.0));
  solver.nonlinear();
  const auto f = solver.snapshot_f(), g = solver.snapshot_g();
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f[i].real() == Approx(std::cos(0.1)).epsilon(1e-15));
    CHECK(g[i].real() == Approx(std::sin(0.1)).epsilon(1e-15));
  }
}

TEST_CASE("exact solver linear substep rotates the mean mode at rate 1/eps") {
  auto grid = spectral::make_grid(kLength, 16);
  const double eps = 0.1, dt = 0.05;
  auto cfg = base_config(grid, eps, dt);
  const double a = 0.8, b = -0.3;
  ExactKGSolver solver(cfg, constant_state(grid, a, b));
  solver.linear_full();
  const double th = dt / eps;
  const auto f = solver.snapshot_f(), g = solver.snapshot_g();
  CHECK(f[5].real() == Approx(a * std::cos(th) + b * std::sin(th)).epsilon(1e-13));
  CHECK(g[5].real() == Approx(-a * std::sin(th) + b * std::cos(th)).epsilon(1e-13));
}

TEST_CASE("exact solver agrees with the full-spectrum reference") {
  auto grid = spectral::make_grid(kLength, 512);
  const double eps = 0.2, dt = 2e-3;
  pulses::PulseSpec spec;
  const auto env = pulses::build_short(spec, grid);
  const auto ic = pulses::assemble_exact_ic(env, eps);

  auto cfg = base_config(grid, eps, dt);
  ExactKGSolver solver(cfg, ic);
  spectral::Field f = ic.f, g = ic.g;
  for (int s = 0; s < 5; ++s) {
    solver.step();
    reference_kg_step(f, g, eps, dt);
  }
  const auto fs = solver.snapshot_f(), gs = solver.snapshot_g();
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(std::abs(fs[i] - f[i]) < 1e-12);
    CHECK(std::abs(gs[i] - g[i]) < 1e-12);
    CHECK(fs[i].imag() == 0.0);  // real-field representation
    CHECK(std::abs(f[i].imag()) < 1e-10);  // reference keeps realness numerically
  }
}

TEST_CASE("exact solver conserves the quadratic invariant per step") {
  auto grid = spectral::make_grid(kLength, 2048);
  const double eps = 0.05;
  pulses::PulseSpec spec;
  const auto ic = pulses::assemble_exact_ic(pulses::build_short(spec, grid), eps);
  auto cfg = base_config(grid, eps, 1e-3);
  ExactKGSolver solver(cfg, ic);
  const double q0 = solver.quadratic_invariant();
  double prev = q0, worst = 0.0;
  for (int s = 0; s < 500; ++s) {
    solver.step();
    const double q = solver.quadratic_invariant();
    worst = std::max(worst, std::abs(q - prev) / q0);
    prev = q;
  }
  CHECK(worst <= 1e-12);
  CHECK(std::abs(prev - q0) / q0 <= 1e-11);
}

TEST_CASE("envelope solver holds the polarized carrier mode") {
  auto grid = spectral::make_grid(kLength, 64);
  auto cfg = base_config(grid, 0.05, 0.02);
  const auto env = constant_field(grid, 0.7);
  EnvelopeSolver solver(cfg, env);
  solver.linear_full();
  solver.linear_half();
  const auto u1 = solver.snapshot_u1(), u2 = solver.snapshot_u2();
  const cplx pol = pulses::polarization_factor();
  for (std::size_t i = 0; i < u1.size(); ++i) {
    CHECK(std::abs(u1[i] - 0.7) < 1e-13);
    CHECK(std::abs(u2[i] - 0.7 * pol) < 1e-13);
  }
}

TEST_CASE("envelope cubic term matches the trilinear sum") {
  auto grid = spectral::make_grid(kLength, 2);
  const double eps = 0.3, dt = 0.05, v = 1.0;
  auto cfg = base_config(grid, eps, dt);

  const cplx a(0.4, -0.7);
  spectral::Field env(grid, spectral::Space::Physical);
  for (auto& z : env.values()) z = a;
  EnvelopeSolver solver(cfg, env);

  const cplx pol = pulses::polarization_factor();
  const cplx u1 = a, u2 = pol * a;

  // independent evaluation: T(x,y,z) = (x . y) E z, summed over the three
  // conjugation patterns, then one explicit midpoint step
  auto T = [v](cplx x1, cplx x2, cplx y1, cplx y2, cplx z1, cplx z2) {
    const cplx dot = x1 * y1 + x2 * y2;
    return std::pair<cplx, cplx>(dot * (-v * z2), dot * (v * z1));
  };
  auto script_t = [&](cplx w1, cplx w2) {
    const auto t1 = T(std::conj(w1), std::conj(w2), w1, w2, w1, w2);
    const auto t2 = T(w1, w2, std::conj(w1), std::conj(w2), w1, w2);
    const auto t3 = T(w1, w2, w1, w2, std::conj(w1), std::conj(w2));
    return std::pair<cplx, cplx>(eps * (t1.first + t2.first + t3.first),
                                 eps * (t1.second + t2.second + t3.second));
  };
  auto [r1, r2] = script_t(u1, u2);
  const cplx m1 = u1 + 0.5 * dt * r1, m2 = u2 + 0.5 * dt * r2;
  auto [s1, s2] = script_t(m1, m2);
  const cplx expect1 = u1 + dt * s1, expect2 = u2 + dt * s2;

  solver.nonlinear();
  const auto got1 = solver.snapshot_u1(), got2 = solver.snapshot_u2();
  CHECK(std::abs(got1[0] - expect1) < 1e-14);
  CHECK(std::abs(got2[0] - expect2) < 1e-14);
}

TEST_CASE("envelope linear flow conserves the quadratic invariant") {
  auto grid = spectral::make_grid(kLength, 1024);
  auto cfg = base_config(grid, 0.05, 1e-2);
  cfg.nonlinearity_on = false;
  pulses::PulseSpec spec;
  EnvelopeSolver solver(cfg, pulses::build_short(spec, grid));
  const double q0 = solver.quadratic_invariant();
  for (int s = 0; s < 200; ++s) solver.step();
  CHECK(solver.quadratic_invariant() == Approx(q0).epsilon(1e-12));
}

TEST_CASE("scalar nonlinear substep preserves magnitude for fd and nls") {
  auto grid = spectral::make_grid(kLength, 256);
  pulses::PulseSpec spec;
  const auto env = pulses::build_short(spec, grid);
  for (auto kind : {ModelKind::FullDispersion, ModelKind::NLS}) {
    auto cfg = base_config(grid, 0.05, 0.5);
    ScalarSolver solver(kind, cfg, env);
    solver.nonlinear();
    const auto f = solver.snapshot_f();
    for (std::size_t i = 0; i < f.size(); ++i)
      CHECK(std::abs(f[i]) == Approx(std::abs(env[i])).epsilon(1e-14));
  }
}

TEST_CASE("fd linear substep fixes the mean mode") {
  auto grid = spectral::make_grid(kLength, 64);
  auto cfg = base_config(grid, 0.05, 0.1);
  const auto env = constant_field(grid, cplx(0.3, 0.4));
  ScalarSolver solver(ModelKind::FullDispersion, cfg, env);
  solver.linear_full();
  const auto f = solver.snapshot_f();
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(f[i] - cplx(0.3, 0.4)) < 1e-14);
}

TEST_CASE("scalar models reproduce the analytic linear flow") {
  auto grid = spectral::make_grid(kLength, 256);
  const double eps = 0.02, T = 2.0;
  const auto carrier = dispersion::CarrierPoint::at(dispersion::KGParams{});
  const auto pade = dispersion::pade_coefficients(1.0, 1.0);

  spectral::Field f0(grid, spectral::Space::Spectral);
  std::mt19937 rng(17);
  std::normal_distribution<double> gauss;
  for (std::size_t m = 0; m < grid->size(); ++m)
    if (std::abs(grid->wavenumber(m)) < 8.0) f0[m] = {gauss(rng), gauss(rng)};

  for (auto kind : {ModelKind::FullDispersion, ModelKind::NLS, ModelKind::ImprovedNLS}) {
    auto cfg = base_config(grid, eps, 1e-2);
    cfg.t_final = T;
    cfg.snapshots = 2;
    cfg.nonlinearity_on = false;
    const auto traj = run_scalar(kind, inverse(f0), cfg);
    REQUIRE(traj.snapshots.size() == 3);
    const auto& got = traj.snapshots.back();
    double worst = 0.0;
    for (std::size_t m = 0; m < grid->size(); ++m) {
      const double xi = grid->wavenumber(m);
      double mv = 0.0;
      if (kind == ModelKind::FullDispersion) mv = dispersion::symbol_exact(xi, eps, carrier);
      if (kind == ModelKind::NLS) mv = dispersion::symbol_taylor2(xi, eps, carrier);
      if (kind == ModelKind::ImprovedNLS)
        mv = dispersion::symbol_pade32(xi, eps, carrier, pade);
      worst = std::max(worst, std::abs(got[m] - f0[m] * std::polar(1.0, -mv * T)));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("single polarized mode runs at the analytic phase through the whole stack") {
  auto grid = spectral::make_grid(kLength, 128);
  const double eps = 0.05, T = 5.0;
  spectral::Field f0(grid, spectral::Space::Spectral);
  f0[3] = cplx(0.5, 0.2);
  const double xi = grid->wavenumber(3);

  auto cfg = base_config(grid, eps, 1e-2);
  cfg.t_final = T;
  cfg.snapshots = 1;
  cfg.nonlinearity_on = false;
  const auto traj = run_scalar(ModelKind::FullDispersion, inverse(f0), cfg);
  const auto carrier = dispersion::CarrierPoint::at(dispersion::KGParams{});
  const cplx expect = f0[3] * std::polar(1.0, -dispersion::symbol_exact(xi, eps, carrier) * T);
  CHECK(std::abs(traj.snapshots.back()[3] - expect) < 1e-10);
}

TEST_CASE("improved nls conserves nothing exotic but stays bounded and second order") {
  // self-convergence ratio for the smoothed midpoint nonlinear substep
  auto grid = spectral::make_grid(kLength, 512);
  pulses::PulseSpec spec;
  const auto env = pulses::build_short(spec, grid);
  auto run_with = [&](double dt) {
    auto cfg = base_config(grid, 0.05, dt);
    cfg.t_final = 2.0;
    cfg.snapshots = 1;
    return inverse(run_scalar(ModelKind::ImprovedNLS, env, cfg).snapshots.back());
  };
  const auto a = run_with(4e-3), b = run_with(2e-3), c = run_with(1e-3);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    e1 = std::max(e1, std::abs(a[i] - b[i]));
    e2 = std::max(e2, std::abs(b[i] - c[i]));
  }
  CHECK(e1 / e2 == Approx(4.0).epsilon(0.15));
}

TEST_CASE("reconstruction") {
  auto grid = spectral::make_grid(kLength, 4096);
  const double eps = 0.05;
  const auto carrier = dispersion::CarrierPoint::at(dispersion::KGParams{});

  SUBCASE("unit envelope gives the plain carrier cosine") {
    const auto f = reconstruct_f(constant_field(grid, 1.0), 0.0, eps, carrier);
    for (std::size_t i = 100; i < 140; ++i)
      CHECK(f[i].real() == Approx(2.0 * std::cos(grid->node(i) / eps)).epsilon(1e-13));
  }

  SUBCASE("zero envelope gives zero fields") {
    const auto fg = reconstruct_fg(constant_field(grid, 0.0), 3.0, eps, carrier);
    CHECK(spectral::norms(fg.f).linf == 0.0);
    CHECK(spectral::norms(fg.g).linf == 0.0);
  }

  SUBCASE("matches the initial-state assembly at t = 0") {
    pulses::PulseSpec spec;
    const auto env = pulses::build_short(spec, grid);
    const auto ic = pulses::assemble_exact_ic(env, eps);
    const auto fg = reconstruct_fg(env, 0.0, eps, carrier);
    for (std::size_t i = 0; i < env.size(); ++i) {
      CHECK(std::abs(fg.f[i] - ic.f[i]) < 1e-13);
      CHECK(std::abs(fg.g[i] - ic.g[i]) < 1e-13);
    }
  }
}

TEST_CASE("trajectory driver") {
  auto grid = spectral::make_grid(kLength, 256);

  SUBCASE("zero data stays zero") {
    auto cfg = base_config(grid, 0.05, 1e-2);
    cfg.t_final = 1.0;
    cfg.snapshots = 4;
    spectral::Field zero(grid, spectral::Space::Physical);
    for (auto kind : {ModelKind::ExactKG, ModelKind::Envelope, ModelKind::NLS}) {
      const auto traj = run_model(kind, zero, cfg);
      for (const auto& s : traj.snapshots) CHECK(spectral::norms(s).l2 == 0.0);
    }
  }

  SUBCASE("snapshot times and step snapping") {
    auto cfg = base_config(grid, 0.05, 3e-3);  // does not divide 0.25
    cfg.t_final = 1.0;
    cfg.snapshots = 4;
    pulses::PulseSpec spec;
    const auto traj = run_scalar(ModelKind::NLS, pulses::build_short(spec, grid), cfg);
    REQUIRE(traj.times.size() == 5);
    for (std::size_t k = 0; k < traj.times.size(); ++k)
      CHECK(traj.times[k] == Approx(0.25 * static_cast<double>(k)).epsilon(1e-15));
    CHECK(traj.dt_effective <= 3e-3 + 1e-12);
    const double steps = 0.25 / traj.dt_effective;
    CHECK(steps == Approx(std::round(steps)).epsilon(1e-12));
  }

  SUBCASE("sink receives every snapshot") {
    auto cfg = base_config(grid, 0.05, 1e-2);
    cfg.t_final = 1.0;
    cfg.snapshots = 3;
    pulses::PulseSpec spec;
    std::size_t count = 0;
    run_scalar(
        ModelKind::NLS, pulses::build_short(spec, grid), cfg,
        [&](std::size_t k, double t, const spectral::Field&) {
          CHECK(k == count);
          CHECK(t == Approx(static_cast<double>(k) / 3.0).epsilon(1e-12));
          ++count;
        },
        false);
    CHECK(count == 4);
  }

  SUBCASE("non-finite data is reported with its time") {
    spectral::Field bad(grid, spectral::Space::Physical);
    bad[10] = std::numeric_limits<double>::quiet_NaN();
    auto cfg = base_config(grid, 0.05, 1e-2);
    cfg.t_final = 1.0;
    CHECK_THROWS_AS(run_scalar(ModelKind::NLS, bad, cfg), NumericalFailure);
  }

  SUBCASE("projector-variant flag is rejected") {
    auto cfg = base_config(grid, 0.05, 1e-2);
    cfg.fd_projected_nonlinearity = true;
    pulses::PulseSpec spec;
    CHECK_THROWS_AS(run_scalar(ModelKind::FullDispersion, pulses::build_short(spec, grid), cfg),
                    std::invalid_argument);
  }
}

TEST_CASE("translation covariance") {
  auto grid = spectral::make_grid(kLength, 1024);
  const double eps = 0.05;
  const std::size_t shift_nodes = 64;
  const double shift = grid->dx() * static_cast<double>(shift_nodes);

  pulses::PulseSpec a, b;
  a.x0 = 12.0;
  b.x0 = 12.0 + shift;

  auto cfg = base_config(grid, eps, 1e-3);
  cfg.t_final = 2.0;
  cfg.snapshots = 1;

  for (auto kind : {ModelKind::NLS, ModelKind::FullDispersion}) {
    const auto ta = run_scalar(kind, pulses::build_short(a, grid), cfg);
    const auto tb = run_scalar(kind, pulses::build_short(b, grid), cfg);
    const auto fa = inverse(ta.snapshots.back());
    const auto fb = inverse(tb.snapshots.back());
    double worst = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i)
      worst = std::max(worst,
                       std::abs(fb[(i + shift_nodes) % fa.size()] - fa[i]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("grid refinement leaves resolved envelope runs unchanged") {
  const double eps = 0.05;
  pulses::PulseSpec spec;
  auto run_at = [&](std::size_t n) {
    auto grid = spectral::make_grid(kLength, n);
    auto cfg = base_config(grid, eps, 1e-3);
    cfg.t_final = 2.0;
    cfg.snapshots = 1;
    return run_scalar(ModelKind::NLS, pulses::build_short(spec, grid), cfg)
        .snapshots.back();
  };
  const auto coarse = run_at(1024);
  const auto fine = run_at(2048);
  double worst = 0.0;
  for (std::size_t m = 0; m < coarse.size(); ++m) {
    const std::size_t mf = m < 512 ? m : 2048 - (1024 - m);
    worst = std::max(worst, std::abs(coarse[m] - fine[mf]));
  }
  CHECK(worst < 1e-8);
}
