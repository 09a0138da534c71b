#include "pulseprop/models.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fftw_lock.hpp"

namespace pulseprop::models {

namespace {

using cplx = std::complex<double>;

// Rotation angles in the nonlinear substeps are O(eps |u|^2 dt); below the
// crossover the truncated series is cheaper than libm and exact to double
// precision.
inline void rot_sincos(double th, double& s, double& c) {
  const double t2 = th * th;
  if (t2 < 1e-6) {
    s = th * (1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0)));
    c = 1.0 - t2 / 2.0 * (1.0 - t2 / 12.0 * (1.0 - t2 / 30.0));
  } else {
    s = std::sin(th);
    c = std::cos(th);
  }
}

fftw_plan make_plan_c2c(std::size_t n, cplx* data, int sign) {
  std::scoped_lock lock(detail::fftw_planner_mutex());
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n),
                                 reinterpret_cast<fftw_complex*>(data),
                                 reinterpret_cast<fftw_complex*>(data), sign,
                                 FFTW_ESTIMATE);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  return p;
}

void validate_config(const SolverConfig& cfg) {
  if (!cfg.grid) throw std::invalid_argument("SolverConfig: grid is required");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("SolverConfig: eps must be positive");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be positive");
  if (cfg.fd_projected_nonlinearity)
    throw std::invalid_argument(
        "SolverConfig: the shifted-projector nonlinearity variant is not implemented");
}

template <typename T>
void require_finite(const T* data, std::size_t n, double t, const char* what) {
  for (std::size_t i = 0; i < n; ++i) {
    if constexpr (std::is_same_v<T, double>) {
      if (!std::isfinite(data[i])) throw NumericalFailure(what, t);
    } else {
      if (!std::isfinite(data[i].real()) || !std::isfinite(data[i].imag()))
        throw NumericalFailure(what, t);
    }
  }
}

}  // namespace

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::ExactKG: return "exact";
    case ModelKind::Envelope: return "envelope";
    case ModelKind::FullDispersion: return "fd";
    case ModelKind::NLS: return "nls";
    case ModelKind::ImprovedNLS: return "improved";
  }
  throw std::logic_error("model_name: unknown kind");
}

ModelKind parse_model(const std::string& name) {
  if (name == "exact") return ModelKind::ExactKG;
  if (name == "envelope") return ModelKind::Envelope;
  if (name == "fd") return ModelKind::FullDispersion;
  if (name == "nls") return ModelKind::NLS;
  if (name == "improved") return ModelKind::ImprovedNLS;
  throw std::invalid_argument("unknown model: " + name);
}

// ---------------------------------------------------------------------------
// Exact Klein-Gordon system on real fields, half-spectrum representation.

struct ExactKGSolver::Impl {
  std::size_t n = 0;
  std::size_t nh = 0;  // n/2 + 1
  spectral::GridPtr grid;
  double length = 0;
  double eps = 0;
  bool nonlinear_on = true;
  double theta_rate = 0;  // eps * dt

  double* f = nullptr;
  double* g = nullptr;
  cplx* F = nullptr;
  cplx* G = nullptr;
  fftw_plan r2c_f{}, r2c_g{}, c2r_f{}, c2r_g{};

  struct Table {
    std::vector<double> a;
    std::vector<cplx> b, c;
  };
  Table full, half;

  ~Impl() {
    std::scoped_lock lock(detail::fftw_planner_mutex());
    if (r2c_f) fftw_destroy_plan(r2c_f);
    if (r2c_g) fftw_destroy_plan(r2c_g);
    if (c2r_f) fftw_destroy_plan(c2r_f);
    if (c2r_g) fftw_destroy_plan(c2r_g);
    fftw_free(f);
    fftw_free(g);
    fftw_free(F);
    fftw_free(G);
  }

  void fill_table(Table& t, double tau) {
    t.a.assign(nh, 0.0);
    t.b.assign(nh, 0.0);
    t.c.assign(nh, 0.0);
    const double inv_eps = 1.0 / eps;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double dxi = 2.0 * std::numbers::pi / length;
    for (std::size_t j = 0; j + 1 < nh; ++j) {  // Nyquist row stays zero
      const double xi = dxi * static_cast<double>(j);
      const double mu = std::hypot(xi, inv_eps);
      const double co = std::cos(mu * tau);
      const double si = std::sin(mu * tau) / mu;
      t.a[j] = co * inv_n;
      t.b[j] = -si * cplx(-inv_eps, xi) * inv_n;
      t.c[j] = -si * cplx(inv_eps, xi) * inv_n;
    }
  }

  void apply_linear(const Table& t) {
    fftw_execute(r2c_f);
    fftw_execute(r2c_g);
    for (std::size_t j = 0; j < nh; ++j) {
      const cplx fj = F[j], gj = G[j];
      F[j] = t.a[j] * fj + t.b[j] * gj;
      G[j] = t.c[j] * fj + t.a[j] * gj;
    }
    fftw_execute(c2r_f);
    fftw_execute(c2r_g);
  }

  void apply_nonlinear() {
    if (!nonlinear_on) return;
    for (std::size_t i = 0; i < n; ++i) {
      const double fi = f[i], gi = g[i];
      const double theta = theta_rate * (fi * fi + gi * gi);
      double s, c;
      rot_sincos(theta, s, c);
      f[i] = c * fi - s * gi;
      g[i] = s * fi + c * gi;
    }
  }
};

ExactKGSolver::ExactKGSolver(const SolverConfig& config,
                             const pulses::ExactInitialState& ic)
    : impl_(std::make_unique<Impl>()), dt_(config.dt) {
  validate_config(config);
  if (!(ic.f.grid() == *config.grid) || !(ic.g.grid() == *config.grid))
    throw std::invalid_argument("ExactKGSolver: initial state grid mismatch");

  auto& im = *impl_;
  im.n = config.grid->size();
  im.nh = im.n / 2 + 1;
  im.grid = config.grid;
  im.length = config.grid->length();
  im.eps = config.eps;
  im.nonlinear_on = config.nonlinearity_on;
  im.theta_rate = config.eps * config.dt;

  im.f = fftw_alloc_real(im.n);
  im.g = fftw_alloc_real(im.n);
  im.F = reinterpret_cast<cplx*>(fftw_alloc_complex(im.nh));
  im.G = reinterpret_cast<cplx*>(fftw_alloc_complex(im.nh));
  {
    std::scoped_lock lock(detail::fftw_planner_mutex());
    im.r2c_f = fftw_plan_dft_r2c_1d(static_cast<int>(im.n), im.f,
                                    reinterpret_cast<fftw_complex*>(im.F), FFTW_ESTIMATE);
    im.r2c_g = fftw_plan_dft_r2c_1d(static_cast<int>(im.n), im.g,
                                    reinterpret_cast<fftw_complex*>(im.G), FFTW_ESTIMATE);
    im.c2r_f = fftw_plan_dft_c2r_1d(static_cast<int>(im.n),
                                    reinterpret_cast<fftw_complex*>(im.F), im.f, FFTW_ESTIMATE);
    im.c2r_g = fftw_plan_dft_c2r_1d(static_cast<int>(im.n),
                                    reinterpret_cast<fftw_complex*>(im.G), im.g, FFTW_ESTIMATE);
    if (!im.r2c_f || !im.r2c_g || !im.c2r_f || !im.c2r_g)
      throw std::runtime_error("fftw plan creation failed");
  }
  for (std::size_t i = 0; i < im.n; ++i) {
    im.f[i] = ic.f[i].real();
    im.g[i] = ic.g[i].real();
  }
  im.fill_table(im.full, dt_);
  im.fill_table(im.half, 0.5 * dt_);
}

ExactKGSolver::~ExactKGSolver() = default;

void ExactKGSolver::linear_half() { impl_->apply_linear(impl_->half); }
void ExactKGSolver::linear_full() { impl_->apply_linear(impl_->full); }
void ExactKGSolver::nonlinear() { impl_->apply_nonlinear(); }

void ExactKGSolver::step() {
  linear_half();
  nonlinear();
  linear_half();
}

double ExactKGSolver::quadratic_invariant() const {
  const auto& im = *impl_;
  double sum = 0.0;
  for (std::size_t i = 0; i < im.n; ++i) sum += im.f[i] * im.f[i] + im.g[i] * im.g[i];
  return sum * im.length / static_cast<double>(im.n);
}

namespace {
spectral::Field real_to_field(const double* data, std::size_t n, spectral::GridPtr grid) {
  spectral::Field out(std::move(grid), spectral::Space::Physical);
  for (std::size_t i = 0; i < n; ++i) out[i] = data[i];
  return out;
}
}  // namespace

spectral::Field ExactKGSolver::snapshot_f() const {
  return real_to_field(impl_->f, impl_->n, impl_->grid);
}

spectral::Field ExactKGSolver::snapshot_g() const {
  return real_to_field(impl_->g, impl_->n, impl_->grid);
}

void ExactKGSolver::check_finite(double t) const {
  require_finite(impl_->f, impl_->n, t, "ExactKG state is not finite");
  require_finite(impl_->g, impl_->n, t, "ExactKG state is not finite");
}

// ---------------------------------------------------------------------------
// Vector envelope equation.

struct EnvelopeSolver::Impl {
  std::size_t n = 0;
  spectral::GridPtr grid;
  double length = 0;
  double eps = 0;
  double v = 0;
  bool nonlinear_on = true;

  cplx* u1 = nullptr;
  cplx* u2 = nullptr;
  fftw_plan fwd1{}, bwd1{}, fwd2{}, bwd2{};

  struct Table {
    std::vector<cplx> a, b, c;
  };
  Table full, half;

  std::vector<cplx> m1, m2;  // midpoint scratch

  ~Impl() {
    std::scoped_lock lock(detail::fftw_planner_mutex());
    if (fwd1) fftw_destroy_plan(fwd1);
    if (bwd1) fftw_destroy_plan(bwd1);
    if (fwd2) fftw_destroy_plan(fwd2);
    if (bwd2) fftw_destroy_plan(bwd2);
    fftw_free(u1);
    fftw_free(u2);
  }

  void fill_table(Table& t, double tau, const dispersion::KGParams& sys) {
    t.a.assign(n, 0.0);
    t.b.assign(n, 0.0);
    t.c.assign(n, 0.0);
    const double omega_bar = dispersion::kg_omega1(sys.kbar, sys.v);
    const double theta = tau / eps;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double dxi = 2.0 * std::numbers::pi / length;
    for (std::size_t m = 0; m < n; ++m) {
      const auto sm = (m < n / 2) ? static_cast<long long>(m)
                                  : static_cast<long long>(m) - static_cast<long long>(n);
      const double k = sys.kbar + eps * dxi * static_cast<double>(sm);
      const double w = dispersion::kg_omega1(k, sys.v);
      const cplx phase = std::polar(inv_n, omega_bar * theta);
      const cplx msin = cplx(0.0, -std::sin(w * theta) / w);
      t.a[m] = phase * std::cos(w * theta);
      t.b[m] = phase * msin * cplx(k, sys.v);
      t.c[m] = phase * msin * cplx(k, -sys.v);
    }
  }

  void apply_linear(const Table& t) {
    fftw_execute(fwd1);
    fftw_execute(fwd2);
    for (std::size_t m = 0; m < n; ++m) {
      const cplx a = u1[m], b = u2[m];
      u1[m] = t.a[m] * a + t.b[m] * b;
      u2[m] = t.c[m] * a + t.a[m] * b;
    }
    fftw_execute(bwd1);
    fftw_execute(bwd2);
  }

  // eps * (T(U~,U,U) + T(U,U~,U) + T(U,U,U~)) with T(a,b,c) = (a.b) E c,
  // taking the non-hermitian dot product and E = [[0,-v],[v,0]].
  inline void rhs(const cplx a, const cplx b, cplx& r1, cplx& r2) const {
    const double rho = std::norm(a) + std::norm(b);
    const cplx q = a * a + b * b;
    const cplx e1 = -v * b, e2 = v * a;
    r1 = eps * (2.0 * rho * e1 + q * std::conj(e1));
    r2 = eps * (2.0 * rho * e2 + q * std::conj(e2));
  }

  void apply_nonlinear(double dt) {
    if (!nonlinear_on) return;
    m1.resize(n);
    m2.resize(n);
    const double h = 0.5 * dt;
    for (std::size_t i = 0; i < n; ++i) {
      cplx r1, r2;
      rhs(u1[i], u2[i], r1, r2);
      m1[i] = u1[i] + h * r1;
      m2[i] = u2[i] + h * r2;
    }
    for (std::size_t i = 0; i < n; ++i) {
      cplx r1, r2;
      rhs(m1[i], m2[i], r1, r2);
      u1[i] += dt * r1;
      u2[i] += dt * r2;
    }
  }
};

EnvelopeSolver::EnvelopeSolver(const SolverConfig& config, const spectral::Field& envelope)
    : impl_(std::make_unique<Impl>()), dt_(config.dt) {
  validate_config(config);
  if (!(envelope.grid() == *config.grid))
    throw std::invalid_argument("EnvelopeSolver: envelope grid mismatch");

  auto& im = *impl_;
  im.n = config.grid->size();
  im.grid = config.grid;
  im.length = config.grid->length();
  im.eps = config.eps;
  im.v = config.system.v;
  im.nonlinear_on = config.nonlinearity_on;

  im.u1 = reinterpret_cast<cplx*>(fftw_alloc_complex(im.n));
  im.u2 = reinterpret_cast<cplx*>(fftw_alloc_complex(im.n));
  {
    std::scoped_lock lock(detail::fftw_planner_mutex());
    auto plan = [&](cplx* d, int sign) {
      fftw_plan p = fftw_plan_dft_1d(static_cast<int>(im.n),
                                     reinterpret_cast<fftw_complex*>(d),
                                     reinterpret_cast<fftw_complex*>(d), sign, FFTW_ESTIMATE);
      if (!p) throw std::runtime_error("fftw plan creation failed");
      return p;
    };
    im.fwd1 = plan(im.u1, FFTW_FORWARD);
    im.bwd1 = plan(im.u1, FFTW_BACKWARD);
    im.fwd2 = plan(im.u2, FFTW_FORWARD);
    im.bwd2 = plan(im.u2, FFTW_BACKWARD);
  }

  const spectral::Field phys = to_space(envelope, spectral::Space::Physical);
  const cplx pol = pulses::polarization_factor();
  for (std::size_t i = 0; i < im.n; ++i) {
    im.u1[i] = phys[i];
    im.u2[i] = pol * phys[i];
  }
  im.fill_table(im.full, dt_, config.system);
  im.fill_table(im.half, 0.5 * dt_, config.system);
}

EnvelopeSolver::~EnvelopeSolver() = default;

void EnvelopeSolver::linear_half() { impl_->apply_linear(impl_->half); }
void EnvelopeSolver::linear_full() { impl_->apply_linear(impl_->full); }
void EnvelopeSolver::nonlinear() { impl_->apply_nonlinear(dt_); }

void EnvelopeSolver::step() {
  linear_half();
  nonlinear();
  linear_half();
}

double EnvelopeSolver::quadratic_invariant() const {
  const auto& im = *impl_;
  double sum = 0.0;
  for (std::size_t i = 0; i < im.n; ++i) sum += std::norm(im.u1[i]) + std::norm(im.u2[i]);
  return sum * im.length / static_cast<double>(im.n);
}

namespace {
spectral::Field cplx_to_field(const cplx* data, std::size_t n, spectral::GridPtr grid) {
  spectral::Field out(std::move(grid), spectral::Space::Physical);
  std::copy(data, data + n, out.values().begin());
  return out;
}
}  // namespace

spectral::Field EnvelopeSolver::snapshot_u1() const {
  return cplx_to_field(impl_->u1, impl_->n, impl_->grid);
}

spectral::Field EnvelopeSolver::snapshot_u2() const {
  return cplx_to_field(impl_->u2, impl_->n, impl_->grid);
}

void EnvelopeSolver::check_finite(double t) const {
  require_finite(impl_->u1, impl_->n, t, "envelope state is not finite");
  require_finite(impl_->u2, impl_->n, t, "envelope state is not finite");
}

// ---------------------------------------------------------------------------
// Scalar envelope models.

struct ScalarSolver::Impl {
  ModelKind kind{};
  std::size_t n = 0;
  spectral::GridPtr grid;
  double length = 0;
  double eps = 0;
  double gamma = 0;  // nonlinear phase rate 4 eps / sqrt(2)
  bool nonlinear_on = true;

  cplx* f = nullptr;
  cplx* w = nullptr;  // smoothing scratch (ImprovedNLS)
  fftw_plan fwd_f{}, bwd_f{}, fwd_w{}, bwd_w{};

  std::vector<cplx> mult_full, mult_half;  // exp(-i m(xi) tau)/N
  std::vector<double> smooth;              // R(xi)/N
  std::vector<cplx> mid;

  ~Impl() {
    std::scoped_lock lock(detail::fftw_planner_mutex());
    if (fwd_f) fftw_destroy_plan(fwd_f);
    if (bwd_f) fftw_destroy_plan(bwd_f);
    if (fwd_w) fftw_destroy_plan(fwd_w);
    if (bwd_w) fftw_destroy_plan(bwd_w);
    fftw_free(f);
    fftw_free(w);
  }

  void apply_mult(const std::vector<cplx>& mult) {
    fftw_execute(fwd_f);
    for (std::size_t m = 0; m < n; ++m) f[m] *= mult[m];
    fftw_execute(bwd_f);
  }

  // w <- R(D) (i gamma |src|^2 src)
  void smoothed_rhs(const cplx* src) {
    for (std::size_t i = 0; i < n; ++i) w[i] = cplx(0.0, gamma * std::norm(src[i])) * src[i];
    fftw_execute(fwd_w);
    for (std::size_t m = 0; m < n; ++m) w[m] *= smooth[m];
    fftw_execute(bwd_w);
  }

  void apply_nonlinear(double dt) {
    if (!nonlinear_on) return;
    if (kind == ModelKind::ImprovedNLS) {
      mid.resize(n);
      smoothed_rhs(f);
      const double h = 0.5 * dt;
      for (std::size_t i = 0; i < n; ++i) mid[i] = f[i] + h * w[i];
      smoothed_rhs(mid.data());
      for (std::size_t i = 0; i < n; ++i) f[i] += dt * w[i];
    } else {
      // |f| is invariant, so the cubic flow is the exact phase rotation.
      for (std::size_t i = 0; i < n; ++i) {
        const double theta = gamma * std::norm(f[i]) * dt;
        double s, c;
        rot_sincos(theta, s, c);
        f[i] *= cplx(c, s);
      }
    }
  }
};

ScalarSolver::ScalarSolver(ModelKind kind, const SolverConfig& config,
                           const spectral::Field& envelope)
    : impl_(std::make_unique<Impl>()), dt_(config.dt) {
  validate_config(config);
  if (kind != ModelKind::FullDispersion && kind != ModelKind::NLS &&
      kind != ModelKind::ImprovedNLS)
    throw std::invalid_argument("ScalarSolver: kind must be a scalar model");
  if (!(envelope.grid() == *config.grid))
    throw std::invalid_argument("ScalarSolver: envelope grid mismatch");

  auto& im = *impl_;
  im.kind = kind;
  im.n = config.grid->size();
  im.grid = config.grid;
  im.length = config.grid->length();
  im.eps = config.eps;
  im.gamma = 4.0 * config.eps / std::numbers::sqrt2;
  im.nonlinear_on = config.nonlinearity_on;

  im.f = reinterpret_cast<cplx*>(fftw_alloc_complex(im.n));
  {
    std::scoped_lock lock(detail::fftw_planner_mutex());
    auto plan = [&](cplx* d, int sign) {
      fftw_plan p = fftw_plan_dft_1d(static_cast<int>(im.n),
                                     reinterpret_cast<fftw_complex*>(d),
                                     reinterpret_cast<fftw_complex*>(d), sign, FFTW_ESTIMATE);
      if (!p) throw std::runtime_error("fftw plan creation failed");
      return p;
    };
    im.fwd_f = plan(im.f, FFTW_FORWARD);
    im.bwd_f = plan(im.f, FFTW_BACKWARD);
  }

  const auto carrier = dispersion::CarrierPoint::at(config.system);
  dispersion::PadeCoefficients pade;
  if (kind == ModelKind::ImprovedNLS)
    pade = dispersion::pade_coefficients(config.system.kbar, config.system.v);

  auto symbol_at = [&](double xi) {
    switch (kind) {
      case ModelKind::FullDispersion:
        return dispersion::symbol_exact(xi, im.eps, carrier);
      case ModelKind::NLS:
        return dispersion::symbol_taylor2(xi, im.eps, carrier);
      default:
        return dispersion::symbol_pade32(xi, im.eps, carrier, pade);
    }
  };

  const double inv_n = 1.0 / static_cast<double>(im.n);
  im.mult_full.resize(im.n);
  im.mult_half.resize(im.n);
  for (std::size_t m = 0; m < im.n; ++m) {
    const double xi = config.grid->wavenumber(m);
    const double mv = symbol_at(xi);
    im.mult_full[m] = std::polar(inv_n, -mv * dt_);
    im.mult_half[m] = std::polar(inv_n, -mv * 0.5 * dt_);
  }

  if (kind == ModelKind::ImprovedNLS) {
    im.w = reinterpret_cast<cplx*>(fftw_alloc_complex(im.n));
    {
      std::scoped_lock lock(detail::fftw_planner_mutex());
      im.fwd_w = fftw_plan_dft_1d(static_cast<int>(im.n),
                                  reinterpret_cast<fftw_complex*>(im.w),
                                  reinterpret_cast<fftw_complex*>(im.w), FFTW_FORWARD,
                                  FFTW_ESTIMATE);
      im.bwd_w = fftw_plan_dft_1d(static_cast<int>(im.n),
                                  reinterpret_cast<fftw_complex*>(im.w),
                                  reinterpret_cast<fftw_complex*>(im.w), FFTW_BACKWARD,
                                  FFTW_ESTIMATE);
      if (!im.fwd_w || !im.bwd_w) throw std::runtime_error("fftw plan creation failed");
    }
    im.smooth.resize(im.n);
    for (std::size_t m = 0; m < im.n; ++m) {
      const double s = im.eps * config.grid->wavenumber(m);
      im.smooth[m] = inv_n / (1.0 + s * (pade.b + s * pade.B));
    }
  }

  const spectral::Field phys = to_space(envelope, spectral::Space::Physical);
  std::copy(phys.values().begin(), phys.values().end(), im.f);
}

ScalarSolver::~ScalarSolver() = default;

void ScalarSolver::linear_half() { impl_->apply_mult(impl_->mult_half); }
void ScalarSolver::linear_full() { impl_->apply_mult(impl_->mult_full); }
void ScalarSolver::nonlinear() { impl_->apply_nonlinear(dt_); }

void ScalarSolver::step() {
  linear_half();
  nonlinear();
  linear_half();
}

double ScalarSolver::quadratic_invariant() const {
  const auto& im = *impl_;
  double sum = 0.0;
  for (std::size_t i = 0; i < im.n; ++i) sum += std::norm(im.f[i]);
  return sum * im.length / static_cast<double>(im.n);
}

spectral::Field ScalarSolver::snapshot_f() const {
  return cplx_to_field(impl_->f, impl_->n, impl_->grid);
}

void ScalarSolver::check_finite(double t) const {
  require_finite(impl_->f, impl_->n, t, "scalar model state is not finite");
}

// ---------------------------------------------------------------------------
// Reconstruction and the shared Strang driver.

spectral::Field reconstruct_f(const spectral::Field& envelope, double t, double eps,
                              const dispersion::CarrierPoint& carrier) {
  const spectral::Field phys = to_space(envelope, spectral::Space::Physical);
  const auto& grid = phys.grid();
  if (grid.max_wavenumber() < 4.0 * std::abs(carrier.kbar) / eps)
    std::fprintf(stderr,
                 "reconstruct: carrier under-resolved (N=%zu, eps=%g); "
                 "expect sampling artifacts\n",
                 grid.size(), eps);
  spectral::Field out(phys.grid_ptr(), spectral::Space::Physical);
  for (std::size_t i = 0; i < phys.size(); ++i) {
    const cplx a =
        phys[i] * std::polar(1.0, (carrier.kbar * grid.node(i) - carrier.omega * t) / eps);
    out[i] = 2.0 * a.real();
  }
  return out;
}

pulses::ExactInitialState reconstruct_fg(const spectral::Field& envelope, double t,
                                         double eps,
                                         const dispersion::CarrierPoint& carrier) {
  const spectral::Field phys = to_space(envelope, spectral::Space::Physical);
  pulses::ExactInitialState out{
      reconstruct_f(phys, t, eps, carrier),
      spectral::Field(phys.grid_ptr(), spectral::Space::Physical),
  };
  const cplx pol = pulses::polarization_factor();
  const auto& grid = phys.grid();
  for (std::size_t i = 0; i < phys.size(); ++i) {
    const cplx a = pol * phys[i] *
                   std::polar(1.0, (carrier.kbar * grid.node(i) - carrier.omega * t) / eps);
    out.g[i] = 2.0 * a.real();
  }
  return out;
}

namespace {

struct StepPlan {
  double dt_effective = 0;
  std::size_t steps_per_segment = 0;
  std::size_t segments = 0;
  double segment_length = 0;
};

StepPlan make_step_plan(const SolverConfig& cfg) {
  if (!(cfg.t_final > 0.0)) throw std::invalid_argument("SolverConfig: t_final must be positive");
  if (cfg.snapshots == 0) throw std::invalid_argument("SolverConfig: snapshots must be >= 1");
  StepPlan p;
  p.segments = cfg.snapshots;
  p.segment_length = cfg.t_final / static_cast<double>(p.segments);
  const double q = p.segment_length / cfg.dt;
  p.steps_per_segment = static_cast<std::size_t>(std::max(1.0, std::ceil(q - 1e-9)));
  p.dt_effective = p.segment_length / static_cast<double>(p.steps_per_segment);
  return p;
}

template <class Solver>
Trajectory run_loop(Solver& solver, ModelKind kind, const StepPlan& plan,
                    const SnapshotSink& sink, bool keep,
                    spectral::Field (Solver::*primary)() const) {
  const auto t0 = std::chrono::steady_clock::now();
  Trajectory traj;
  traj.kind = kind;
  traj.dt_effective = solver.dt();

  auto emit = [&](std::size_t index, double t) {
    spectral::Field spec = forward((solver.*primary)());
    traj.times.push_back(t);
    traj.quadratic.push_back(solver.quadratic_invariant());
    if (sink) sink(index, t, spec);
    if (keep) traj.snapshots.push_back(std::move(spec));
  };

  solver.check_finite(0.0);
  emit(0, 0.0);
  for (std::size_t seg = 1; seg <= plan.segments; ++seg) {
    solver.linear_half();
    for (std::size_t s = 1; s <= plan.steps_per_segment; ++s) {
      solver.nonlinear();
      if (s < plan.steps_per_segment)
        solver.linear_full();
      else
        solver.linear_half();
    }
    const double t = plan.segment_length * static_cast<double>(seg);
    solver.check_finite(t);
    emit(seg, t);
  }
  traj.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return traj;
}

}  // namespace

Trajectory run_exact(const pulses::ExactInitialState& ic, const SolverConfig& config,
                     const SnapshotSink& sink, bool keep_snapshots) {
  auto plan = make_step_plan(config);
  SolverConfig cfg = config;
  cfg.dt = plan.dt_effective;
  ExactKGSolver solver(cfg, ic);
  return run_loop(solver, ModelKind::ExactKG, plan, sink, keep_snapshots,
                  &ExactKGSolver::snapshot_f);
}

Trajectory run_envelope(const spectral::Field& envelope, const SolverConfig& config,
                        const SnapshotSink& sink, bool keep_snapshots) {
  auto plan = make_step_plan(config);
  SolverConfig cfg = config;
  cfg.dt = plan.dt_effective;
  EnvelopeSolver solver(cfg, envelope);
  return run_loop(solver, ModelKind::Envelope, plan, sink, keep_snapshots,
                  &EnvelopeSolver::snapshot_u1);
}

Trajectory run_scalar(ModelKind kind, const spectral::Field& envelope,
                      const SolverConfig& config, const SnapshotSink& sink,
                      bool keep_snapshots) {
  auto plan = make_step_plan(config);
  SolverConfig cfg = config;
  cfg.dt = plan.dt_effective;
  ScalarSolver solver(kind, cfg, envelope);
  return run_loop(solver, kind, plan, sink, keep_snapshots, &ScalarSolver::snapshot_f);
}

Trajectory run_model(ModelKind kind, const spectral::Field& envelope,
                     const SolverConfig& config, const SnapshotSink& sink,
                     bool keep_snapshots) {
  switch (kind) {
    case ModelKind::ExactKG: {
      const auto ic = pulses::assemble_exact_ic(envelope, config.eps, config.system.kbar);
      return run_exact(ic, config, sink, keep_snapshots);
    }
    case ModelKind::Envelope:
      return run_envelope(envelope, config, sink, keep_snapshots);
    default:
      return run_scalar(kind, envelope, config, sink, keep_snapshots);
  }
}

}  // namespace pulseprop::models
