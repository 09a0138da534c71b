#include "pulseprop/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace pulseprop::experiments {

namespace {

using models::ModelKind;
using pulses::PulseKind;

std::size_t next_pow2(double x) {
  std::size_t n = 2;
  while (static_cast<double>(n) < x) n <<= 1;
  return n;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Spectral half-width needed to resolve the envelope family to ~1e-12
// (calibrated on the gaussian profile; chirped pulses add the internal
// frequency sweep up to 1/beta^2).
double envelope_bandwidth(PulseKind kind, double beta) {
  const double base = 10.5 / beta + 8.0;
  return kind == PulseKind::Chirped ? 1.0 / (beta * beta) + base : base;
}

}  // namespace

std::size_t auto_compare_size(double eps, double length, std::size_t at_least) {
  const double n_carrier = 8.0 * length / (std::numbers::pi * eps);
  return next_pow2(std::max(static_cast<double>(at_least), n_carrier));
}

std::size_t auto_exact_size(double eps, double beta, PulseKind kind, double length) {
  const double xi_needed = 1.0 / eps + envelope_bandwidth(kind, beta) + 16.0;
  const double n = xi_needed * length / std::numbers::pi;
  return std::max<std::size_t>(16384, next_pow2(n));
}

std::size_t auto_envelope_size(double beta, PulseKind kind, double length) {
  const double n = envelope_bandwidth(kind, beta) * length / std::numbers::pi;
  return std::clamp<std::size_t>(next_pow2(n), 2048, 65536);
}

double auto_envelope_dt(double beta, PulseKind kind) {
  if (kind == PulseKind::Chirped) return std::min(1e-3, 1e-3 * 20.0 * beta * beta);
  return 1e-3;
}

SupErrorAccumulator::SupErrorAccumulator(const models::Trajectory* exact, double eps,
                                         dispersion::CarrierPoint carrier,
                                         std::size_t n_compare)
    : exact_(exact), eps_(eps), carrier_(carrier), n_compare_(n_compare) {
  if (!exact_ || exact_->snapshots.empty())
    throw std::invalid_argument("SupErrorAccumulator: empty reference trajectory");
}

void SupErrorAccumulator::add(std::size_t index, double t,
                              const spectral::Field& envelope_spectral) {
  if (index >= exact_->snapshots.size())
    throw std::invalid_argument("SupErrorAccumulator: sample index out of range");
  if (std::abs(exact_->times[index] - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw std::invalid_argument("SupErrorAccumulator: snapshot times differ");

  const spectral::Field fx =
      inverse(upsample(exact_->snapshots[index], n_compare_));
  const spectral::Field env = inverse(upsample(envelope_spectral, n_compare_));
  const spectral::Field rec = models::reconstruct_f(env, t, eps_, carrier_);

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    den = std::max(den, std::abs(fx[i].real()));
    num = std::max(num, std::abs(fx[i].real() - rec[i].real()));
  }
  if (den < 1e-12) {
    std::fprintf(stderr,
                 "error metric: degenerate reference sup norm at t=%g; sample skipped\n", t);
    return;
  }
  sup_ = std::max(sup_, num / den);
}

double error_metric(const models::Trajectory& exact, const models::Trajectory& approx,
                    double eps, const dispersion::CarrierPoint& carrier,
                    std::size_t n_compare) {
  if (exact.snapshots.size() != approx.snapshots.size())
    throw std::invalid_argument("error_metric: trajectories sampled differently");
  std::size_t at_least = 2;
  for (const auto& s : exact.snapshots) at_least = std::max(at_least, s.grid().size());
  for (const auto& s : approx.snapshots) at_least = std::max(at_least, s.grid().size());
  if (n_compare == 0)
    n_compare = auto_compare_size(eps, exact.snapshots.front().grid().length(), at_least);
  SupErrorAccumulator acc(&exact, eps, carrier, n_compare);
  for (std::size_t k = 0; k < approx.snapshots.size(); ++k)
    acc.add(k, approx.times[k], approx.snapshots[k]);
  return acc.value();
}

void SweepPlan::validate() const {
  if (eps_values.empty() || beta_values.empty())
    throw std::invalid_argument("SweepPlan: empty parameter lists");
  for (double e : eps_values)
    if (!(e >= 0.001 && e <= 0.1))
      throw std::invalid_argument("SweepPlan: eps outside [0.001, 0.1]");
  for (double b : beta_values)
    if (!(b >= 0.01 && b <= 1.0))
      throw std::invalid_argument("SweepPlan: beta outside [0.01, 1]");
  if (model_list.empty()) throw std::invalid_argument("SweepPlan: no models");
  for (auto m : model_list)
    if (m != ModelKind::FullDispersion && m != ModelKind::NLS && m != ModelKind::ImprovedNLS)
      throw std::invalid_argument("SweepPlan: only scalar envelope models are swept");
}

SweepPlan named_plan(const std::string& name) {
  SweepPlan p;
  p.name = name;
  if (name == "short-1") {
    p.pulse = PulseKind::Short;
    p.eps_values = {0.002, 0.005, 0.01, 0.02, 0.05, 0.1};
    p.beta_values = {1.0};
  } else if (name == "short-2") {
    p.pulse = PulseKind::Short;
    p.eps_values = {0.002, 0.005, 0.01, 0.02, 0.05, 0.1};
    p.beta_values = {0.1};
  } else if (name == "short-3") {
    p.pulse = PulseKind::Short;
    p.eps_values = {0.01};
    p.beta_values = {0.02, 0.03, 0.05, 0.1, 0.2, 0.5, 1.0};
  } else if (name == "chirped-1") {
    p.pulse = PulseKind::Chirped;
    p.eps_values = {0.002, 0.003, 0.005, 0.01, 0.02};
    p.beta_values = {0.1};
  } else if (name == "chirped-2") {
    p.pulse = PulseKind::Chirped;
    p.eps_values = {0.01};
    p.beta_values = {0.1, 0.2, 0.4, 0.7, 1.0};
  } else {
    throw std::invalid_argument("unknown sweep test: " + name);
  }
  return p;
}

std::vector<std::string> named_plan_names() {
  return {"short-1", "short-2", "short-3", "chirped-1", "chirped-2"};
}

std::string sweep_record_csv(const SweepRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g,%zu,%.12g,%.12g", r.model.c_str(),
                r.eps, r.beta, r.error, r.n, r.dt, r.runtime_s);
  return buf;
}

namespace {

std::vector<SweepRecord> run_point(const SweepPlan& plan, double eps, double beta,
                                   const std::function<void(const std::string&)>& log) {
  std::vector<SweepRecord> records;
  const dispersion::KGParams sys{};
  const auto carrier = dispersion::CarrierPoint::at(sys);
  pulses::PulseSpec spec;
  spec.kind = plan.pulse;
  spec.beta = beta;
  spec.x0 = plan.x0;
  spec.profile = plan.profile;

  const std::size_t n_exact = plan.policy.n_exact
                                  ? plan.policy.n_exact
                                  : auto_exact_size(eps, beta, plan.pulse, plan.length);
  const double dt_exact = plan.policy.dt_exact > 0 ? plan.policy.dt_exact : 1e-4;

  models::SolverConfig cfg;
  cfg.eps = eps;
  cfg.t_final = 1.0 / eps;
  cfg.snapshots = plan.policy.snapshots;
  cfg.system = sys;

  models::Trajectory exact;
  try {
    auto grid_ex = spectral::make_grid(plan.length, n_exact);
    const auto env_ex = pulses::build_envelope(spec, grid_ex);
    const auto ic = pulses::assemble_exact_ic(env_ex, eps, sys.kbar);
    auto ecfg = cfg;
    ecfg.grid = grid_ex;
    ecfg.dt = dt_exact;
    exact = models::run_exact(ic, ecfg, {}, true);
  } catch (const std::exception& e) {
    for (auto m : plan.model_list) {
      SweepRecord r;
      r.model = models::model_name(m);
      r.eps = eps;
      r.beta = beta;
      r.error = std::numeric_limits<double>::quiet_NaN();
      r.message = std::string("reference run failed: ") + e.what();
      records.push_back(std::move(r));
    }
    if (log) log("point eps=" + std::to_string(eps) + " beta=" + std::to_string(beta) +
                 " reference failed: " + e.what());
    return records;
  }

  for (auto m : plan.model_list) {
    SweepRecord r;
    r.model = models::model_name(m);
    r.eps = eps;
    r.beta = beta;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const std::size_t n_env = plan.policy.n_env
                                    ? plan.policy.n_env
                                    : auto_envelope_size(beta, plan.pulse, plan.length);
      auto grid_env = spectral::make_grid(plan.length, n_env);
      const auto env = pulses::build_envelope(spec, grid_env);
      auto mcfg = cfg;
      mcfg.grid = grid_env;
      mcfg.dt = plan.policy.dt_env > 0 ? plan.policy.dt_env
                                       : auto_envelope_dt(beta, plan.pulse);
      SupErrorAccumulator acc(
          &exact, eps, carrier,
          auto_compare_size(eps, plan.length, std::max(n_exact, n_env)));
      const auto traj = models::run_scalar(
          m, env, mcfg,
          [&](std::size_t k, double t, const spectral::Field& s) { acc.add(k, t, s); },
          false);
      r.error = acc.value();
      r.n = n_env;
      r.dt = traj.dt_effective;
    } catch (const std::exception& e) {
      r.error = std::numeric_limits<double>::quiet_NaN();
      r.message = e.what();
    }
    r.runtime_s = elapsed_s(t0);
    if (log) log("  " + sweep_record_csv(r) + (r.message.empty() ? "" : "  # " + r.message));
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepPlan& plan, unsigned threads,
                                   const std::optional<std::filesystem::path>& out_csv,
                                   const std::function<void(const std::string&)>& log) {
  plan.validate();

  struct Point {
    double eps, beta;
  };
  std::vector<Point> points;
  for (double e : plan.eps_values)
    for (double b : plan.beta_values) points.push_back({e, b});

  std::vector<std::vector<SweepRecord>> results(points.size());
  std::vector<char> done(points.size(), 0);
  std::mutex mtx;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  const unsigned n_workers = std::max(
      1u, std::min(threads ? threads : 1u, static_cast<unsigned>(points.size())));

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) break;
      auto recs = run_point(plan, points[i].eps, points[i].beta, log);
      {
        std::scoped_lock lock(mtx);
        results[i] = std::move(recs);
        done[i] = 1;
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);

  // Single collector: records land in the CSV in plan order, flushed per
  // point so an interrupted sweep keeps its finished points.
  std::ofstream csv;
  if (out_csv) {
    csv.open(*out_csv);
    if (!csv) {
      for (auto& th : pool) th.join();
      throw std::runtime_error("run_sweep: cannot open " + out_csv->string());
    }
    csv << kSweepCsvHeader << "\n" << std::flush;
  }

  std::vector<SweepRecord> flat;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::unique_lock lock(mtx);
    cv.wait(lock, [&] { return done[i] != 0; });
    for (const auto& r : results[i]) {
      if (csv.is_open()) csv << sweep_record_csv(r) << "\n" << std::flush;
      flat.push_back(r);
    }
  }
  for (auto& th : pool) th.join();
  return flat;
}

SnapshotComparison snapshot_compare(double eps, double beta, double T, PulseKind kind,
                                    const std::filesystem::path& out_dir,
                                    const SweepPolicy& policy,
                                    const std::string& profile) {
  if (!(T >= 0.0)) throw std::invalid_argument("snapshot_compare: T must be >= 0");
  const double length = 30.0 * std::numbers::pi;
  const dispersion::KGParams sys{};
  const auto carrier = dispersion::CarrierPoint::at(sys);

  pulses::PulseSpec spec;
  spec.kind = kind;
  spec.beta = beta;
  spec.profile = profile;

  const std::size_t n_exact =
      policy.n_exact ? policy.n_exact : auto_exact_size(eps, beta, kind, length);
  const std::size_t n_env =
      policy.n_env ? policy.n_env : auto_envelope_size(beta, kind, length);

  models::SolverConfig cfg;
  cfg.eps = eps;
  cfg.t_final = std::max(T, 1e-9);
  cfg.snapshots = 1;
  cfg.system = sys;

  auto grid_ex = spectral::make_grid(length, n_exact);
  const auto env_ex = pulses::build_envelope(spec, grid_ex);
  const auto ic = pulses::assemble_exact_ic(env_ex, eps, sys.kbar);
  auto ecfg = cfg;
  ecfg.grid = grid_ex;
  ecfg.dt = policy.dt_exact > 0 ? policy.dt_exact : 1e-4;
  const auto exact = models::run_exact(ic, ecfg, {}, true);

  const std::size_t n_cmp = auto_compare_size(eps, length, std::max(n_exact, n_env));
  const spectral::Field fx = inverse(upsample(exact.snapshots.back(), n_cmp));

  SnapshotComparison out;
  for (std::size_t i = 0; i < fx.size(); ++i)
    out.linf_exact = std::max(out.linf_exact, std::abs(fx[i].real()));

  const std::vector<ModelKind> model_list = {ModelKind::FullDispersion, ModelKind::NLS,
                                             ModelKind::ImprovedNLS};
  std::vector<std::vector<double>> diffs;
  auto grid_env = spectral::make_grid(length, n_env);
  const auto env0 = pulses::build_envelope(spec, grid_env);
  for (auto m : model_list) {
    auto mcfg = cfg;
    mcfg.grid = grid_env;
    mcfg.dt = policy.dt_env > 0 ? policy.dt_env : auto_envelope_dt(beta, kind);
    const auto traj = models::run_scalar(m, env0, mcfg, {}, true);
    const spectral::Field env = inverse(upsample(traj.snapshots.back(), n_cmp));
    const spectral::Field rec = models::reconstruct_f(env, traj.times.back(), eps, carrier);
    std::vector<double> d(fx.size());
    double linf = 0.0;
    for (std::size_t i = 0; i < fx.size(); ++i) {
      d[i] = fx[i].real() - rec[i].real();
      linf = std::max(linf, std::abs(d[i]));
    }
    diffs.push_back(std::move(d));
    out.linf_diff.push_back(linf);
    out.model_names.push_back(models::model_name(m));
  }

  std::filesystem::create_directories(out_dir);
  out.csv_path = out_dir / "snapshot_compare.csv";
  std::ofstream os(out.csv_path);
  if (!os) throw std::runtime_error("snapshot_compare: cannot open " + out.csv_path.string());
  os << "x,exact";
  for (const auto& name : out.model_names) os << ",diff_" << name;
  os << "\n";
  char buf[64];
  const auto& grid = fx.grid();
  for (std::size_t i = 0; i < fx.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g", grid.node(i), fx[i].real());
    os << buf;
    for (const auto& d : diffs) {
      std::snprintf(buf, sizeof buf, ",%.12g", d[i]);
      os << buf;
    }
    os << "\n";
  }
  return out;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_manifest: cannot open " + path.string());
  for (const auto& [k, v] : entries) os << k << "=" << v << "\n";
}

// ---------------------------------------------------------------------------
// Validation suite.

namespace {

CheckResult check_dispersion_oracles() {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uk(-10.0, 10.0);
  std::uniform_real_distribution<double> uv(0.5, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double k = uk(rng), v = uv(rng);
    const auto eig = dispersion::eigen_oracle_kg(k, v);
    const double w = dispersion::kg_omega1(k, v);
    worst = std::max({worst, std::abs(eig[0] - w), std::abs(eig[1] + w)});
  }
  std::uniform_real_distribution<double> u3(-2.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const std::array<double, 3> k{u3(rng), u3(rng), u3(rng)};
    const auto eig = dispersion::eigen_oracle_maxwell(k);
    const auto branches =
        dispersion::maxwell_omegas(std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
    for (double ev : eig) {
      double best = 1e300;
      for (double b : branches) best = std::min(best, std::abs(ev - b));
      worst = std::max(worst, best);
    }
    for (double b : branches) {
      double best = 1e300;
      for (double ev : eig) best = std::min(best, std::abs(ev - b));
      worst = std::max(worst, best);
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max deviation %.3g", worst);
  return {"dispersion-oracles", worst <= 1e-10, buf};
}

CheckResult check_pade() {
  const auto p = dispersion::pade_coefficients(1.0, 1.0);
  bool ok = p.b == 1.0 && p.B == 5.0 / 16.0 &&
            p.C == 7.0 / (16.0 * std::sqrt(2.0)) && p.hyp_margin == 4.0 / 5.0;
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < 100 && ok; ++i) {
    const auto q = dispersion::pade_coefficients(u(rng), u(rng));
    ok = q.B > 0.0 && q.hyp_margin > 0.0;
  }
  return {"pade-coefficients", ok, ok ? "closed forms and positivity hold" : "mismatch"};
}

CheckResult check_spectral_contracts() {
  auto grid = spectral::make_grid(30.0 * std::numbers::pi, 1024);
  std::mt19937 rng(99);
  std::normal_distribution<double> gauss;
  spectral::Field f(grid, spectral::Space::Physical);
  for (auto& z : f.values()) z = {gauss(rng), gauss(rng)};
  const auto round = inverse(forward(f));
  double rt = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    rt = std::max(rt, std::abs(round[i] - f[i]));
    scale = std::max(scale, std::abs(f[i]));
  }
  rt /= scale;

  const auto spec = forward(f);
  double sum_coeff = 0.0;
  for (const auto& c : spec.values()) sum_coeff += std::norm(c);
  const double l2 = spectral::norms(f).l2;
  const double parseval =
      std::abs(l2 * l2 - grid->length() * sum_coeff) / (l2 * l2);

  std::vector<std::complex<double>> mult(grid->size());
  std::uniform_real_distribution<double> um(-3.0, 3.0);
  for (auto& m : mult) m = std::polar(1.0, um(rng));
  const double l2b = spectral::norms(apply_multiplier(f, std::span<const std::complex<double>>(mult))).l2;
  const double unit = std::abs(l2b - l2) / l2;

  const double worst = std::max({rt, parseval, unit});
  char buf[96];
  std::snprintf(buf, sizeof buf, "roundtrip %.2g, parseval %.2g, unitary %.2g", rt,
                parseval, unit);
  return {"spectral-contracts", worst <= 1e-12, buf};
}

CheckResult check_wiener() {
  auto grid = spectral::make_grid(30.0 * std::numbers::pi, 16384);
  double worst_dilation = 0.0;
  std::vector<double> deriv_norms;
  for (double beta : {0.05, 0.1, 0.5, 1.0}) {
    pulses::PulseSpec spec;
    spec.beta = beta;
    const auto env = pulses::build_short(spec, grid);
    worst_dilation = std::max(worst_dilation, std::abs(spectral::wiener_norm(env) - 1.0));
    deriv_norms.push_back(spectral::wiener_norm(derivative(env)));
  }
  // |d/dx G(./beta)|_W = |G'|_W / beta = (2/sqrt(pi)) / beta for the gaussian
  const double ref = 2.0 / std::sqrt(std::numbers::pi);
  double worst_scaling = 0.0;
  const double betas[] = {0.05, 0.1, 0.5, 1.0};
  for (std::size_t i = 0; i < 4; ++i)
    worst_scaling =
        std::max(worst_scaling, std::abs(deriv_norms[i] * betas[i] / ref - 1.0));

  pulses::PulseSpec s1, s2;
  s1.beta = 0.1;
  s2.beta = 1.0;
  const double r1 = pulses::practical_rule(pulses::build_short(s1, grid), 0.01);
  const double r2 = pulses::practical_rule(pulses::build_short(s2, grid), 0.01);
  const double ratio_err = std::abs(r1 / r2 / 10.0 - 1.0);

  char buf[128];
  std::snprintf(buf, sizeof buf, "dilation %.2g, derivative scaling %.2g, rule ratio %.2g",
                worst_dilation, worst_scaling, ratio_err);
  return {"wiener-diagnostics",
          worst_dilation <= 1e-3 && worst_scaling <= 0.02 && ratio_err <= 0.02, buf};
}

CheckResult check_conservation() {
  const double length = 30.0 * std::numbers::pi;
  double worst = 0.0;

  {
    auto grid = spectral::make_grid(length, 2048);
    pulses::PulseSpec spec;
    models::SolverConfig cfg;
    cfg.eps = 0.05;
    cfg.dt = 1e-3;
    cfg.grid = grid;
    const auto ic = pulses::assemble_exact_ic(pulses::build_short(spec, grid), cfg.eps);
    models::ExactKGSolver solver(cfg, ic);
    double prev = solver.quadratic_invariant();
    const double q0 = prev;
    for (int s = 0; s < 2000; ++s) {
      solver.step();
      const double q = solver.quadratic_invariant();
      worst = std::max(worst, std::abs(q - prev) / q0);
      prev = q;
    }
  }
  for (auto kind : {ModelKind::FullDispersion, ModelKind::NLS}) {
    auto grid = spectral::make_grid(length, 1024);
    pulses::PulseSpec spec;
    models::SolverConfig cfg;
    cfg.eps = 0.05;
    cfg.dt = 1e-3;
    cfg.grid = grid;
    models::ScalarSolver solver(kind, cfg, pulses::build_short(spec, grid));
    double prev = solver.quadratic_invariant();
    const double q0 = prev;
    for (int s = 0; s < 2000; ++s) {
      solver.step();
      const double q = solver.quadratic_invariant();
      worst = std::max(worst, std::abs(q - prev) / q0);
      prev = q;
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max per-step drift %.3g", worst);
  return {"conservation", worst <= 1e-12, buf};
}

double order_ratio(ModelKind kind, double dt) {
  const double length = 30.0 * std::numbers::pi;
  const double eps = 0.05, T = 2.0;
  const std::size_t n = kind == ModelKind::ExactKG ? 2048 : 1024;
  auto grid = spectral::make_grid(length, n);
  pulses::PulseSpec spec;
  const auto env = pulses::build_short(spec, grid);

  auto final_state = [&](double step) {
    models::SolverConfig cfg;
    cfg.eps = eps;
    cfg.dt = step;
    cfg.t_final = T;
    cfg.snapshots = 1;
    cfg.grid = grid;
    return inverse(models::run_model(kind, env, cfg).snapshots.back());
  };
  const auto a = final_state(dt);
  const auto b = final_state(dt / 2);
  const auto c = final_state(dt / 4);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    e1 = std::max(e1, std::abs(a[i] - b[i]));
    e2 = std::max(e2, std::abs(b[i] - c[i]));
  }
  return e1 / e2;
}

CheckResult check_strang_order() {
  const double r_exact = order_ratio(ModelKind::ExactKG, 4e-3);
  const double r_nls = order_ratio(ModelKind::NLS, 4e-3);
  char buf[96];
  std::snprintf(buf, sizeof buf, "ratios exact %.2f, nls %.2f", r_exact, r_nls);
  const auto in_band = [](double r) { return r >= 3.4 && r <= 4.6; };
  return {"strang-order", in_band(r_exact) && in_band(r_nls), buf};
}

CheckResult check_linear_flow() {
  const double length = 30.0 * std::numbers::pi;
  auto grid = spectral::make_grid(length, 512);
  const double eps = 0.02, T = 3.0;
  const auto carrier = dispersion::CarrierPoint::at(dispersion::KGParams{});
  const auto pade = dispersion::pade_coefficients(1.0, 1.0);

  spectral::Field f0(grid, spectral::Space::Spectral);
  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  for (std::size_t m = 0; m < grid->size(); ++m)
    if (std::abs(grid->wavenumber(m)) < 10.0) f0[m] = {gauss(rng), gauss(rng)};

  double worst = 0.0;
  for (auto kind : {ModelKind::FullDispersion, ModelKind::NLS, ModelKind::ImprovedNLS}) {
    models::SolverConfig cfg;
    cfg.eps = eps;
    cfg.dt = 1e-2;
    cfg.t_final = T;
    cfg.snapshots = 1;
    cfg.grid = grid;
    cfg.nonlinearity_on = false;
    const auto traj = models::run_scalar(kind, inverse(f0), cfg);
    const auto& got = traj.snapshots.back();
    for (std::size_t m = 0; m < grid->size(); ++m) {
      const double xi = grid->wavenumber(m);
      double mv = 0.0;
      switch (kind) {
        case ModelKind::FullDispersion: mv = dispersion::symbol_exact(xi, eps, carrier); break;
        case ModelKind::NLS: mv = dispersion::symbol_taylor2(xi, eps, carrier); break;
        default: mv = dispersion::symbol_pade32(xi, eps, carrier, pade); break;
      }
      const auto expect = f0[m] * std::polar(1.0, -mv * T);
      worst = std::max(worst, std::abs(got[m] - expect));
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max coefficient error %.3g", worst);
  return {"linear-flow", worst <= 1e-10, buf};
}

CheckResult check_dt_halving() {
  SweepPlan plan;
  plan.pulse = PulseKind::Short;
  plan.eps_values = {0.05};
  plan.beta_values = {1.0};
  plan.policy.n_exact = 2048;
  plan.policy.n_env = 2048;
  plan.policy.snapshots = 50;

  plan.policy.dt_env = 1e-3;
  const auto coarse = run_sweep(plan, 1);
  plan.policy.dt_env = 5e-4;
  plan.policy.dt_exact = 5e-5;
  const auto fine = run_sweep(plan, 1);

  double worst = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i)
    worst = std::max(worst, std::abs(coarse[i].error - fine[i].error) /
                                std::max(fine[i].error, 1e-6));
  char buf[96];
  std::snprintf(buf, sizeof buf, "max relative shift under halving %.3g", worst);
  return {"dt-halving", worst <= 0.02, buf};
}

}  // namespace

std::vector<CheckResult> run_validation(unsigned /*threads*/) {
  std::vector<CheckResult> out;
  out.push_back(check_dispersion_oracles());
  out.push_back(check_pade());
  out.push_back(check_spectral_contracts());
  out.push_back(check_wiener());
  out.push_back(check_conservation());
  out.push_back(check_strang_order());
  out.push_back(check_linear_flow());
  out.push_back(check_dt_halving());
  return out;
}

}  // namespace pulseprop::experiments
