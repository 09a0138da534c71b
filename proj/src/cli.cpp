#include "pulseprop/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include "pulseprop/dispersion.hpp"
#include "pulseprop/experiments.hpp"
#include "pulseprop/models.hpp"
#include "pulseprop/pulses.hpp"

namespace pulseprop::cli {

namespace {

namespace fs = std::filesystem;

constexpr double kDomainLength = 30.0 * std::numbers::pi;

unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

pulses::PulseKind parse_pulse(const std::string& s) {
  if (s == "short") return pulses::PulseKind::Short;
  if (s == "chirped") return pulses::PulseKind::Chirped;
  throw CLI::ValidationError("--pulse", "must be 'short' or 'chirped'");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

int cmd_simulate(const std::string& model_name, const std::string& pulse_name,
                 double eps, double beta, double x0, std::size_t n, double dt, double T,
                 std::size_t snapshots, const std::string& out_dir) {
  const auto kind = models::parse_model(model_name);
  const auto pulse = parse_pulse(pulse_name);

  pulses::PulseSpec spec;
  spec.kind = pulse;
  spec.beta = beta;
  spec.x0 = x0;

  if (n == 0)
    n = kind == models::ModelKind::ExactKG
            ? experiments::auto_exact_size(eps, beta, pulse, kDomainLength)
            : experiments::auto_envelope_size(beta, pulse, kDomainLength);
  if (dt <= 0.0)
    dt = kind == models::ModelKind::ExactKG ? 1e-4 : 1e-3 * std::min(1.0, beta);
  if (T <= 0.0) T = 1.0 / eps;

  auto grid = spectral::make_grid(kDomainLength, n);
  const auto envelope = pulses::build_envelope(spec, grid);

  const double rule = pulses::practical_rule(envelope, eps);
  std::printf("envelope-gradient diagnostic eps*|dU0/dx|_W = %.6g%s\n", rule,
              pulses::practical_rule_flag(envelope, eps)
                  ? "  (WARNING: envelope description is suspect)"
                  : "");

  models::SolverConfig cfg;
  cfg.eps = eps;
  cfg.dt = dt;
  cfg.t_final = T;
  cfg.grid = grid;
  cfg.snapshots = snapshots;

  const auto traj = models::run_model(kind, envelope, cfg, {}, true);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  experiments::write_manifest(dir / "manifest.txt",
                              {{"model", models::model_name(kind)},
                               {"pulse", pulse_name},
                               {"eps", fmt(eps)},
                               {"beta", fmt(beta)},
                               {"N", std::to_string(n)},
                               {"dt", fmt(traj.dt_effective)},
                               {"T", fmt(T)},
                               {"L", fmt(kDomainLength)},
                               {"x0", fmt(x0)},
                               {"seed", "0"}});

  const auto final_phys = inverse(traj.snapshots.back());
  write_csv(dir / "final.csv", final_phys);
  write_raw(dir / "final.bin", final_phys);

  std::ofstream ts(dir / "observables.csv");
  ts << "t,l2\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    ts << fmt(traj.times[k]) << "," << fmt(std::sqrt(traj.quadratic[k])) << "\n";

  std::printf("wrote %s (N=%zu, dt=%.6g, %zu snapshots)\n", out_dir.c_str(), n,
              traj.dt_effective, traj.times.size());
  return 0;
}

int cmd_sweep(const std::string& test_name, const std::string& pulse_name,
              const std::vector<std::string>& model_names,
              const std::vector<double>& eps_list, const std::vector<double>& beta_list,
              const experiments::SweepPolicy& policy, unsigned threads,
              const std::string& out_dir) {
  experiments::SweepPlan plan;
  if (!test_name.empty()) {
    plan = experiments::named_plan(test_name);
  } else {
    plan.pulse = parse_pulse(pulse_name);
    if (!eps_list.empty()) plan.eps_values = eps_list;
    if (!beta_list.empty()) plan.beta_values = beta_list;
    if (!model_names.empty()) {
      plan.model_list.clear();
      for (const auto& m : model_names) plan.model_list.push_back(models::parse_model(m));
    }
  }
  plan.policy = policy;
  plan.validate();

  fs::create_directories(out_dir);
  const fs::path csv = fs::path(out_dir) / (plan.name + ".csv");

  std::string models_str;
  for (auto m : plan.model_list) {
    if (!models_str.empty()) models_str += " ";
    models_str += models::model_name(m);
  }
  experiments::write_manifest(
      fs::path(out_dir) / (plan.name + ".manifest.txt"),
      {{"test", plan.name},
       {"pulse", plan.pulse == pulses::PulseKind::Short ? "short" : "chirped"},
       {"models", models_str},
       {"L", fmt(plan.length)},
       {"x0", fmt(plan.x0)},
       {"snapshots", std::to_string(plan.policy.snapshots)},
       {"seed", "0"}});

  const auto records = experiments::run_sweep(
      plan, threads, csv, [](const std::string& line) { std::printf("%s\n", line.c_str()); });

  bool any_failed = false;
  for (const auto& r : records) any_failed |= !r.message.empty();
  std::printf("wrote %s (%zu records)\n", csv.string().c_str(), records.size());
  return any_failed ? 2 : 0;
}

int cmd_symbols(double eps, double kbar, double v, double xi_min, double xi_max,
                std::size_t samples, const std::string& out) {
  const dispersion::KGParams sys(v, kbar);
  const auto carrier = dispersion::CarrierPoint::at(sys);
  const auto pade = dispersion::pade_coefficients(kbar, v);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty() && out != "-") {
    file.open(out);
    if (!file) throw CLI::ValidationError("--out", "cannot open " + out);
    os = &file;
  }
  (*os) << "xi,m_exact,m_taylor2,m_pade,c_schrod,c_improved,ratio\n";
  char buf[224];
  for (std::size_t i = 0; i < samples; ++i) {
    const double xi =
        samples == 1 ? xi_min
                     : xi_min + (xi_max - xi_min) * static_cast<double>(i) /
                                    static_cast<double>(samples - 1);
    const double me = dispersion::symbol_exact(xi, eps, carrier);
    const double mt = dispersion::symbol_taylor2(xi, eps, carrier);
    const double mp = dispersion::symbol_pade32(xi, eps, carrier, pade);
    const double cs = dispersion::c_schrod(xi, eps, carrier);
    const double ci = dispersion::c_improved(xi, eps, carrier, pade);
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", xi, me,
                  mt, mp, cs, ci, ci / cs);
    (*os) << buf;
  }
  return 0;
}

int cmd_validate(unsigned threads) {
  const auto results = experiments::run_validation(threads);
  bool all = true;
  for (const auto& r : results) {
    std::printf("%-22s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                r.detail.c_str());
    all &= r.pass;
  }
  return all ? 0 : 2;
}

}  // namespace

namespace {

// key=value lines; '#' starts a comment. Returned as ready-to-parse tokens.
std::vector<std::string> load_config_tokens(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line is not key=value: " + line);
    tokens.push_back("--" + line.substr(0, eq));
    tokens.push_back(line.substr(eq + 1));
  }
  return tokens;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"pulse-propagation model hierarchy: simulation, sweeps, diagnostics"};
  app.require_subcommand(1);

  unsigned threads = default_threads();
  app.add_option("--threads", threads, "worker pool size for sweeps")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "run one model at one parameter point");
  std::string sim_model = "exact", sim_pulse = "short", sim_out = "out";
  double sim_eps = 0.01, sim_beta = 1.0, sim_x0 = 15.0, sim_dt = 0.0, sim_T = 0.0;
  std::size_t sim_n = 0, sim_snapshots = 100;
  sim->add_option("--model", sim_model, "exact|envelope|fd|nls|improved")
      ->capture_default_str();
  sim->add_option("--pulse", sim_pulse, "short|chirped")->capture_default_str();
  sim->add_option("--eps", sim_eps)->capture_default_str();
  sim->add_option("--beta", sim_beta)->capture_default_str();
  sim->add_option("--x0", sim_x0)->capture_default_str();
  sim->add_option("--N", sim_n, "grid size (0 = automatic)")->capture_default_str();
  sim->add_option("--dt", sim_dt, "time step (0 = automatic)")->capture_default_str();
  sim->add_option("--T", sim_T, "final time (0 = 1/eps)")->capture_default_str();
  sim->add_option("--snapshots", sim_snapshots)->capture_default_str();
  sim->add_option("--out", sim_out, "output directory")->capture_default_str();

  // sweep
  auto* swp = app.add_subcommand("sweep", "error sweep over (eps, beta) points");
  std::string swp_test, swp_pulse = "short", swp_out = "out";
  std::vector<std::string> swp_models;
  std::vector<double> swp_eps, swp_beta;
  experiments::SweepPolicy policy;
  swp->add_option("--test", swp_test, "named plan: short-1|short-2|short-3|chirped-1|chirped-2");
  swp->add_option("--pulse", swp_pulse, "short|chirped (custom plans)")->capture_default_str();
  swp->add_option("--models", swp_models, "subset of fd,nls,improved")->delimiter(',');
  swp->add_option("--eps-list", swp_eps, "eps values (custom plans)")->delimiter(',');
  swp->add_option("--beta-list", swp_beta, "beta values (custom plans)")->delimiter(',');
  swp->add_option("--N-exact", policy.n_exact, "reference grid size (0 = automatic)");
  swp->add_option("--N", policy.n_env, "envelope grid size (0 = automatic)");
  swp->add_option("--dt-exact", policy.dt_exact, "reference step (0 = automatic)");
  swp->add_option("--dt", policy.dt_env, "envelope step (0 = automatic)");
  swp->add_option("--snapshots", policy.snapshots)->capture_default_str();
  swp->add_option("--out", swp_out, "output directory")->capture_default_str();

  // symbols
  auto* sym = app.add_subcommand("symbols", "dispersion symbols and defect table (CSV)");
  double sym_eps = 0.01, sym_kbar = 1.0, sym_v = 1.0, sym_min = -50.0, sym_max = 50.0;
  std::size_t sym_samples = 2001;
  std::string sym_out = "-";
  sym->add_option("--eps", sym_eps)->capture_default_str();
  sym->add_option("--kbar", sym_kbar)->capture_default_str();
  sym->add_option("--v", sym_v)->capture_default_str();
  sym->add_option("--xi-min", sym_min)->capture_default_str();
  sym->add_option("--xi-max", sym_max)->capture_default_str();
  sym->add_option("--samples", sym_samples)->capture_default_str();
  sym->add_option("--out", sym_out, "output file ('-' = stdout)")->capture_default_str();

  // validate
  auto* val = app.add_subcommand("validate", "invariant self-checks (exit 0 when healthy)");
  (void)val;

  for (auto* sub : {sim, swp, sym, val})
    sub->add_option("--config")->description(
        "key=value defaults file (explicit flags override)");

  // Extract --config FILE, then splice the file's key=value pairs in right
  // after the subcommand so explicit flags (parsed last) override them.
  std::vector<std::string> argv;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        std::fprintf(stderr, "--config requires a file argument\n");
        return 1;
      }
      config_path = args[++i];
    } else {
      argv.push_back(args[i]);
    }
  }
  if (!config_path.empty()) {
    try {
      const auto tokens = load_config_tokens(config_path);
      auto at = argv.empty() ? argv.end() : argv.begin() + 1;
      argv.insert(at, tokens.begin(), tokens.end());
    } catch (const std::exception& e) {
      std::fprintf(stderr, "%s\n", e.what());
      return 1;
    }
  }

  // later occurrences (explicit flags) win over config-file values
  for (auto* sub : {sim, swp, sym})
    for (auto* opt : sub->get_options())
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  for (auto* opt : app.get_options())
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::reverse(argv.begin(), argv.end());  // CLI11 consumes reversed args

  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(sim_model, sim_pulse, sim_eps, sim_beta, sim_x0, sim_n, sim_dt,
                          sim_T, sim_snapshots, sim_out);
    if (swp->parsed())
      return cmd_sweep(swp_test, swp_pulse, swp_models, swp_eps, swp_beta, policy,
                       threads, swp_out);
    if (sym->parsed())
      return cmd_symbols(sym_eps, sym_kbar, sym_v, sym_min, sym_max, sym_samples, sym_out);
    if (val->parsed()) return cmd_validate(threads);
  } catch (const models::NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure at t=%g: %s\n", e.time(), e.what());
    return 2;
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid parameters: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}

}  // namespace pulseprop::cli
