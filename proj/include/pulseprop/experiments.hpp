#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pulseprop/models.hpp"
#include "pulseprop/pulses.hpp"

// The quantitative comparison harness: the relative sup-norm error metric
// between an exact trajectory and a reconstructed envelope-model trajectory,
// parameter sweeps with one shared exact reference per (eps, beta) point,
// snapshot comparisons, and the self-check suite behind `validate`.

namespace pulseprop::experiments {

// Running sup over sample times of
//   max_x |f_exact - (env e^{i(kbar x - omega t)/eps} + c.c.)| / max_x |f_exact|,
// with both fields interpolated onto a carrier-resolving comparison grid.
// Sample times where the denominator degenerates (< 1e-12) are skipped with
// a warning.
class SupErrorAccumulator {
 public:
  SupErrorAccumulator(const models::Trajectory* exact, double eps,
                      dispersion::CarrierPoint carrier, std::size_t n_compare);

  void add(std::size_t index, double t, const spectral::Field& envelope_spectral);
  double value() const { return sup_; }

 private:
  const models::Trajectory* exact_;
  double eps_;
  dispersion::CarrierPoint carrier_;
  std::size_t n_compare_;
  double sup_ = 0.0;
};

// Sup-metric between two stored trajectories sampled at the same times.
double error_metric(const models::Trajectory& exact, const models::Trajectory& approx,
                    double eps, const dispersion::CarrierPoint& carrier,
                    std::size_t n_compare = 0);

// Comparison grid fine enough for ~16 nodes per carrier oscillation.
std::size_t auto_compare_size(double eps, double length, std::size_t at_least);

// Resolution / step-size policy for sweep points; zeros mean automatic
// choices (bandwidth-aware grids, fixed exact step, pulse-dependent
// envelope step).
struct SweepPolicy {
  std::size_t n_exact = 0;
  std::size_t n_env = 0;
  double dt_exact = 0;
  double dt_env = 0;
  std::size_t snapshots = 100;
};

std::size_t auto_exact_size(double eps, double beta, pulses::PulseKind kind, double length);
std::size_t auto_envelope_size(double beta, pulses::PulseKind kind, double length);
double auto_envelope_dt(double beta, pulses::PulseKind kind);

struct SweepPlan {
  pulses::PulseKind pulse = pulses::PulseKind::Short;
  std::vector<models::ModelKind> model_list = {models::ModelKind::FullDispersion,
                                               models::ModelKind::NLS,
                                               models::ModelKind::ImprovedNLS};
  std::vector<double> eps_values = {0.01};
  std::vector<double> beta_values = {1.0};
  double length = 30.0 * 3.14159265358979323846;
  double x0 = 15.0;
  std::string profile = "gaussian";
  SweepPolicy policy;
  std::string name = "custom";

  void validate() const;  // ranges: eps in [0.001, 0.1], beta in [0.01, 1]
};

// Named plans reproducing the published comparisons.
SweepPlan named_plan(const std::string& name);
std::vector<std::string> named_plan_names();

struct SweepRecord {
  std::string model;
  double eps = 0;
  double beta = 0;
  double error = 0;  // NaN when the point failed
  std::size_t n = 0;
  double dt = 0;
  double runtime_s = 0;
  std::string message;  // nonempty on failure
};

inline constexpr const char* kSweepCsvHeader = "model,epsilon,beta,error,N,dt,runtime_s";
std::string sweep_record_csv(const SweepRecord& r);

// Executes the plan on a bounded worker pool (one (eps, beta) point per
// work item; the exact reference is shared by the models at that point).
// Records are appended to the CSV in plan order as points complete.
std::vector<SweepRecord> run_sweep(const SweepPlan& plan, unsigned threads,
                                   const std::optional<std::filesystem::path>& out_csv = {},
                                   const std::function<void(const std::string&)>& log = {});

struct SnapshotComparison {
  double linf_exact = 0;
  // max |difference| for fd, nls, improved, in model-list order
  std::vector<double> linf_diff;
  std::vector<std::string> model_names;
  std::filesystem::path csv_path;
};

// Exact solution and per-model difference fields at time T, written as CSV
// columns x,exact,diff_<model>...
SnapshotComparison snapshot_compare(double eps, double beta, double T,
                                    pulses::PulseKind kind,
                                    const std::filesystem::path& out_dir,
                                    const SweepPolicy& policy = {},
                                    const std::string& profile = "gaussian");

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Fast invariant suite: oracles, coefficient identities, transform
// contracts, conservation, splitting order, step-halving self-check.
std::vector<CheckResult> run_validation(unsigned threads);

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace pulseprop::experiments
