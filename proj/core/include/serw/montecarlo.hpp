#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "serw/model.hpp"
#include "serw/walk.hpp"

namespace serw {

/// Bad ensemble or estimator configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Too little data for an estimator.
class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Test hook: replace the SeRW kernel by the simple symmetric walk.
enum class KernelOverride { None, SimpleRandomWalk };

struct EnsembleConfig {
  ModelSpec model;
  std::int64_t n_steps = 1024;
  std::int64_t n_walkers = 1000;
  /// Sorted, unique, within [1, n_steps]. Empty means powers of two.
  std::vector<std::int64_t> checkpoints;
  std::uint64_t master_seed = 0;
  /// Histogram resolves tau = 1 .. tau_bins individually.
  std::int64_t tau_bins = 64;
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  int threads = 1;
  KernelOverride kernel = KernelOverride::None;

  /// Throws ConfigError.
  void validate() const;
  std::vector<std::int64_t> effective_checkpoints() const;
};

/// Powers of two up to n_steps, plus n_steps itself.
std::vector<std::int64_t> power_of_two_checkpoints(std::int64_t n_steps);
/// round(10^(i / per_decade)) for i >= 0, deduplicated, plus n_steps.
std::vector<std::int64_t> log_checkpoints(std::int64_t n_steps, int per_decade);
/// stride, 2 stride, ... up to n_steps, plus n_steps.
std::vector<std::int64_t> linear_checkpoints(std::int64_t n_steps, std::int64_t stride);

struct MsdPoint {
  std::int64_t step = 0;
  double mean = 0.0;            // E|S_n|^2 in lattice units^2
  double standard_error = 0.0;  // of the mean
  std::int64_t n_walkers = 0;
};

struct MsdCurve {
  std::vector<MsdPoint> points;
};

/// Empirical law of tau. Walkers still on their first edge at n_steps are
/// censored; finished walkers with tau > bins go to `beyond`.
struct TauHistogram {
  std::vector<std::int64_t> counts;  // counts[n-1] = #{tau = n}
  std::int64_t beyond = 0;
  std::int64_t censored = 0;
  std::int64_t total = 0;

  /// Fraction of walkers with tau >= n, for 1 <= n <= counts.size() + 1.
  double survival(std::int64_t n) const;
};

struct EnsembleResult {
  MsdCurve msd;
  TauHistogram tau;
};

/// Called with (walkers finished, walkers total); may run on any worker
/// thread but never concurrently with itself.
using ProgressCallback = std::function<void(std::int64_t, std::int64_t)>;

/// Simulates the ensemble. Walker w reads Philox blocks (w, 0), (w, 1), ...
/// keyed by master_seed, and per-checkpoint sums are accumulated as exact
/// integers, so the result is bit-identical for any thread count.
EnsembleResult run_ensemble(const EnsembleConfig& cfg, const ProgressCallback& progress = {});

/// States S_0 .. S_{n_steps} of one walker of the ensemble, produced by the
/// same loop as run_ensemble.
std::vector<WalkState> trace_walker(const EnsembleConfig& cfg, std::uint64_t walker);

struct NuEstimate {
  double slope = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;   // slope -/+ 1.96 standard errors
  double ci_high = 0.0;
  std::int64_t points_used = 0;
};

/// Weighted least-squares slope of E|S_n|^2 against n (with intercept) over
/// checkpoints n >= (1 - window) * n_last. Weights are 1/SE^2, or uniform if
/// any SE is zero. Checkpoints share walkers, so the reported error ignores
/// their correlation.
NuEstimate nu_estimate(const MsdCurve& curve, double window = 0.5);

struct ProbePoint {
  std::int64_t step = 0;
  double value = 0.0;  // (log n / n) E|S_n|^2
  double standard_error = 0.0;
};

/// (log n / n) E|S_n|^2 for every checkpoint n >= 2.
std::vector<ProbePoint> rescale_subdiffusive(const MsdCurve& curve);

/// Runs an unperturbed d = 1 ensemble (quarter-decade checkpoints when none
/// are given) and rescales it. Throws ConfigError for any other model.
std::vector<ProbePoint> subdiffusion_probe(EnsembleConfig cfg,
                                           const ProgressCallback& progress = {});

/// (1 - log 2) / (2 log 2 - 1), the limit of the probe.
double subdiffusion_limit();

}  // namespace serw
