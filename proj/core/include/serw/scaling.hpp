#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "serw/model.hpp"
#include "serw/tau.hpp"

namespace serw {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `points` values from hi down to lo, evenly spaced in log delta.
std::vector<double> log_grid(double hi, double lo, int points);

struct SweepPoint {
  double delta = 0.0;
  double nu = 0.0;
  double truncation_bound = 0.0;
  double mean_tau = 0.0;
  std::int64_t terms_used = 0;
  SeriesStatus status = SeriesStatus::Converged;
};

struct SweepResult {
  std::string model;  // ModelSpec::describe_kernel() of the swept model
  std::vector<SweepPoint> points;

  bool all_converged() const noexcept;
};

/// Called after each finished grid point with (index, point).
using SweepCallback = std::function<void(std::size_t, const SweepPoint&)>;

/// nu(delta) for each grid value (strictly decreasing, all positive), with the
/// model template's dimension, perturbation kind and tail. Points are
/// evaluated on `threads` workers and returned in grid order. Non-converged
/// points are kept and flagged through their status.
SweepResult sweep_nu(const ModelSpec& model_template, const std::vector<double>& grid,
                     int threads = 1, const SeriesOptions& opts = {},
                     const SweepCallback& on_point = {});

/// nu at delta = 0 for the template's dimension: 0 in d = 1 (sub-diffusive).
double analytic_nu0(int dimension, const SeriesOptions& opts = {});

enum class ScalingFamily {
  InvLog,          // c / |log delta|
  InvLogLog,       // c / log|log delta|
  OffsetLinear,    // nu0 + c delta
  OffsetDeltaLog,  // nu0 + c delta |log delta|
  OffsetPower,     // nu0 + c delta^j
  OffsetInvLog2,   // nu0 + c / log^2 delta
};

inline constexpr ScalingFamily kAllFamilies[] = {
    ScalingFamily::InvLog,         ScalingFamily::InvLogLog,   ScalingFamily::OffsetLinear,
    ScalingFamily::OffsetDeltaLog, ScalingFamily::OffsetPower, ScalingFamily::OffsetInvLog2};

std::string_view to_string(ScalingFamily f);
std::optional<ScalingFamily> parse_scaling_family(std::string_view name);
bool has_offset(ScalingFamily f) noexcept;

/// The family's shape g(delta), so that nu = nu0 + c g(delta).
double family_basis(ScalingFamily f, double delta, double j = 0.5);

struct FitOptions {
  /// Offset for the OFFSET families. Fitted when absent.
  std::optional<double> nu0;
};

struct ScalingFit {
  ScalingFamily family = ScalingFamily::InvLog;
  double nu0 = 0.0;
  double c = 0.0;
  double j = 0.0;  // OffsetPower only
  bool nu0_fitted = false;
  std::int64_t points = 0;
  /// RMS of nu - prediction.
  double rms_residual = 0.0;
  /// rms_residual divided by the RMS of nu.
  double normalized_residual = 0.0;
  /// RMS of the residuals relative to the fitted excess nu - nu0 (or to nu
  /// when nu0 is fitted); this is what the fit minimises.
  double relative_residual = 0.0;
  /// Leave-one-out version of relative_residual.
  double cv_residual = 0.0;

  double predict(double delta) const;
};

/// Weighted least squares of nu - nu0 = c g(delta) with relative weights.
/// OffsetPower scans j over (0, 1) and polishes with Brent's method. Needs at
/// least 5 points; throws FitError on a degenerate design.
ScalingFit fit_scaling(const SweepResult& sweep, ScalingFamily family, const FitOptions& opts = {});

/// Fits every family and sorts by leave-one-out residual, best first.
std::vector<ScalingFit> rank_families(const SweepResult& sweep, const FitOptions& opts = {});

struct PlotRow {
  double delta = 0.0;
  double x = 0.0;  // family_basis(delta)
  double nu = 0.0;
  double fitted = 0.0;
};

/// Rows where nu against x is a straight line if the family is right.
std::vector<PlotRow> plot_data(const SweepResult& sweep, const ScalingFit& fit);

}  // namespace serw
