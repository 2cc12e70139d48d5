#include "serw/scaling.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace serw {

namespace {

constexpr std::size_t kMinFitPoints = 5;

struct Data {
  std::vector<double> delta;
  std::vector<double> nu;
};

struct LinearFit {
  double nu0 = 0.0;
  double c = 0.0;
  double objective = 0.0;  // sum of squared relative residuals
};

// One fit for a fixed basis vector g. With nu0 known, minimise
// sum ((y - c g) / y)^2, y = nu - nu0; otherwise minimise
// sum ((nu - nu0 - c g) / nu)^2 over (nu0, c).
LinearFit solve(const Data& data, const std::vector<double>& g, std::optional<double> nu0,
                std::size_t skip) {
  const std::size_t n = data.nu.size();
  LinearFit fit;
  if (nu0) {
    double sgg = 0, sg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == skip) continue;
      const double y = data.nu[i] - *nu0;
      if (y == 0.0) throw FitError("fit: nu - nu0 vanishes at delta = " + std::to_string(data.delta[i]));
      const double r = g[i] / y;
      sgg += r * r;
      sg += r;
    }
    if (!(sgg > 0.0)) throw FitError("fit: degenerate design (basis vanishes)");
    fit.nu0 = *nu0;
    fit.c = sg / sgg;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == skip) continue;
      const double y = data.nu[i] - *nu0;
      const double r = (y - fit.c * g[i]) / y;
      fit.objective += r * r;
    }
    return fit;
  }

  // Weighted 2x2 normal equations with weights 1/nu^2.
  double s11 = 0, s1g = 0, sgg = 0, s1y = 0, sgy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == skip) continue;
    if (data.nu[i] == 0.0) throw FitError("fit: nu vanishes at delta = " + std::to_string(data.delta[i]));
    const double w = 1.0 / (data.nu[i] * data.nu[i]);
    s11 += w;
    s1g += w * g[i];
    sgg += w * g[i] * g[i];
    s1y += w * data.nu[i];
    sgy += w * g[i] * data.nu[i];
  }
  const double det = s11 * sgg - s1g * s1g;
  if (!(std::abs(det) > 1e-14 * s11 * sgg)) throw FitError("fit: degenerate design matrix");
  fit.nu0 = (sgg * s1y - s1g * sgy) / det;
  fit.c = (s11 * sgy - s1g * s1y) / det;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == skip) continue;
    const double r = (data.nu[i] - fit.nu0 - fit.c * g[i]) / data.nu[i];
    fit.objective += r * r;
  }
  return fit;
}

std::vector<double> basis_vector(ScalingFamily family, const Data& data, double j) {
  std::vector<double> g(data.delta.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = family_basis(family, data.delta[i], j);
  return g;
}

struct FullFit {
  LinearFit linear;
  double j = 0.0;
};

FullFit fit_once(ScalingFamily family, const Data& data, std::optional<double> nu0,
                 std::size_t skip) {
  if (family != ScalingFamily::OffsetPower) return {solve(data, basis_vector(family, data, 0.0), nu0, skip), 0.0};

  auto objective = [&](double j) { return solve(data, basis_vector(family, data, j), nu0, skip).objective; };
  // Coarse scan, then Brent on the bracketing cell.
  constexpr int kScan = 99;
  double best_j = 0.5;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= kScan; ++i) {
    const double j = static_cast<double>(i) / (kScan + 1);
    const double v = objective(j);
    if (v < best) {
      best = v;
      best_j = j;
    }
  }
  const double lo = std::max(best_j - 1.0 / (kScan + 1), 1e-6);
  const double hi = std::min(best_j + 1.0 / (kScan + 1), 1.0 - 1e-6);
  const auto [j, value] = boost::math::tools::brent_find_minima(objective, lo, hi, 40);
  (void)value;
  return {solve(data, basis_vector(family, data, j), nu0, skip), j};
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::vector<double> log_grid(double hi, double lo, int points) {
  if (!(hi > lo && lo > 0.0)) throw std::invalid_argument("log_grid: need hi > lo > 0");
  if (points < 2) throw std::invalid_argument("log_grid: need at least 2 points");
  std::vector<double> out(static_cast<std::size_t>(points));
  const double a = std::log10(hi);
  const double b = std::log10(lo);
  for (int i = 0; i < points; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (points - 1));
  out.front() = hi;
  out.back() = lo;
  return out;
}

bool SweepResult::all_converged() const noexcept {
  return std::all_of(points.begin(), points.end(), [](const SweepPoint& p) {
    return p.status == SeriesStatus::Converged;
  });
}

SweepResult sweep_nu(const ModelSpec& model_template, const std::vector<double>& grid, int threads,
                     const SeriesOptions& opts, const SweepCallback& on_point) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("sweep_nu: grid values must be positive");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      throw std::invalid_argument("sweep_nu: grid must be strictly decreasing");
  }
  ModelSpec base = model_template;
  if (base.perturbation == Perturbation::None) base.perturbation = Perturbation::Deterministic;

  SweepResult out;
  out.model = base.describe_kernel();
  out.points.resize(grid.size());

  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) break;
      const TauLaw law(base.with_delta(grid[i]));
      const DiffusionConstant dc = diffusion_constant(law, opts);
      SweepPoint& p = out.points[i];
      p.delta = grid[i];
      p.nu = dc.nu.value;
      p.truncation_bound = dc.nu.truncation_bound;
      p.mean_tau = dc.summary.mean.value;
      p.terms_used = dc.summary.terms_used;
      p.status = dc.nu.status;
      if (on_point) {
        std::lock_guard lock(callback_mutex);
        on_point(i, p);
      }
    }
  };
  const int n_threads = std::clamp(threads, 1, std::max(1, static_cast<int>(grid.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return out;
}

double analytic_nu0(int dimension, const SeriesOptions& opts) {
  if (dimension == 1) return 0.0;
  const TauLaw law(ModelSpec::unperturbed(dimension));
  return diffusion_constant(law, opts).nu.value;
}

std::string_view to_string(ScalingFamily f) {
  switch (f) {
    case ScalingFamily::InvLog: return "INV_LOG";
    case ScalingFamily::InvLogLog: return "INV_LOGLOG";
    case ScalingFamily::OffsetLinear: return "OFFSET_LINEAR";
    case ScalingFamily::OffsetDeltaLog: return "OFFSET_DELTA_LOG";
    case ScalingFamily::OffsetPower: return "OFFSET_POWER";
    case ScalingFamily::OffsetInvLog2: return "OFFSET_INV_LOG2";
  }
  return "UNKNOWN";
}

std::optional<ScalingFamily> parse_scaling_family(std::string_view name) {
  for (auto f : kAllFamilies)
    if (to_string(f) == name) return f;
  return std::nullopt;
}

bool has_offset(ScalingFamily f) noexcept {
  return f != ScalingFamily::InvLog && f != ScalingFamily::InvLogLog;
}

double family_basis(ScalingFamily f, double delta, double j) {
  if (!(delta > 0.0 && delta < 1.0)) throw FitError("family_basis: delta must lie in (0, 1)");
  const double l = -std::log(delta);
  switch (f) {
    case ScalingFamily::InvLog: return 1.0 / l;
    case ScalingFamily::InvLogLog:
      if (!(l > 1.0)) throw FitError("family_basis: INV_LOGLOG needs delta < 1/e");
      return 1.0 / std::log(l);
    case ScalingFamily::OffsetLinear: return delta;
    case ScalingFamily::OffsetDeltaLog: return delta * l;
    case ScalingFamily::OffsetPower: return std::pow(delta, j);
    case ScalingFamily::OffsetInvLog2: return 1.0 / (l * l);
  }
  return 0.0;
}

double ScalingFit::predict(double delta) const {
  return (has_offset(family) ? nu0 : 0.0) + c * family_basis(family, delta, j);
}

ScalingFit fit_scaling(const SweepResult& sweep, ScalingFamily family, const FitOptions& opts) {
  if (sweep.points.size() < kMinFitPoints)
    throw FitError("fit_scaling: need at least 5 points, have " + std::to_string(sweep.points.size()));
  Data data;
  for (const auto& p : sweep.points) {
    data.delta.push_back(p.delta);
    data.nu.push_back(p.nu);
  }
  const std::size_t n = data.nu.size();
  const std::optional<double> nu0 = has_offset(family) ? opts.nu0 : std::optional<double>(0.0);
  const std::size_t none = n;

  const FullFit full = fit_once(family, data, nu0, none);
  ScalingFit out;
  out.family = family;
  out.nu0 = full.linear.nu0;
  out.c = full.linear.c;
  out.j = full.j;
  out.nu0_fitted = !nu0.has_value();
  out.points = static_cast<std::int64_t>(n);

  std::vector<double> abs_res(n), rel_res(n), cv_res(n), nus(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = nu0 ? data.nu[i] - *nu0 : data.nu[i];
    const double r = data.nu[i] - out.predict(data.delta[i]);
    abs_res[i] = r;
    rel_res[i] = r / scale;
    nus[i] = data.nu[i];

    const FullFit loo = fit_once(family, data, nu0, i);
    ScalingFit held = out;
    held.nu0 = loo.linear.nu0;
    held.c = loo.linear.c;
    held.j = loo.j;
    cv_res[i] = (data.nu[i] - held.predict(data.delta[i])) / scale;
  }
  out.rms_residual = rms(abs_res);
  out.normalized_residual = out.rms_residual / rms(nus);
  out.relative_residual = rms(rel_res);
  out.cv_residual = rms(cv_res);
  return out;
}

std::vector<ScalingFit> rank_families(const SweepResult& sweep, const FitOptions& opts) {
  std::vector<ScalingFit> fits;
  for (auto f : kAllFamilies) fits.push_back(fit_scaling(sweep, f, opts));
  std::stable_sort(fits.begin(), fits.end(), [](const ScalingFit& a, const ScalingFit& b) {
    return a.cv_residual < b.cv_residual;
  });
  return fits;
}

std::vector<PlotRow> plot_data(const SweepResult& sweep, const ScalingFit& fit) {
  std::vector<PlotRow> rows;
  rows.reserve(sweep.points.size());
  for (const auto& p : sweep.points)
    rows.push_back({p.delta, family_basis(fit.family, p.delta, fit.j), p.nu, fit.predict(p.delta)});
  return rows;
}

}  // namespace serw
