#include "serw/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "serw/rng.hpp"
#include "serw/walk.hpp"

namespace serw {

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr std::int64_t kBlockWalkers = 64;

struct Accumulator {
  std::vector<u128> sum2;  // sum of |S_n|^2 per checkpoint
  std::vector<u128> sum4;  // sum of |S_n|^4 per checkpoint
  std::vector<std::int64_t> tau_counts;
  std::int64_t beyond = 0;
  std::int64_t censored = 0;

  Accumulator(std::size_t n_checkpoints, std::int64_t bins)
      : sum2(n_checkpoints), sum4(n_checkpoints), tau_counts(static_cast<std::size_t>(bins)) {}

  void merge(const Accumulator& o) {
    for (std::size_t i = 0; i < sum2.size(); ++i) {
      sum2[i] += o.sum2[i];
      sum4[i] += o.sum4[i];
    }
    for (std::size_t i = 0; i < tau_counts.size(); ++i) tau_counts[i] += o.tau_counts[i];
    beyond += o.beyond;
    censored += o.censored;
  }
};

// Kernel policies: each returns the move for the step leaving `state`.

// None / Deterministic: p_m depends on m only, so it is tabulated once per
// ensemble with the same continue_probability() the step function uses.
class TabulatedKernel {
 public:
  TabulatedKernel(const ModelSpec& model, std::int64_t n_steps)
      : keep_(static_cast<std::size_t>(n_steps) + 1) {
    for (std::int64_t m = 1; m <= n_steps; ++m)
      keep_[m] = continue_probability(m, model.dimension, model.delta);
  }
  int operator()(const WalkState& state, const StepDraw& draw) const noexcept {
    const double keep = state.back_move() < 0 ? 0.0 : keep_[state.m()];
    return choose_move(state, keep, draw.move);
  }

 private:
  std::vector<double> keep_;
};

class GeneralKernel {
 public:
  explicit GeneralKernel(const ModelSpec& model) : model_(model) {}
  int operator()(const WalkState& state, const StepDraw& draw) const {
    return choose_move(state, step_continue_probability(state, model_, draw), draw.move);
  }

 private:
  const ModelSpec& model_;
};

class SimpleKernel {
 public:
  explicit SimpleKernel(int dimension) : n_moves_(2 * dimension) {}
  int operator()(const WalkState&, const StepDraw& draw) const noexcept {
    return std::min(static_cast<int>(draw.move * n_moves_), n_moves_ - 1);
  }

 private:
  int n_moves_;
};

// Runs one walker to max(last checkpoint, first escape) or n_steps.
// `visit(n, state)` runs after every step and returns false to stop early.
template <class Kernel, class Visit>
std::int64_t run_walker(const Kernel& kernel, const EnsembleConfig& cfg, std::uint64_t walker,
                        std::int64_t horizon, Visit&& visit) {
  WalkState state = WalkState::origin(cfg.model.dimension);
  BufferedWalkerStream rng(cfg.master_seed, walker);
  std::int64_t tau = 0;  // 0 while still on the first edge
  for (std::int64_t n = 1; n <= cfg.n_steps; ++n) {
    state.apply(kernel(state, rng.next_draw()));
    if (tau == 0 && n > 1 && state.m() == 1) tau = n - 1;
    visit(n, state);
    if (n >= horizon && tau != 0) break;
  }
  return tau;
}

template <class Kernel>
void simulate_walker(const Kernel& kernel, const EnsembleConfig& cfg,
                     const std::vector<std::int64_t>& checkpoints, std::uint64_t walker,
                     Accumulator& acc) {
  std::size_t next_cp = 0;
  const std::int64_t horizon = checkpoints.empty() ? 0 : checkpoints.back();
  const std::int64_t tau = run_walker(kernel, cfg, walker, horizon,
                                      [&](std::int64_t n, const WalkState& state) {
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == n) {
      const auto sq = static_cast<u128>(state.squared_norm());
      acc.sum2[next_cp] += sq;
      acc.sum4[next_cp] += sq * sq;
      ++next_cp;
    }
  });
  if (tau == 0) ++acc.censored;
  else if (tau <= static_cast<std::int64_t>(acc.tau_counts.size())) ++acc.tau_counts[tau - 1];
  else ++acc.beyond;
}

template <class Fn>
decltype(auto) with_kernel(const EnsembleConfig& cfg, Fn&& fn) {
  if (cfg.kernel == KernelOverride::SimpleRandomWalk) return fn(SimpleKernel(cfg.model.dimension));
  if (!cfg.model.stochastic()) return fn(TabulatedKernel(cfg.model, cfg.n_steps));
  return fn(GeneralKernel(cfg.model));
}

long double to_long_double(u128 x) { return static_cast<long double>(x); }

}  // namespace

void EnsembleConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
  if (n_walkers < 1) throw ConfigError("n_walkers must be >= 1");
  if (tau_bins < 1) throw ConfigError("tau_bins must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > n_steps)
      throw ConfigError("checkpoint " + std::to_string(checkpoints[i]) +
                        " outside [1, n_steps = " + std::to_string(n_steps) + "]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw ConfigError("checkpoints must be strictly increasing");
  }
}

std::vector<std::int64_t> EnsembleConfig::effective_checkpoints() const {
  return checkpoints.empty() ? power_of_two_checkpoints(n_steps) : checkpoints;
}

std::vector<std::int64_t> power_of_two_checkpoints(std::int64_t n_steps) {
  std::vector<std::int64_t> out;
  for (std::int64_t p = 1; p <= n_steps; p *= 2) {
    out.push_back(p);
    if (p > n_steps / 2) break;
  }
  if (out.empty() || out.back() != n_steps) out.push_back(n_steps);
  return out;
}

std::vector<std::int64_t> log_checkpoints(std::int64_t n_steps, int per_decade) {
  if (per_decade < 1) throw ConfigError("log_checkpoints: per_decade must be >= 1");
  std::vector<std::int64_t> out;
  for (int i = 0;; ++i) {
    const auto n = std::llround(std::pow(10.0, static_cast<double>(i) / per_decade));
    if (n > n_steps) break;
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  if (out.empty() || out.back() != n_steps) out.push_back(n_steps);
  return out;
}

std::vector<std::int64_t> linear_checkpoints(std::int64_t n_steps, std::int64_t stride) {
  if (stride < 1) throw ConfigError("linear_checkpoints: stride must be >= 1");
  std::vector<std::int64_t> out;
  for (std::int64_t n = stride; n <= n_steps; n += stride) out.push_back(n);
  if (out.empty() || out.back() != n_steps) out.push_back(n_steps);
  return out;
}

double TauHistogram::survival(std::int64_t n) const {
  if (n < 1 || n > static_cast<std::int64_t>(counts.size()) + 1)
    throw std::out_of_range("TauHistogram::survival: n outside the resolved range");
  if (total == 0) return 0.0;
  std::int64_t below = 0;
  for (std::int64_t k = 1; k < n; ++k) below += counts[k - 1];
  return static_cast<double>(total - below) / static_cast<double>(total);
}

EnsembleResult run_ensemble(const EnsembleConfig& cfg, const ProgressCallback& progress) {
  cfg.validate();
  const auto checkpoints = cfg.effective_checkpoints();
  const int threads =
      cfg.threads > 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  const std::int64_t n_blocks = (cfg.n_walkers + kBlockWalkers - 1) / kBlockWalkers;

  Accumulator total(checkpoints.size(), cfg.tau_bins);
  std::mutex merge_mutex;
  std::mutex progress_mutex;
  std::atomic<std::int64_t> next_block{0};
  std::atomic<std::int64_t> finished{0};

  // Integer sums commute, so dynamic block scheduling cannot change results.
  auto worker = [&](const auto& kernel) {
    Accumulator local(checkpoints.size(), cfg.tau_bins);
    for (;;) {
      const std::int64_t block = next_block.fetch_add(1);
      if (block >= n_blocks) break;
      const std::int64_t begin = block * kBlockWalkers;
      const std::int64_t end = std::min(begin + kBlockWalkers, cfg.n_walkers);
      for (std::int64_t w = begin; w < end; ++w)
        simulate_walker(kernel, cfg, checkpoints, static_cast<std::uint64_t>(w), local);
      const std::int64_t done = finished.fetch_add(end - begin) + (end - begin);
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(done, cfg.n_walkers);
      }
    }
    std::lock_guard lock(merge_mutex);
    total.merge(local);
  };

  with_kernel(cfg, [&](const auto& kernel) {
    if (threads == 1) {
      worker(kernel);
      return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back([&] { worker(kernel); });
  });

  EnsembleResult out;
  const auto w = static_cast<long double>(cfg.n_walkers);
  out.msd.points.reserve(checkpoints.size());
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const long double s2 = to_long_double(total.sum2[i]);
    const long double s4 = to_long_double(total.sum4[i]);
    const long double mean = s2 / w;
    long double se = 0.0L;
    if (cfg.n_walkers > 1) {
      const long double var = std::max((s4 - s2 * mean) / (w - 1.0L), 0.0L);
      se = std::sqrt(var / w);
    }
    out.msd.points.push_back({checkpoints[i], static_cast<double>(mean), static_cast<double>(se),
                              cfg.n_walkers});
  }
  out.tau.counts = std::move(total.tau_counts);
  out.tau.beyond = total.beyond;
  out.tau.censored = total.censored;
  out.tau.total = cfg.n_walkers;
  return out;
}

std::vector<WalkState> trace_walker(const EnsembleConfig& cfg, std::uint64_t walker) {
  cfg.validate();
  std::vector<WalkState> trace;
  trace.reserve(static_cast<std::size_t>(cfg.n_steps) + 1);
  trace.push_back(WalkState::origin(cfg.model.dimension));
  with_kernel(cfg, [&](const auto& kernel) {
    run_walker(kernel, cfg, walker, cfg.n_steps,
               [&](std::int64_t, const WalkState& state) { trace.push_back(state); });
  });
  return trace;
}

NuEstimate nu_estimate(const MsdCurve& curve, double window) {
  if (!(window > 0.0 && window <= 1.0)) throw EstimatorError("nu_estimate: window must lie in (0, 1]");
  if (curve.points.empty()) throw EstimatorError("nu_estimate: empty curve");
  const double n_last = static_cast<double>(curve.points.back().step);
  const double start = (1.0 - window) * n_last;

  std::vector<const MsdPoint*> used;
  bool any_zero_se = false;
  for (const auto& p : curve.points) {
    if (static_cast<double>(p.step) < start) continue;
    used.push_back(&p);
    any_zero_se = any_zero_se || !(p.standard_error > 0.0);
  }
  if (used.size() < 3)
    throw EstimatorError("nu_estimate: need >= 3 checkpoints in the trailing window, have " +
                         std::to_string(used.size()));

  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto* p : used) {
    const double wgt = any_zero_se ? 1.0 : 1.0 / (p->standard_error * p->standard_error);
    const double x = static_cast<double>(p->step);
    sw += wgt;
    sx += wgt * x;
    sy += wgt * p->mean;
    sxx += wgt * x * x;
    sxy += wgt * x * p->mean;
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw EstimatorError("nu_estimate: degenerate checkpoint set");

  NuEstimate out;
  out.slope = (sw * sxy - sx * sy) / det;
  if (any_zero_se) {
    // Residual-based error for unweighted data.
    const double intercept = (sy - out.slope * sx) / sw;
    double rss = 0.0;
    for (const auto* p : used) {
      const double r = p->mean - intercept - out.slope * static_cast<double>(p->step);
      rss += r * r;
    }
    const double dof = static_cast<double>(used.size()) - 2.0;
    out.standard_error = std::sqrt(rss / dof * sw / det);
  } else {
    out.standard_error = std::sqrt(sw / det);
  }
  out.ci_low = out.slope - 1.96 * out.standard_error;
  out.ci_high = out.slope + 1.96 * out.standard_error;
  out.points_used = static_cast<std::int64_t>(used.size());
  return out;
}

std::vector<ProbePoint> rescale_subdiffusive(const MsdCurve& curve) {
  std::vector<ProbePoint> out;
  for (const auto& p : curve.points) {
    if (p.step < 2) continue;
    const double n = static_cast<double>(p.step);
    const double f = std::log(n) / n;
    out.push_back({p.step, f * p.mean, f * p.standard_error});
  }
  return out;
}

std::vector<ProbePoint> subdiffusion_probe(EnsembleConfig cfg, const ProgressCallback& progress) {
  if (cfg.model.dimension != 1 || cfg.model.perturbation != Perturbation::None)
    throw ConfigError("subdiffusion_probe: requires d = 1 and no perturbation");
  if (cfg.checkpoints.empty()) cfg.checkpoints = log_checkpoints(cfg.n_steps, 4);
  return rescale_subdiffusive(run_ensemble(cfg, progress).msd);
}

double subdiffusion_limit() {
  const double ln2 = std::numbers::ln2;
  return (1.0 - ln2) / (2.0 * ln2 - 1.0);
}

}  // namespace serw
