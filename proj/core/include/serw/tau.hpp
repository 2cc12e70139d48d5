#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <string_view>
#include <vector>

#include "serw/model.hpp"

namespace serw {

enum class SeriesStatus {
  Converged,       // truncation bound below tolerance
  Diverges,        // the series is known or detected to grow without bound
  TermCapReached,  // gave up at max_terms; bound may exceed tolerance
};

std::string_view to_string(SeriesStatus s);

/// A truncated infinite sum. The true sum lies in
/// [value - truncation_bound, value + truncation_bound].
struct SeriesValue {
  double value = 0.0;
  double truncation_bound = 0.0;
  std::int64_t terms_used = 0;
  SeriesStatus status = SeriesStatus::Converged;

  bool converged() const noexcept { return status == SeriesStatus::Converged; }
};

struct SeriesOptions {
  /// Absolute target for every reported truncation bound.
  double tolerance = 1e-10;
  /// Hard cap on summed terms. The deterministic d=1 series needs about
  /// 20/delta terms, so delta = 1e-8 takes ~2e9.
  std::int64_t max_terms = 20'000'000'000;
  /// Terms summed before a series with no uniform escape is declared
  /// divergent (only relevant to d=1 with delta = 0).
  std::int64_t divergence_probe_terms = 1'000'000;
};

/// p_k: probability of re-traversing the current edge at consecutive count
/// k >= 1. For stochastic models this is the integral of (a - delta x) f(x)
/// over [0, U], i.e. a F(U) - delta M(U), with a = (1+k)/(2d+k), U = a/delta.
double continue_prob(std::int64_t k, const ModelSpec& model);

/// 1 - p_k evaluated on its own route (no cancellation when p_k ~ 1).
double escape_prob(std::int64_t k, const ModelSpec& model);

/// Upper bound on p_k over all k >= n.
double continue_prob_sup(std::int64_t n, const ModelSpec& model);

/// Law of tau, the number of traversals of the first edge before leaving it.
/// survival(n) = P(tau >= n) = prod_{m=1}^{n-1} p_m.
///
/// The memo of survival values is filled lazily under a mutex, so one
/// instance can be shared by several threads.
class TauLaw {
 public:
  explicit TauLaw(ModelSpec model);

  const ModelSpec& model() const noexcept { return model_; }

  double continue_prob(std::int64_t k) const;
  double survival(std::int64_t n) const;
  double pmf(std::int64_t n) const;

  /// survival(1..n_max) in one pass.
  std::vector<double> survival_table(std::int64_t n_max) const;

 private:
  ModelSpec model_;
  mutable std::mutex memo_mutex_;
  mutable std::vector<double> survival_memo_;  // survival_memo_[n-1] = P(tau >= n)
};

double tau_survival(std::int64_t n, const TauLaw& law);

struct ParitySplit {
  SeriesValue odd;
  SeriesValue even;
};

/// Everything one streaming pass over the tau law produces.
struct TauSummary {
  SeriesValue mean;
  ParitySplit parity;
  /// sum_{n <= N} pmf(n) + P(tau > N); equals 1 up to rounding.
  double normalization = 0.0;
  std::int64_t terms_used = 0;
};

TauSummary summarize(const TauLaw& law, const SeriesOptions& opts = {});

SeriesValue tau_mean(const TauLaw& law, const SeriesOptions& opts = {});
ParitySplit tau_parity(const TauLaw& law, const SeriesOptions& opts = {});

struct DiffusionConstant {
  /// nu = P_odd / (1 - P_odd/d) / E[tau]; 0 when sub-diffusive.
  SeriesValue nu;
  /// P_odd / (P_even E[tau]); equals nu in d = 1. NaN for d >= 2.
  SeriesValue nu_even_form;
  bool subdiffusive = false;
  TauSummary summary;
};

DiffusionConstant diffusion_constant(const TauLaw& law, const SeriesOptions& opts = {});

/// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace serw
