#include "serw/tau.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <utility>

namespace serw {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::int64_t kMemoCap = std::int64_t{1} << 22;

struct Factors {
  double keep;    // p_k
  double escape;  // 1 - p_k
};

// Both factors from one evaluation so that the series loop, TauLaw and the
// free functions share a single arithmetic path.
Factors factors(std::int64_t k, const ModelSpec& model) {
  const double a = reinforcement_ratio(k, model.dimension);
  const double b = reinforcement_complement(k, model.dimension);
  const double delta = model.delta;
  switch (model.perturbation) {
    case Perturbation::None: return {a, b};
    case Perturbation::Deterministic: {
      const double keep = a - delta;
      if (keep < 0.0) return {0.0, 1.0};
      return {keep, b + delta};
    }
    case Perturbation::Iid:
    case Perturbation::IndependentSeq: {
      const TailSpec law = model.xi_law(k);
      const double u = a / delta;
      const double f = law.cdf(u);
      const double m = law.partial_first_moment(u);
      const double keep = std::max(a * f - delta * m, 0.0);
      const double escape = std::min(law.tail_mass(u) + b * f + delta * m, 1.0);
      return {keep, escape};
    }
  }
  return {kNaN, kNaN};
}

// Supremum over k >= n of p_k for a stochastic model whose xi law is `law`:
// p is increasing in a, and a -> 1.
double stochastic_sup(const TailSpec& law, double delta) {
  const double u = 1.0 / delta;
  return std::clamp(law.cdf(u) - delta * law.partial_first_moment(u), 0.0, 1.0);
}

// pmf is nonincreasing whenever p_k is nondecreasing in k, which holds unless
// the xi scale grows with k.
bool pmf_monotone(const ModelSpec& model) {
  return model.perturbation != Perturbation::IndependentSeq || model.scale_rule.exponent == 0.0;
}

// Unperturbed d >= 2 survival S0(n) = (2d)! n! / (n+2d-1)!. With r = 2d-1,
// sum_{k>=N} S0(k) / S0(N) = 1 + (N+1)/(r-1), by telescoping
// sum_{n>N} 1/((n+1)...(n+r)) = 1 / ((r-1)(N+2)...(N+r)).
double unperturbed_tail_ratio(std::int64_t N, int dimension) {
  const double r = 2.0 * dimension - 1.0;
  return 1.0 + (static_cast<double>(N) + 1.0) / (r - 1.0);
}

}  // namespace

std::string_view to_string(SeriesStatus s) {
  switch (s) {
    case SeriesStatus::Converged: return "converged";
    case SeriesStatus::Diverges: return "diverges";
    case SeriesStatus::TermCapReached: return "term_cap_reached";
  }
  return "unknown";
}

double continue_prob(std::int64_t k, const ModelSpec& model) {
  if (k < 1) throw ContractViolation("continue_prob: k must be >= 1");
  return factors(k, model).keep;
}

double escape_prob(std::int64_t k, const ModelSpec& model) {
  if (k < 1) throw ContractViolation("escape_prob: k must be >= 1");
  return factors(k, model).escape;
}

double continue_prob_sup(std::int64_t n, const ModelSpec& model) {
  if (n < 1) throw ContractViolation("continue_prob_sup: n must be >= 1");
  switch (model.perturbation) {
    case Perturbation::None: return 1.0;
    case Perturbation::Deterministic: return 1.0 - model.delta;
    case Perturbation::Iid: return stochastic_sup(model.tail, model.delta);
    case Perturbation::IndependentSeq:
      if (model.scale_rule.exponent < 0.0) return 1.0;
      // p falls as the scale grows, so the smallest scale on k >= n bounds it.
      return stochastic_sup(model.xi_law(n), model.delta);
  }
  return 1.0;
}

TauLaw::TauLaw(ModelSpec model) : model_(std::move(model)) {
  model_.validate();
  survival_memo_.push_back(1.0);
}

double TauLaw::continue_prob(std::int64_t k) const { return serw::continue_prob(k, model_); }

double TauLaw::survival(std::int64_t n) const {
  if (n < 1) throw ContractViolation("survival: n must be >= 1");
  std::lock_guard lock(memo_mutex_);
  const auto have = static_cast<std::int64_t>(survival_memo_.size());
  if (n <= have) return survival_memo_[n - 1];

  double s = survival_memo_.back();
  for (std::int64_t m = have; m < n; ++m) {
    s *= factors(m, model_).keep;
    if (m < kMemoCap) survival_memo_.push_back(s);
  }
  return s;
}

double TauLaw::pmf(std::int64_t n) const { return survival(n) * factors(n, model_).escape; }

std::vector<double> TauLaw::survival_table(std::int64_t n_max) const {
  if (n_max < 1) return {};
  if (n_max > kMemoCap) throw std::length_error("survival_table: n_max exceeds memo capacity");
  survival(n_max);
  std::lock_guard lock(memo_mutex_);
  return {survival_memo_.begin(), survival_memo_.begin() + n_max};
}

double tau_survival(std::int64_t n, const TauLaw& law) { return law.survival(n); }

TauSummary summarize(const TauLaw& law, const SeriesOptions& opts) {
  const ModelSpec& model = law.model();
  const int d = model.dimension;
  const bool comparison_tail = d >= 2;
  const bool exact_tail = comparison_tail && model.perturbation == Perturbation::None;
  const bool monotone = pmf_monotone(model);

  CompensatedSum mean, odd, even, mass;
  double s = 1.0;  // S(n) at the top of each iteration
  double sup = continue_prob_sup(1, model);
  double half_probe_scaled = -1.0;
  bool diverges = false;

  double mean_bound = std::numeric_limits<double>::infinity();
  double parity_bound = std::numeric_limits<double>::infinity();
  double parity_mid = 0.0;  // remainder share going to odd n beyond N, centred
  std::int64_t n = 1;

  for (;; ++n) {
    const Factors f = factors(n, model);
    const double pmf = s * f.escape;
    mean.add(s);
    mass.add(pmf);
    if (n & 1) odd.add(pmf);
    else even.add(pmf);
    s *= f.keep;

    // Remainder starts at N = n+1 with S(N) = s.
    const bool check = n < 4096 || (n & 4095) == 0 || s == 0.0 || n >= opts.max_terms;
    if (!check) continue;
    const std::int64_t N = n + 1;
    if (model.perturbation == Perturbation::IndependentSeq) sup = continue_prob_sup(N, model);

    double ratio = sup < 1.0 ? 1.0 / (1.0 - sup) : std::numeric_limits<double>::infinity();
    if (comparison_tail) ratio = std::min(ratio, unperturbed_tail_ratio(N, d));
    mean_bound = exact_tail ? 0.0 : s * ratio;

    const double next_pmf = monotone ? s * factors(N, model).escape : 0.0;
    parity_bound = monotone ? next_pmf / 4.0 : s / 2.0;
    parity_mid = monotone ? next_pmf / 4.0 : 0.0;

    if (!std::isfinite(mean_bound) && !diverges) {
      // Harmonic-type decay (N S(N) not shrinking) means the sum grows like log N.
      if (half_probe_scaled < 0.0 && n >= opts.divergence_probe_terms / 2)
        half_probe_scaled = static_cast<double>(N) * s;
      if (n >= opts.divergence_probe_terms && half_probe_scaled > 0.0 &&
          static_cast<double>(N) * s >= 0.5 * half_probe_scaled) {
        diverges = true;
      }
    }

    const bool mean_done = diverges || mean_bound <= opts.tolerance;
    if (mean_done && parity_bound <= opts.tolerance) break;
    if (n >= opts.max_terms) break;
  }

  const std::int64_t N = n + 1;
  TauSummary out;
  out.terms_used = n;
  out.normalization = mass.value() + s;

  if (exact_tail) {
    const double partial = mean.value();
    const double value = partial + s * unperturbed_tail_ratio(N, d);
    out.mean = {value, 4.0 * kEps * value, n, SeriesStatus::Converged};
  } else if (diverges) {
    out.mean = {mean.value(), std::numeric_limits<double>::infinity(), n, SeriesStatus::Diverges};
  } else {
    const SeriesStatus st = mean_bound <= opts.tolerance ? SeriesStatus::Converged
                                                         : SeriesStatus::TermCapReached;
    out.mean = {mean.value(), mean_bound, n, st};
  }

  // The remaining mass s = P(tau >= N) splits between parities; when pmf is
  // nonincreasing the class containing N gets at least half of it and at
  // most half plus pmf(N)/2.
  const double half = s / 2.0;
  const double to_odd = (N & 1) ? half + parity_mid : half - parity_mid;
  const double to_even = s - to_odd;
  const SeriesStatus parity_status =
      parity_bound <= opts.tolerance ? SeriesStatus::Converged : SeriesStatus::TermCapReached;
  out.parity.odd = {odd.value() + to_odd, parity_bound, n, parity_status};
  out.parity.even = {even.value() + to_even, parity_bound, n, parity_status};
  return out;
}

SeriesValue tau_mean(const TauLaw& law, const SeriesOptions& opts) {
  return summarize(law, opts).mean;
}

ParitySplit tau_parity(const TauLaw& law, const SeriesOptions& opts) {
  return summarize(law, opts).parity;
}

DiffusionConstant diffusion_constant(const TauLaw& law, const SeriesOptions& opts) {
  DiffusionConstant out;
  out.summary = summarize(law, opts);
  const auto& mean = out.summary.mean;
  const auto& odd = out.summary.parity.odd;
  const auto& even = out.summary.parity.even;
  const double d = law.model().dimension;

  if (mean.status == SeriesStatus::Diverges) {
    out.subdiffusive = true;
    out.nu = {0.0, 0.0, mean.terms_used, SeriesStatus::Diverges};
    out.nu_even_form = d == 1 ? out.nu : SeriesValue{kNaN, kNaN, mean.terms_used, mean.status};
    return out;
  }

  const auto status = (mean.converged() && odd.converged()) ? SeriesStatus::Converged
                                                            : SeriesStatus::TermCapReached;
  const double e_lo = std::max(mean.value - mean.truncation_bound, std::numeric_limits<double>::min());
  const double e_hi = mean.value + mean.truncation_bound;
  auto odd_factor = [d](double p) { return p / (1.0 - p / d); };

  const double po = odd.value;
  const double po_lo = std::max(po - odd.truncation_bound, 0.0);
  const double po_hi = std::min(po + odd.truncation_bound, 1.0);
  const double nu = odd_factor(po) / mean.value;
  const double nu_hi = odd_factor(po_hi) / e_lo;
  const double nu_lo = odd_factor(po_lo) / e_hi;
  out.nu = {nu, std::max(nu_hi - nu, nu - nu_lo), mean.terms_used, status};

  if (d == 1) {
    const double pe = even.value;
    const double pe_lo = std::max(pe - even.truncation_bound, std::numeric_limits<double>::min());
    const double pe_hi = pe + even.truncation_bound;
    const double alt = po / (pe * mean.value);
    const double alt_hi = po_hi / (pe_lo * e_lo);
    const double alt_lo = po_lo / (pe_hi * e_hi);
    out.nu_even_form = {alt, std::max(alt_hi - alt, alt - alt_lo), mean.terms_used, status};
  } else {
    out.nu_even_form = {kNaN, kNaN, mean.terms_used, status};
  }
  return out;
}

}  // namespace serw
