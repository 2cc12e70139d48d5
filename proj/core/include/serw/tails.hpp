#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace serw {

enum class TailFamily {
  HalfCauchy,   // pdf 2g / (pi (x^2 + g^2)) on [0, inf)
  Pareto,       // pdf j x^-(1+j) on [1, inf), j in (0, 1)
  LogSquared,   // pdf 1 / (x log^2 x) on [e, inf)
  Exponential,  // pdf r e^(-r x) on [0, inf)
  PointMass,    // atom at 1
};

std::string_view to_string(TailFamily family);
std::optional<TailFamily> parse_tail_family(std::string_view name);

/// Law of the non-negative perturbation multiplier xi.
///
/// A spec describes `scale * X` where X follows the base family. The base
/// families are the ones listed in TailFamily with unit scale; a scale other
/// than one is how per-step growth is expressed for independent (non-i.i.d.)
/// perturbation sequences.
///
/// Every family has closed forms for its CDF, quantile and truncated first
/// moment, so nothing here needs quadrature.
class TailSpec {
 public:
  static TailSpec half_cauchy(double gamma);
  static TailSpec pareto(double j);
  static TailSpec log_squared();
  static TailSpec exponential(double rate);
  static TailSpec point_mass();

  TailFamily family() const noexcept { return family_; }
  /// gamma for HalfCauchy, j for Pareto, rate for Exponential, 0 otherwise.
  double parameter() const noexcept { return parameter_; }
  double scale() const noexcept { return scale_; }

  /// Law of `factor * xi`.
  TailSpec scaled(double factor) const;

  double support_min() const noexcept;
  bool has_finite_mean() const noexcept;
  double mean() const noexcept;

  /// Density; zero below the support. PointMass has no density and returns 0.
  double pdf(double x) const noexcept;
  double cdf(double x) const noexcept;
  /// P(xi > lower).
  double tail_mass(double lower) const;
  double quantile(double u) const;

  /// Integral of x f(x) over [0, upper]. Throws std::domain_error when
  /// upper <= support_min().
  double truncated_first_moment(double upper) const;

  /// Same integral without the domain check: zero at or below the support
  /// minimum. Kernels use this because the cutoff can legitimately fall below
  /// the support (every draw then escapes).
  double partial_first_moment(double upper) const noexcept;

  friend bool operator==(const TailSpec&, const TailSpec&) = default;

 private:
  TailSpec(TailFamily family, double parameter, double scale)
      : family_(family), parameter_(parameter), scale_(scale) {}

  // Unit-scale versions.
  double base_cdf(double x) const noexcept;
  double base_tail(double x) const noexcept;
  double base_moment(double upper) const noexcept;

  TailFamily family_;
  double parameter_;
  double scale_;
};

/// Per-step scale multiplier s_n = n^exponent used by independent sequences.
struct ScaleRule {
  double exponent = 1.0;

  double factor(std::int64_t n) const;
  friend bool operator==(const ScaleRule&, const ScaleRule&) = default;
};

/// Logarithmic integral li(x) for x > 1.
double log_integral(double x);

/// Inverse-CDF draw of xi_n from a uniform variate in [0, 1).
double sample(const TailSpec& spec, std::int64_t n,
              const std::optional<ScaleRule>& rule, double u);

/// Inverse-CDF draw from any source exposing `double uniform()`.
template <class UniformSource>
double sample(const TailSpec& spec, std::int64_t n,
              const std::optional<ScaleRule>& rule, UniformSource& rng) {
  return sample(spec, n, rule, rng.uniform());
}

}  // namespace serw
