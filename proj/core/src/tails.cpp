#include "serw/tails.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace serw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kE = std::numbers::e;
constexpr double kPi = std::numbers::pi;

// li(e) - e, the lower limit of the LogSquared moment integral.
double log_squared_moment_offset() {
  static const double offset = log_integral(kE) - kE;
  return offset;
}

}  // namespace

std::string_view to_string(TailFamily family) {
  switch (family) {
    case TailFamily::HalfCauchy: return "half_cauchy";
    case TailFamily::Pareto: return "pareto";
    case TailFamily::LogSquared: return "log_squared";
    case TailFamily::Exponential: return "exponential";
    case TailFamily::PointMass: return "point_mass";
  }
  return "unknown";
}

std::optional<TailFamily> parse_tail_family(std::string_view name) {
  for (auto f : {TailFamily::HalfCauchy, TailFamily::Pareto, TailFamily::LogSquared,
                 TailFamily::Exponential, TailFamily::PointMass}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

TailSpec TailSpec::half_cauchy(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("half_cauchy: gamma must be positive and finite");
  return {TailFamily::HalfCauchy, gamma, 1.0};
}

TailSpec TailSpec::pareto(double j) {
  if (!(j > 0.0 && j < 1.0))
    throw std::invalid_argument("pareto: tail exponent j must lie in (0, 1)");
  return {TailFamily::Pareto, j, 1.0};
}

TailSpec TailSpec::log_squared() { return {TailFamily::LogSquared, 0.0, 1.0}; }

TailSpec TailSpec::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("exponential: rate must be positive and finite");
  return {TailFamily::Exponential, rate, 1.0};
}

TailSpec TailSpec::point_mass() { return {TailFamily::PointMass, 0.0, 1.0}; }

TailSpec TailSpec::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw std::invalid_argument("TailSpec::scaled: factor must be positive and finite");
  return {family_, parameter_, scale_ * factor};
}

double TailSpec::support_min() const noexcept {
  switch (family_) {
    case TailFamily::HalfCauchy:
    case TailFamily::Exponential: return 0.0;
    case TailFamily::Pareto:
    case TailFamily::PointMass: return scale_;
    case TailFamily::LogSquared: return kE * scale_;
  }
  return 0.0;
}

bool TailSpec::has_finite_mean() const noexcept {
  return family_ == TailFamily::Exponential || family_ == TailFamily::PointMass;
}

double TailSpec::mean() const noexcept {
  switch (family_) {
    case TailFamily::Exponential: return scale_ / parameter_;
    case TailFamily::PointMass: return scale_;
    default: return kInf;
  }
}

double TailSpec::pdf(double x) const noexcept {
  const double y = x / scale_;
  double base = 0.0;
  switch (family_) {
    case TailFamily::HalfCauchy: {
      if (y < 0.0) return 0.0;
      const double g = parameter_;
      base = 2.0 * g / (kPi * (y * y + g * g));
      break;
    }
    case TailFamily::Pareto:
      if (y < 1.0) return 0.0;
      base = parameter_ * std::pow(y, -(1.0 + parameter_));
      break;
    case TailFamily::LogSquared: {
      if (y < kE) return 0.0;
      const double l = std::log(y);
      base = 1.0 / (y * l * l);
      break;
    }
    case TailFamily::Exponential:
      if (y < 0.0) return 0.0;
      base = parameter_ * std::exp(-parameter_ * y);
      break;
    case TailFamily::PointMass: return 0.0;
  }
  return base / scale_;
}

double TailSpec::base_cdf(double y) const noexcept {
  switch (family_) {
    case TailFamily::HalfCauchy:
      return y <= 0.0 ? 0.0 : 2.0 / kPi * std::atan(y / parameter_);
    case TailFamily::Pareto:
      return y <= 1.0 ? 0.0 : 1.0 - std::pow(y, -parameter_);
    case TailFamily::LogSquared:
      return y <= kE ? 0.0 : 1.0 - 1.0 / std::log(y);
    case TailFamily::Exponential:
      return y <= 0.0 ? 0.0 : -std::expm1(-parameter_ * y);
    case TailFamily::PointMass:
      return y >= 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double TailSpec::base_tail(double y) const noexcept {
  switch (family_) {
    case TailFamily::HalfCauchy:
      // 1 - (2/pi) atan(y/g) = (2/pi) atan(g/y), without cancellation.
      return y <= 0.0 ? 1.0 : 2.0 / kPi * std::atan(parameter_ / y);
    case TailFamily::Pareto:
      return y <= 1.0 ? 1.0 : std::pow(y, -parameter_);
    case TailFamily::LogSquared:
      return y <= kE ? 1.0 : 1.0 / std::log(y);
    case TailFamily::Exponential:
      return y <= 0.0 ? 1.0 : std::exp(-parameter_ * y);
    case TailFamily::PointMass:
      return y < 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double TailSpec::base_moment(double upper) const noexcept {
  switch (family_) {
    case TailFamily::HalfCauchy: {
      if (upper <= 0.0) return 0.0;
      if (std::isinf(upper)) return kInf;
      const double g = parameter_;
      const double r = upper / g;
      return g / kPi * std::log1p(r * r);
    }
    case TailFamily::Pareto: {
      if (upper <= 1.0) return 0.0;
      if (std::isinf(upper)) return kInf;
      const double j = parameter_;
      return j / (1.0 - j) * std::expm1((1.0 - j) * std::log(upper));
    }
    case TailFamily::LogSquared: {
      if (upper <= kE) return 0.0;
      if (std::isinf(upper)) return kInf;
      // Integral of dx / log^2 x from e: li(x) - x / log x, evaluated at both ends.
      return log_integral(upper) - upper / std::log(upper) - log_squared_moment_offset();
    }
    case TailFamily::Exponential: {
      if (upper <= 0.0) return 0.0;
      const double r = parameter_;
      if (std::isinf(upper)) return 1.0 / r;
      const double ru = r * upper;
      // (1 - e^-ru (1 + ru)) / r
      return (-std::expm1(-ru) - ru * std::exp(-ru)) / r;
    }
    case TailFamily::PointMass:
      return upper >= 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double TailSpec::cdf(double x) const noexcept { return base_cdf(x / scale_); }

double TailSpec::tail_mass(double lower) const {
  if (lower < 0.0) throw std::domain_error("tail_mass: lower must be non-negative");
  return base_tail(lower / scale_);
}

double TailSpec::quantile(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in [0, 1)");
  double base = 0.0;
  switch (family_) {
    case TailFamily::HalfCauchy: base = parameter_ * std::tan(kPi * u / 2.0); break;
    case TailFamily::Pareto: base = std::exp(-std::log1p(-u) / parameter_); break;
    case TailFamily::LogSquared: base = std::exp(1.0 / (1.0 - u)); break;
    case TailFamily::Exponential: base = -std::log1p(-u) / parameter_; break;
    case TailFamily::PointMass: base = 1.0; break;
  }
  return scale_ * base;
}

double TailSpec::partial_first_moment(double upper) const noexcept {
  return scale_ * base_moment(upper / scale_);
}

double TailSpec::truncated_first_moment(double upper) const {
  if (!(upper > support_min()))
    throw std::domain_error("truncated_first_moment: upper must exceed the support minimum " +
                            std::to_string(support_min()));
  return partial_first_moment(upper);
}

double ScaleRule::factor(std::int64_t n) const {
  if (n < 1) throw std::domain_error("ScaleRule::factor: n must be >= 1");
  if (exponent == 1.0) return static_cast<double>(n);
  return std::pow(static_cast<double>(n), exponent);
}

double log_integral(double x) {
  if (!(x > 1.0)) throw std::domain_error("log_integral: x must exceed 1");
  return boost::math::expint(std::log(x));
}

double sample(const TailSpec& spec, std::int64_t n, const std::optional<ScaleRule>& rule,
              double u) {
  const double base = spec.quantile(u);
  return rule ? base * rule->factor(n) : base;
}

}  // namespace serw
