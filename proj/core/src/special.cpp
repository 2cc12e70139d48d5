#include "serw/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace serw {

namespace {

constexpr double kTailTarget = 1e-12;
constexpr double kRelTol = 1e-12;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10'000;

// Modified Lentz for Gamma(s, x) = e^-x x^s / (x + 1 - s - 1(1-s)/(x + 3 - s - ...)).
double gamma_q_continued_fraction(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double step = d * c;
    h *= step;
    if (std::abs(step - 1.0) < 1e-16) return std::exp(-x + s * std::log(x)) * h;
  }
  throw std::runtime_error("upper_incomplete_gamma: continued fraction did not converge");
}

// Lower gamma(s, x) = x^s e^-x sum_n x^n / (s (s+1) ... (s+n)), s > 0.
double lower_gamma_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (s + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) return std::exp(-x + s * std::log(x)) * sum;
  }
  throw std::runtime_error("upper_incomplete_gamma: series did not converge");
}

}  // namespace

double exponential_integral_e1(double x) {
  if (!(x > 0.0)) throw std::domain_error("exponential_integral_e1: x must be positive");
  if (x >= 1.0) return gamma_q_continued_fraction(0.0, x);
  // -gamma_E - log x - sum_{n>=1} (-x)^n / (n n!)
  double term = 1.0;
  double sum = 0.0;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= -x / n;
    const double add = term / n;
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return -std::numbers::egamma - std::log(x) - sum;
}

double upper_incomplete_gamma(double s, double x) {
  if (!(x > 0.0)) throw std::domain_error("upper_incomplete_gamma: x must be positive");
  if (!std::isfinite(s)) throw std::domain_error("upper_incomplete_gamma: s must be finite");
  if (x >= 1.0 && x >= s + 1.0) return gamma_q_continued_fraction(s, x);
  if (s > 0.0) return boost::math::tgamma(s) - lower_gamma_series(s, x);

  // s <= 0 and x < 1: shift up to s + K > 0 (or exactly 0), then
  // Gamma(a, x) = (Gamma(a+1, x) - x^a e^-x) / a downwards.
  const int shift = static_cast<int>(std::ceil(-s));
  const double top = s + shift;
  double g = top == 0.0 ? exponential_integral_e1(x) : upper_incomplete_gamma(top, x);
  for (int i = shift - 1; i >= 0; --i) {
    const double a = s + i;
    g = (g - std::exp(a * std::log(x) - x)) / a;
  }
  return g;
}

double rate_integral(double k, int dimension) {
  if (!(k > 0.0) || !std::isfinite(k)) throw std::domain_error("rate_integral: k must be positive");
  if (dimension < 1) throw std::domain_error("rate_integral: dimension must be >= 1");
  const double power = (2.0 * dimension - 1.0) * (1.0 + k);

  // Upper cutoff X: e^{-kX}/k < target, and for power > 1 also X^{1-power}/(power-1) < target.
  double log_x = std::log((std::log(1.0 / k) - std::log(kTailTarget)) / k);
  if (power > 1.0 + 1e-3) {
    const double log_x_power = -std::log(kTailTarget * (power - 1.0)) / (power - 1.0);
    log_x = std::min(log_x, log_x_power);
  }
  log_x = std::max(log_x, 1.0);

  // x = e^t: integrand e^{-k e^t} e^{(1 - power) t}.
  auto integrand = [k, power](double t) { return std::exp(-k * std::exp(t) + (1.0 - power) * t); };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, log_x, 20, kRelTol, &error);
  return value;
}

}  // namespace serw
