#pragma once

namespace serw {

/// f_d(k) = integral over [1, inf) of e^(-k x) x^(-(2d-1)(1+k)) dx.
///
/// Integrated in t = log x by adaptive Gauss-Kronrod on [0, log X], where X
/// makes the neglected tail below 1e-12 (e^(-kX)/k, or X^(1-a)/(a-1) for the
/// power a > 1 in d >= 2). Throws std::domain_error for k <= 0 or d < 1.
double rate_integral(double k, int dimension);

/// Gamma(s, x) = integral over [x, inf) of t^(s-1) e^(-t) dt for real s and
/// x > 0: continued fraction when x >= max(1, s + 1), otherwise the series for
/// the lower function, shifted up and recurred down when s <= 0.
/// Throws std::domain_error for x <= 0.
double upper_incomplete_gamma(double s, double x);

/// E_1(x) for x > 0.
double exponential_integral_e1(double x);

}  // namespace serw
