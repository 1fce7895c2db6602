#pragma once

// Special functions for the oscillator closed forms and their large-n
// asymptotics: Lebesgue-normalized Hermite functions, Airy Ai, log Gamma and
// the a -> -infinity Airy-type expansion of the parabolic cylinder function.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tomolab/kernel.hpp"

namespace tomolab {

/// Largest order accepted by hermite_phi.
inline constexpr int kMaxHermiteOrder = 10'000;

namespace detail {

// Runs the normalized recurrence
//   phi_{k+1} = x sqrt(2/(k+1)) phi_k - sqrt(k/(k+1)) phi_{k-1}
// on mantissas with a shared log scale, so neither the e^{-x^2/2} start nor
// the growth of high orders under/overflows. visit(k, mantissa, log_scale).
template <class Visit>
void hermite_recurrence(int n, double x, Visit&& visit) {
  constexpr double kRescale = 1e150;
  const double log_rescale = std::log(kRescale);
  double log_scale = -0.5 * x * x - 0.25 * std::log(pi);
  double prev = 0.0;
  double cur = 1.0;
  visit(0, cur, log_scale);
  for (int k = 0; k < n; ++k) {
    double next = x * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescale) {
      cur /= kRescale;
      prev /= kRescale;
      log_scale += log_rescale;
    }
    visit(k + 1, cur, log_scale);
  }
}

inline double scaled_value(double mantissa, double log_scale) {
  if (mantissa == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(mantissa)) + log_scale), mantissa);
}

}  // namespace detail

/// phi_n(x) = (sqrt(pi) 2^n n!)^{-1/2} H_n(x) e^{-x^2/2}, normalized so that
/// the integral of phi_n^2 over the real line is 1. Stable for n up to
/// kMaxHermiteOrder; |phi_n(x)| < 0.8 everywhere.
inline double hermite_phi(int n, double x) {
  if (n < 0) throw std::invalid_argument("hermite_phi: order must be non-negative");
  if (n > kMaxHermiteOrder) throw std::invalid_argument("hermite_phi: order above supported range");
  double mant = 1.0, scale = 0.0;
  detail::hermite_recurrence(n, x, [&](int k, double m, double s) {
    if (k == n) {
      mant = m;
      scale = s;
    }
  });
  return detail::scaled_value(mant, scale);
}

/// phi_0(x) ... phi_n(x) in one recurrence pass.
inline std::vector<double> hermite_phi_all(int n, double x) {
  if (n < 0) throw std::invalid_argument("hermite_phi_all: order must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  // Rescaling changes the scale of earlier mantissas, so store finished values.
  detail::hermite_recurrence(n, x, [&](int k, double m, double s) { out[k] = detail::scaled_value(m, s); });
  return out;
}

// ---------------------------------------------------------------------------
// Airy function

inline constexpr double kAiryAtZero = 0.355028053887817239260;        // Ai(0)
inline constexpr double kAiryPrimeAtZero = -0.258819403792806798405;  // Ai'(0)
/// Maclaurin series is used on [kAirySeriesMin, kAirySeriesMax].
inline constexpr double kAirySeriesMin = -7.0;
inline constexpr double kAirySeriesMax = 5.0;

namespace detail {

inline double airy_series(double x) {
  const double x3 = x * x * x;
  double f = 1.0, g = x;
  double tf = 1.0, tg = x;
  for (int k = 0; k < 200; ++k) {
    tf *= x3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
    tg *= x3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
    f += tf;
    g += tg;
    if (std::abs(tf) < 1e-18 * std::abs(f) && std::abs(tg) < 1e-18 * (std::abs(g) + 1e-300)) break;
  }
  return kAiryAtZero * f + kAiryPrimeAtZero * g;
}

// u_k of the Airy asymptotic series, u_k = (2k+1)(2k+3)...(6k-1) / (216^k k!),
// generated by u_k = u_{k-1} (6k-5)(6k-3)(6k-1) / ((2k-1) 216 k).
inline double airy_u(int k) {
  double u = 1.0;
  for (int j = 1; j <= k; ++j) u *= (6.0 * j - 5.0) * (6.0 * j - 3.0) * (6.0 * j - 1.0) / ((2.0 * j - 1.0) * 216.0 * j);
  return u;
}

// Ai(x) ~ e^{-z} / (2 sqrt(pi) x^{1/4}) sum (-1)^k u_k / z^k, z = 2/3 x^{3/2},
// truncated at the smallest term.
inline double airy_asymptotic_positive(double x) {
  const double z = 2.0 / 3.0 * x * std::sqrt(x);
  double sum = 1.0, term = 1.0, last = 1.0;
  for (int k = 1; k < 60; ++k) {
    term = airy_u(k) / std::pow(z, k);
    if (term > last) break;
    sum += (k % 2 ? -term : term);
    last = term;
    if (term < 1e-17) break;
  }
  return std::exp(-z) / (2.0 * std::sqrt(pi) * std::sqrt(std::sqrt(x))) * sum;
}

// Ai(-x) ~ [sin(z + pi/4) P - cos(z + pi/4) Q] / (sqrt(pi) x^{1/4}) with
// P = sum (-1)^k u_{2k} z^{-2k}, Q = sum (-1)^k u_{2k+1} z^{-2k-1}.
inline double airy_asymptotic_negative(double x) {
  const double ax = -x;
  const double z = 2.0 / 3.0 * ax * std::sqrt(ax);
  double p = 1.0, q = 0.0, last = 1.0;
  for (int k = 1; k < 60; ++k) {
    double term = airy_u(k) / std::pow(z, k);
    if (term > last) break;
    last = term;
    // k odd feeds Q with sign (-1)^{(k-1)/2}; k even feeds P with sign (-1)^{k/2}.
    if (k % 2) q += ((k / 2) % 2 ? -term : term);
    else p += ((k / 2) % 2 ? -term : term);
    if (term < 1e-17) break;
  }
  const double phase = z + 0.25 * pi;
  return (std::sin(phase) * p - std::cos(phase) * q) / (std::sqrt(pi) * std::sqrt(std::sqrt(ax)));
}

}  // namespace detail

/// Airy function Ai(x) for real x.
inline double airy_ai(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("airy_ai: non-finite argument");
  if (x >= kAirySeriesMin && x <= kAirySeriesMax) return detail::airy_series(x);
  return x > 0.0 ? detail::airy_asymptotic_positive(x) : detail::airy_asymptotic_negative(x);
}

/// Evaluation by each branch separately, for switch-point checks.
inline double airy_ai_series(double x) { return detail::airy_series(x); }
inline double airy_ai_asymptotic(double x) {
  return x > 0.0 ? detail::airy_asymptotic_positive(x) : detail::airy_asymptotic_negative(x);
}

// ---------------------------------------------------------------------------

/// log Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("log_gamma: argument must be positive");
  return std::lgamma(x);
}

// ---------------------------------------------------------------------------
// Parabolic cylinder function, a -> -infinity

/// Below this a the Airy-type expansion is considered validated.
inline constexpr double kParabolicMaxA = -10.0;

/// log of 2^{-1/4 - a/2} Gamma(1/4 - a/2).
inline double parabolic_u_log_prefactor(double a) {
  return (-0.25 - 0.5 * a) * std::log(2.0) + log_gamma(0.25 - 0.5 * a);
}

/// (tau / (xi^2 - 1))^{1/4} Ai(tau), the x-dependent part of the expansion
/// U(a, x) ~ 2^{-1/4-a/2} Gamma(1/4-a/2) (tau/(xi^2-1))^{1/4} Ai(tau), with
/// xi = x / (2 sqrt|a|) and (2/3)|tau|^{3/2} = 4|a| Theta; tau < 0 for xi < 1.
inline double parabolic_u_shape(double a, double x) {
  if (a > kParabolicMaxA) throw std::invalid_argument("parabolic_u_asymptotic: requires a <= -10");
  if (x < 0.0) throw std::invalid_argument("parabolic_u_asymptotic: requires x >= 0");
  const double abs_a = -a;
  const double xi = x / (2.0 * std::sqrt(abs_a));
  const double scale = std::pow(4.0 * abs_a, 2.0 / 3.0);
  double tau = 0.0;
  double ratio = scale * std::pow(2.0, -4.0 / 3.0);  // xi -> 1 limit of tau / (xi^2 - 1)
  if (std::abs(xi - 1.0) > 1e-7) {
    if (xi < 1.0) {
      double theta = 0.25 * (std::acos(xi) - xi * std::sqrt(1.0 - xi * xi));
      tau = -scale * std::pow(1.5 * theta, 2.0 / 3.0);
    } else {
      double theta = 0.25 * (xi * std::sqrt(xi * xi - 1.0) - std::acosh(xi));
      tau = scale * std::pow(1.5 * theta, 2.0 / 3.0);
    }
    ratio = tau / (xi * xi - 1.0);
  }
  return std::sqrt(std::sqrt(ratio)) * airy_ai(tau);
}

/// U(a, x) from its leading Airy-type asymptotic; a <= -10, x >= 0.
/// Overflows for very negative a; combine parabolic_u_log_prefactor and
/// parabolic_u_shape in that regime.
inline double parabolic_u_asymptotic(double a, double x) {
  double shape = parabolic_u_shape(a, x);
  return std::exp(parabolic_u_log_prefactor(a)) * shape;
}

}  // namespace tomolab
