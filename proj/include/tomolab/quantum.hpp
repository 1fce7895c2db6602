#pragma once

// Quantum tomograms of pure states: tomogram amplitudes and their
// generating function, closed forms for the oscillator family (eigenstates,
// coherent and cat states, two-level superpositions), the particle in a box,
// direct quadrature of the amplitude integral in the position or momentum
// representation, and the Wigner-function routes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tomolab/classical.hpp"
#include "tomolab/kernel.hpp"
#include "tomolab/quadrature.hpp"
#include "tomolab/special.hpp"
#include "tomolab/state.hpp"

namespace tomolab {

namespace detail {

inline void require_frame(const TomographyFrame& f, const char* who) {
  if (f.is_zero()) throw std::invalid_argument(std::string(who) + ": frame (0, 0) is the point mass delta(X)");
}

inline void require_nu(const TomographyFrame& f, const char* who) {
  if (f.nu == 0.0) throw std::domain_error(std::string(who) + ": requires nu != 0 (use tomogram_from_wavefunction)");
}

inline void require_positive(double hbar, double varpi, const char* who) {
  if (!(hbar > 0.0) || !(varpi > 0.0)) throw std::invalid_argument(std::string(who) + ": hbar and varpi must be positive");
}

// Oscillator-family amplitude divided by sqrt(2 pi hbar |nu|) with the chirp
// exp(-i mu X^2 / (2 hbar nu |zeta|^2)) removed:
//   a(s) = (varpi/(pi hbar))^{1/4} sqrt(sgn(nu)/zeta*) exp(E(s)),
//   E(s) = zeta s^2/(2 zeta*) - i sqrt(2 varpi/hbar) X s/zeta* - varpi X^2/(2 hbar |zeta|^2),
// with zeta = varpi nu + i mu and sgn(0) = +1. |a|^2 is the tomogram
// density, and the same expression covers nu = 0.
struct ReducedAmplitude {
  complex zeta;
  double abs_zeta;
  double X;
  double varpi;
  double hbar;
  complex log_prefactor;

  ReducedAmplitude(const TomographyFrame& f, double x, double hb, double vp)
      : zeta(vp * f.nu, f.mu), abs_zeta(std::abs(zeta)), X(x), varpi(vp), hbar(hb) {
    double sgn = f.nu < 0.0 ? -1.0 : 1.0;
    log_prefactor = 0.25 * std::log(vp / (pi * hb)) + 0.5 * std::log(sgn / std::conj(zeta));
  }

  complex exponent(complex s) const {
    const complex zc = std::conj(zeta);
    return zeta * s * s / (2.0 * zc) - complex(0.0, 1.0) * std::sqrt(2.0 * varpi / hbar) * X * s / zc -
           varpi * X * X / (2.0 * hbar * abs_zeta * abs_zeta);
  }

  complex log_value(complex s) const { return log_prefactor + exponent(s); }

  // Q = sqrt(varpi/hbar) X / |zeta|
  double q() const { return std::sqrt(varpi / hbar) * X / abs_zeta; }
  // u = -i zeta/|zeta|; the phase of the n-th eigenstate amplitude is u^n.
  complex u() const { return complex(0.0, -1.0) * zeta / abs_zeta; }
  // sqrt(varpi/hbar)/|zeta|, the Jacobian of X -> Q.
  double jacobian() const { return std::sqrt(varpi / hbar) / abs_zeta; }

  // exp(-i mu X^2/(2 hbar nu |zeta|^2)), the removed chirp (nu != 0)
  complex chirp(const TomographyFrame& f) const {
    double ph = -f.mu * X * X / (2.0 * hbar * f.nu * abs_zeta * abs_zeta);
    return {std::cos(ph), std::sin(ph)};
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Amplitudes

/// J(s) = (varpi/(pi hbar))^{1/4} sqrt(2 pi hbar nu/zeta*)
///        exp[zeta s^2/(2 zeta*) - i sqrt(2 varpi/hbar) X s/zeta* - X^2/(2 hbar nu zeta*)],
/// zeta = varpi nu + i mu. 2 pi hbar nu/zeta* has positive real part, so its
/// principal square root is continuous in (mu, nu). Sum_n s^n/sqrt(n!) A_n = J(s).
inline complex amplitude_generating(complex s, const TomographyFrame& frame, double X, double hbar, double varpi = 1.0) {
  detail::require_nu(frame, "amplitude_generating");
  detail::require_positive(hbar, varpi, "amplitude_generating");
  const complex zeta(varpi * frame.nu, frame.mu);
  const complex zc = std::conj(zeta);
  const complex i(0.0, 1.0);
  complex e = zeta * s * s / (2.0 * zc) - i * std::sqrt(2.0 * varpi / hbar) * X * s / zc - X * X / (2.0 * hbar * frame.nu * zc);
  return std::pow(varpi / (pi * hbar), 0.25) * std::sqrt(2.0 * pi * hbar * frame.nu / zc) * std::exp(e);
}

/// A_n = (varpi/hbar)^{1/4} sqrt(2 pi hbar nu/zeta*) e^{-i mu Q^2/(2 varpi nu)} u^n phi_n(Q),
/// u = -i zeta/|zeta|, Q = sqrt(varpi/hbar) X/|zeta|; the Taylor coefficients of J.
inline complex hermite_amplitude(int n, const TomographyFrame& frame, double X, double hbar, double varpi = 1.0) {
  detail::require_nu(frame, "hermite_amplitude");
  detail::require_positive(hbar, varpi, "hermite_amplitude");
  const complex zeta(varpi * frame.nu, frame.mu);
  const double az = std::abs(zeta);
  const double Q = std::sqrt(varpi / hbar) * X / az;
  const complex u = complex(0.0, -1.0) * zeta / az;
  const double ph = -frame.mu * Q * Q / (2.0 * varpi * frame.nu);
  return std::pow(varpi / hbar, 0.25) * std::sqrt(2.0 * pi * hbar * frame.nu / std::conj(zeta)) *
         complex(std::cos(ph), std::sin(ph)) * std::pow(u, n) * hermite_phi(n, Q);
}

/// A_alpha = e^{-|alpha|^2/2} J(alpha).
inline complex coherent_amplitude(complex alpha, const TomographyFrame& frame, double X, double hbar, double varpi = 1.0) {
  detail::require_nu(frame, "coherent_amplitude");
  detail::require_positive(hbar, varpi, "coherent_amplitude");
  detail::ReducedAmplitude r(frame, X, hbar, varpi);
  complex log_a = r.log_value(alpha) - 0.5 * std::norm(alpha);
  return std::sqrt(2.0 * pi * hbar * std::abs(frame.nu)) * std::exp(log_a) * r.chirp(frame);
}

// ---------------------------------------------------------------------------
// Closed-form tomograms

/// W_n = sqrt(varpi/hbar)/|zeta| phi_n(Q)^2, Q = sqrt(varpi/hbar) X/|zeta|,
/// |zeta|^2 = varpi^2 nu^2 + mu^2.
inline double hermite_tomogram(int n, const TomographyFrame& frame, double X, double hbar, double varpi = 1.0) {
  detail::require_frame(frame, "hermite_tomogram");
  detail::require_positive(hbar, varpi, "hermite_tomogram");
  detail::ReducedAmplitude r(frame, X, hbar, varpi);
  double phi = hermite_phi(n, r.q());
  return r.jacobian() * phi * phi;
}

/// sqrt(varpi/(pi hbar |zeta|^2))
///   exp[-(sqrt(varpi) X - mu sqrt(2 hbar) Re(alpha) - varpi nu sqrt(2 hbar) Im(alpha))^2 / (hbar |zeta|^2)].
inline double coherent_tomogram(complex alpha, const TomographyFrame& frame, double X, double hbar, double varpi = 1.0) {
  detail::require_frame(frame, "coherent_tomogram");
  detail::require_positive(hbar, varpi, "coherent_tomogram");
  const double z2 = varpi * varpi * frame.nu * frame.nu + frame.mu * frame.mu;
  const double d = std::sqrt(varpi) * X - frame.mu * std::sqrt(2.0 * hbar) * alpha.real() -
                   varpi * frame.nu * std::sqrt(2.0 * hbar) * alpha.imag();
  return std::sqrt(varpi / (pi * hbar * z2)) * std::exp(-d * d / (hbar * z2));
}

/// Interference term Re(A_n A_m^*)/(2 pi hbar |nu|)
///   = sqrt(varpi/hbar)/|zeta| Re(u^{n-m}) phi_n(Q) phi_m(Q).
inline double superposition_cross_term(int n, int m, const TomographyFrame& frame, double X, double hbar,
                                       double varpi = 1.0) {
  detail::require_frame(frame, "superposition_cross_term");
  detail::require_positive(hbar, varpi, "superposition_cross_term");
  detail::ReducedAmplitude r(frame, X, hbar, varpi);
  const double Q = r.q();
  return r.jacobian() * std::pow(r.u(), n - m).real() * hermite_phi(n, Q) * hermite_phi(m, Q);
}

/// Tomogram of (phi_n + phi_m)/sqrt 2: W_n/2 + W_m/2 + Re(A_n A_m^*)/(2 pi hbar |nu|).
inline double superposition_tomogram(int n, int m, const TomographyFrame& frame, double X, double hbar,
                                     double varpi = 1.0) {
  if (n == m) throw std::invalid_argument("superposition_tomogram: requires n != m");
  return 0.5 * hermite_tomogram(n, frame, X, hbar, varpi) + 0.5 * hermite_tomogram(m, frame, X, hbar, varpi) +
         superposition_cross_term(n, m, frame, X, hbar, varpi);
}

namespace detail {

// log of the reduced coherent amplitude e^{-|alpha|^2/2} a(alpha)
inline complex log_coherent_reduced(const ReducedAmplitude& r, complex alpha) {
  return r.log_value(alpha) - 0.5 * std::norm(alpha);
}

}  // namespace detail

/// Cat interference I = 2 Re(A_alpha A_{-alpha}^*)/(2 pi hbar |nu|), combined
/// in the log domain so that large |alpha| neither overflows nor underflows.
inline double cat_interference(complex alpha, const TomographyFrame& frame, double X, double hbar, double varpi = 1.0) {
  detail::require_frame(frame, "cat_interference");
  detail::require_positive(hbar, varpi, "cat_interference");
  detail::ReducedAmplitude r(frame, X, hbar, varpi);
  complex s = detail::log_coherent_reduced(r, alpha) + std::conj(detail::log_coherent_reduced(r, -alpha));
  return 2.0 * std::exp(s.real()) * std::cos(s.imag());
}

/// Phase of the cat interference term, Im(log A_alpha + conj log A_{-alpha}),
/// unwrapped (continuous in X). Zero crossings of I are where it passes
/// pi/2 + k pi.
inline double cat_interference_phase(complex alpha, const TomographyFrame& frame, double X, double hbar,
                                     double varpi = 1.0) {
  detail::require_frame(frame, "cat_interference_phase");
  detail::ReducedAmplitude r(frame, X, hbar, varpi);
  return (r.exponent(alpha) + std::conj(r.exponent(-alpha))).imag();
}

/// N^2 [W_alpha + W_{-alpha} +- I].
inline double cat_tomogram(complex alpha, Parity parity, const TomographyFrame& frame, double X, double hbar,
                           double varpi = 1.0) {
  detail::require_frame(frame, "cat_tomogram");
  detail::require_positive(hbar, varpi, "cat_tomogram");
  const double n2 = cat_norm_squared(alpha, parity);
  const double sign = parity == Parity::even ? 1.0 : -1.0;
  double w = coherent_tomogram(alpha, frame, X, hbar, varpi) + coherent_tomogram(-alpha, frame, X, hbar, varpi) +
             sign * cat_interference(alpha, frame, X, hbar, varpi);
  return n2 * std::max(0.0, w);
}

// ---------------------------------------------------------------------------
// Box states

namespace detail {

// B(+-) = int_0^L exp(i(mu y^2/(2 hbar nu) - X y/(hbar nu) +- k y)) dy, k = n pi/L
inline std::pair<complex, complex> box_branch_integrals(const BoxEigen& b, const TomographyFrame& f, double X,
                                                        double hbar, const ChirpOptions& opt) {
  const double k = b.n * pi / b.L;
  const double alpha = f.mu / (2.0 * hbar * f.nu);
  const double beta = -X / (hbar * f.nu);
  auto one = [](double) { return complex(1.0); };
  return {chirp_integral(one, 0.0, b.L, alpha, beta + k, opt), chirp_integral(one, 0.0, b.L, alpha, beta - k, opt)};
}

inline ChirpOptions box_chirp_options(const BoxEigen& b) {
  ChirpOptions opt;
  opt.max_panel = b.L / 8.0;
  return opt;
}

}  // namespace detail

/// Box eigenstate amplitude sqrt(2/L) (B+ - B-)/(2i); nu != 0.
inline complex box_amplitude(const BoxEigen& b, const TomographyFrame& frame, double X, double hbar,
                             const ChirpOptions& opt) {
  detail::require_nu(frame, "box_amplitude");
  auto [plus, minus] = detail::box_branch_integrals(b, frame, X, hbar, opt);
  return std::sqrt(2.0 / b.L) * (plus - minus) / complex(0.0, 2.0);
}

/// Box tomogram value (1/(2 pi hbar |nu|)) (2/L) |B+ - B-|^2/4 for nu != 0;
/// |psi_n(X/mu)|^2/|mu| for nu = 0.
inline double box_tomogram_value(const BoxEigen& b, const TomographyFrame& frame, double X, double hbar,
                                 const ChirpOptions& opt) {
  detail::require_frame(frame, "box_tomogram");
  if (frame.nu == 0.0) {
    double y = X / frame.mu;
    if (y < 0.0 || y > b.L) return 0.0;
    double s = std::sin(b.n * pi * y / b.L);
    return 2.0 / b.L * s * s / std::abs(frame.mu);
  }
  return std::norm(box_amplitude(b, frame, X, hbar, opt)) / (2.0 * pi * hbar * std::abs(frame.nu));
}

/// Box tomogram on a grid, general hbar. Refuses with ResolutionError (and
/// the required node count) when the chirp cannot be resolved in budget.
inline Tomogram box_tomogram(int n, double L, const TomographyFrame& frame, const UniformGrid& grid, double hbar,
                             std::optional<ChirpOptions> options = std::nullopt) {
  if (n < 1 || !(L > 0.0) || !(hbar > 0.0)) throw std::invalid_argument("box_tomogram: need n >= 1, L > 0, hbar > 0");
  if (frame.is_zero()) return {frame, grid, std::vector<double>(grid.size(), 0.0), {{1.0, 0.0}}};
  BoxEigen b{n, L};
  ChirpOptions opt = options.value_or(detail::box_chirp_options(b));
  // Check the worst-case budget up front so a refusal does not waste work.
  if (frame.nu != 0.0) {
    const double k = n * pi / L, alpha = frame.mu / (2.0 * hbar * frame.nu);
    for (double x : {grid.min(), grid.max()})
      for (double sgn : {1.0, -1.0}) {
        std::size_t need = chirp_node_count(0.0, L, alpha, -x / (hbar * frame.nu) + sgn * k, opt);
        if (need > opt.max_nodes)
          throw ResolutionError("box_tomogram: resolving the phase needs " + std::to_string(need) + " nodes (budget " +
                                    std::to_string(opt.max_nodes) + ")",
                                need);
      }
  }
  std::vector<double> v(grid.size());
  parallel_for(v.size(), [&](std::size_t i) { v[i] = box_tomogram_value(b, frame, grid[i], hbar, opt); });
  return {frame, grid, std::move(v)};
}

/// Planck constant for which the box level n has unit energy, sqrt(2) L/(n pi).
inline double box_ehrenfest_hbar(int n, double L) { return std::sqrt(2.0) * L / (n * pi); }

/// F-+(y) = (pi/L)[mu y^2/(2 sqrt2 nu) - (X/(sqrt2 nu) -+ 1) y]; the box
/// amplitudes at unit energy are A-+ = int_0^L exp(i n F-+(y)) dy.
inline double box_phase(double y, double X, const TomographyFrame& f, double L, int branch) {
  const double r2 = std::sqrt(2.0);
  return pi / L * (f.mu * y * y / (2.0 * r2 * f.nu) - (X / (r2 * f.nu) - branch) * y);
}

/// Stationary points Q-+ = X/mu -+ sqrt2 nu/mu.
inline std::pair<double, double> box_stationary_points(double X, const TomographyFrame& f) {
  const double r2 = std::sqrt(2.0);
  return {X / f.mu - r2 * f.nu / f.mu, X / f.mu + r2 * f.nu / f.mu};
}

/// Stationary-phase box tomogram at unit energy (hbar = sqrt2 L/(n pi)):
/// [chi(Q-) + chi(Q+) - 2 chi(Q-) chi(Q+) cos n(F-(Q-) - F+(Q+))] / (2|mu|L).
inline double box_tomogram_stationary_phase(int n, double L, const TomographyFrame& frame, double X) {
  if (frame.mu == 0.0 || frame.nu == 0.0)
    throw std::domain_error("box_tomogram_stationary_phase: requires mu != 0 and nu != 0");
  if (n < 10) throw std::domain_error("box_tomogram_stationary_phase: requires n >= 10");
  if (!(L > 0.0)) throw std::invalid_argument("box_tomogram_stationary_phase: L must be positive");
  auto chi = [L](double q) { return q >= 0.0 && q <= L ? 1.0 : 0.0; };
  auto [qm, qp] = box_stationary_points(X, frame);
  const double cm = chi(qm), cp = chi(qp);
  double cross = 0.0;
  if (cm * cp != 0.0) cross = 2.0 * std::cos(n * (box_phase(qm, X, frame, L, -1) - box_phase(qp, X, frame, L, +1)));
  return (cm + cp - cross) / (2.0 * std::abs(frame.mu) * L);
}

/// Period in X of the stationary-phase cross term, mu L / n.
inline double box_cross_term_period(int n, double L, const TomographyFrame& frame) {
  return std::abs(frame.mu) * L / n;
}

// ---------------------------------------------------------------------------
// Tomograms from wave functions by quadrature

/// Which amplitude integral to evaluate.
enum class Representation {
  automatic,  // position when |nu| P >= |mu| Q, else momentum
  position,   // int psi(y) exp(i mu y^2/(2 hbar nu) - i X y/(hbar nu)) dy, nu != 0
  momentum,   // int psi-hat(p) exp(-i nu p^2/(2 hbar mu) + i X p/(hbar mu)) dp, mu != 0
};

namespace detail {

inline constexpr double kQuadratureMassTolerance = 1e-3;

// Evaluates single tomogram values for one state, caching what can be
// precomputed (the momentum-space samples of a sampled state).
class WaveTomography {
 public:
  explicit WaveTomography(const StateSpec& s, ChirpOptions opt = {}) : state_(s), opt_(opt) {
    validate_state(s);
    qs_ = position_support(s);
    scales_ = state_scales(s);
    if (!s.is<BoxEigen>()) ps_ = momentum_support(s);
  }

  Representation choose(const TomographyFrame& f) const {
    if (state_.is<BoxEigen>()) return Representation::position;
    return std::abs(f.nu) * scales_.momentum >= std::abs(f.mu) * scales_.position ? Representation::position
                                                                                  : Representation::momentum;
  }

  double value(const TomographyFrame& f, double X, Representation rep = Representation::automatic) const {
    if (f.nu == 0.0) {
      double y = X / f.mu;
      return std::norm(wavefunction(state_, y)) / std::abs(f.mu);
    }
    if (f.mu == 0.0) return std::norm(momentum(X / f.nu)) / std::abs(f.nu);
    if (rep == Representation::automatic) rep = choose(f);
    return rep == Representation::position ? position_route(f, X) : momentum_route(f, X);
  }

  complex position_amplitude(const TomographyFrame& f, double X) const {
    if (const auto* b = std::get_if<BoxEigen>(&state_.kind)) {
      ChirpOptions o = opt_;
      o.max_panel = std::min(o.max_panel, b->L / 8.0);
      return box_amplitude(*b, f, X, state_.hbar, o);
    }
    const double hb = state_.hbar;
    ChirpOptions o = opt_;
    o.max_panel = std::min(o.max_panel, qs_.resolution);
    return chirp_integral([&](double y) { return wavefunction(state_, y); }, qs_.lo, qs_.hi, f.mu / (2.0 * hb * f.nu),
                          -X / (hb * f.nu), o);
  }

  double position_route(const TomographyFrame& f, double X) const {
    return std::norm(position_amplitude(f, X)) / (2.0 * pi * state_.hbar * std::abs(f.nu));
  }

  double momentum_route(const TomographyFrame& f, double X) const {
    if (state_.is<BoxEigen>()) throw std::domain_error("momentum route is not used for box states");
    if (const auto* c = std::get_if<CustomGrid>(&state_.kind)) ensure_momentum_table(*c);
    const double hb = state_.hbar;
    ChirpOptions o = opt_;
    o.max_panel = std::min(o.max_panel, ps_.resolution);
    complex a = chirp_integral([&](double p) { return momentum(p); }, ps_.lo, ps_.hi, -f.nu / (2.0 * hb * f.mu),
                               X / (hb * f.mu), o);
    return std::norm(a) / (2.0 * pi * hb * std::abs(f.mu));
  }

  complex momentum(double p) const {
    if (const auto* c = std::get_if<CustomGrid>(&state_.kind)) {
      ensure_momentum_table(*c);
      return (*psi_hat_)(p) * std::polar(1.0, -p * shift_ / state_.hbar);
    }
    return momentum_wavefunction(state_, p);
  }

  const StateSpec& state() const noexcept { return state_; }

 private:
  void ensure_momentum_table(const CustomGrid& c) const {
    if (psi_hat_) return;
    // psi-hat is band-limited to the position extent W; sample it at
    // pi hbar/(4 W), eight times finer than the sampling theorem requires.
    const auto& g = c.psi.grid();
    const double width = g.max() - g.min();
    const double dp = pi * state_.hbar / (4.0 * width);
    // Trim the Nyquist band to <p> +- 16 sigma_p.
    auto [p1, sp] = detail::sampled_momentum_moments(c.psi, state_.hbar);
    const double band = std::min(ps_.hi, std::abs(p1) + 16.0 * sp + 10.0 * dp);
    auto half = static_cast<std::size_t>(std::ceil(band / dp));
    UniformGrid pg(-static_cast<double>(half) * dp, static_cast<double>(half) * dp, 2 * half + 1);
    std::vector<complex> v(pg.size());
    // Tabulate the transform about the grid centre; the carrier e^{-i p c/hbar} is applied on lookup.
    shift_ = 0.5 * (g.min() + g.max());
    parallel_for(v.size(), [&](std::size_t i) {
      v[i] = detail::sampled_fourier(c.psi, pg[i], state_.hbar) * std::polar(1.0, pg[i] * shift_ / state_.hbar);
    });
    psi_hat_.emplace(pg, std::move(v));
    ps_ = {pg.min(), pg.max(), dp};
  }

  StateSpec state_;
  ChirpOptions opt_;
  Support qs_;
  mutable Support ps_;
  StateScales scales_;
  mutable std::optional<SampledWave> psi_hat_;
  mutable double shift_ = 0.0;
};

}  // namespace detail

/// Single tomogram value by quadrature of the amplitude integral.
inline double tomogram_point(const StateSpec& state, const TomographyFrame& frame, double X,
                             Representation rep = Representation::automatic) {
  if (frame.is_zero()) throw std::invalid_argument("tomogram_point: frame (0, 0) is the point mass delta(X)");
  return detail::WaveTomography(state).value(frame, X, rep);
}

/// Tomogram amplitude A = int psi(y) exp(i mu y^2/(2 hbar nu) - i X y/(hbar nu)) dy.
/// Closed forms for the oscillator family, quadrature for box and sampled states.
inline complex tomogram_amplitude(const StateSpec& state, const TomographyFrame& frame, double X) {
  detail::require_nu(frame, "tomogram_amplitude");
  const double hb = state.hbar;
  return std::visit(
      [&](const auto& k) -> complex {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HOEigen>) {
          return hermite_amplitude(k.n, frame, X, hb, k.varpi);
        } else if constexpr (std::is_same_v<K, Coherent>) {
          return coherent_amplitude(k.alpha, frame, X, hb, k.varpi);
        } else if constexpr (std::is_same_v<K, Cat>) {
          double sign = k.parity == Parity::even ? 1.0 : -1.0;
          return std::sqrt(cat_norm_squared(k.alpha, k.parity)) *
                 (coherent_amplitude(k.alpha, frame, X, hb, k.varpi) + sign * coherent_amplitude(-k.alpha, frame, X, hb, k.varpi));
        } else if constexpr (std::is_same_v<K, Superposition>) {
          return (hermite_amplitude(k.n, frame, X, hb, k.varpi) + hermite_amplitude(k.m, frame, X, hb, k.varpi)) /
                 std::sqrt(2.0);
        } else {
          return detail::WaveTomography(state).position_amplitude(frame, X);
        }
      },
      state.kind);
}

/// Tomogram on a grid from the wave function. Exact branches: nu = 0 gives
/// |psi(X/mu)|^2/|mu|, mu = 0 gives |psi-hat(X/nu)|^2/|nu|, (0, 0) gives the
/// atom delta(X). Otherwise the amplitude integral is evaluated in the
/// position representation when |nu| P >= |mu| Q (P, Q the natural momentum
/// and position scales of the state) and in the momentum representation
/// otherwise; box states always use the position representation.
/// Sampled states must fit the X grid (MassDeficitError otherwise).
inline Tomogram tomogram_from_wavefunction(const StateSpec& state, const TomographyFrame& frame, const UniformGrid& grid,
                                           Representation rep = Representation::automatic) {
  if (frame.is_zero()) return {frame, grid, std::vector<double>(grid.size(), 0.0), {{1.0, 0.0}}};
  detail::WaveTomography wt(state);
  if (state.is<CustomGrid>() && frame.mu != 0.0 && frame.nu != 0.0 &&
      (rep == Representation::momentum || (rep == Representation::automatic && wt.choose(frame) == Representation::momentum)))
    wt.momentum(0.0);  // build the momentum table before the parallel loop
  std::vector<double> v(grid.size());
  parallel_for(v.size(), [&](std::size_t i) { v[i] = wt.value(frame, grid[i], rep); });
  Tomogram t(frame, grid, std::move(v));
  if (state.is<CustomGrid>()) {
    double deficit = std::abs(t.mass() - 1.0);
    if (deficit > detail::kQuadratureMassTolerance)
      throw MassDeficitError("tomogram_from_wavefunction: tomogram mass " + std::to_string(t.mass()) +
                                 " on the X grid; the state's support exceeds the grid",
                             deficit);
  }
  return t;
}

/// Closed-form tomogram of an oscillator-family state at one point.
inline double closed_form_value(const StateSpec& state, const TomographyFrame& frame, double X) {
  const double hb = state.hbar;
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HOEigen>) return hermite_tomogram(k.n, frame, X, hb, k.varpi);
        else if constexpr (std::is_same_v<K, Coherent>) return coherent_tomogram(k.alpha, frame, X, hb, k.varpi);
        else if constexpr (std::is_same_v<K, Cat>) return cat_tomogram(k.alpha, k.parity, frame, X, hb, k.varpi);
        else if constexpr (std::is_same_v<K, Superposition>) return superposition_tomogram(k.n, k.m, frame, X, hb, k.varpi);
        else throw std::domain_error("closed_form_value: no closed form for this state");
      },
      state.kind);
}

inline bool has_closed_form(const StateSpec& s) { return !s.is<BoxEigen>() && !s.is<CustomGrid>(); }

/// Best available tomogram: closed forms for the oscillator family, the box
/// quadrature for box states, tomogram_from_wavefunction for sampled states.
inline Tomogram state_tomogram(const StateSpec& state, const TomographyFrame& frame, const UniformGrid& grid) {
  if (frame.is_zero()) return {frame, grid, std::vector<double>(grid.size(), 0.0), {{1.0, 0.0}}};
  if (const auto* b = std::get_if<BoxEigen>(&state.kind)) return box_tomogram(b->n, b->L, frame, grid, state.hbar);
  if (!has_closed_form(state)) return tomogram_from_wavefunction(state, frame, grid);
  std::vector<double> v(grid.size());
  parallel_for(v.size(), [&](std::size_t i) { v[i] = closed_form_value(state, frame, grid[i]); });
  return {frame, grid, std::move(v)};
}

// ---------------------------------------------------------------------------
// Wigner-function routes

namespace detail {

inline void require_density_matrix(const GridFunction2D<complex>& rho, double hbar) {
  const auto& xa = rho.x_axis();
  if (!(xa == rho.y_axis())) throw std::invalid_argument("wigner_from_density: rho needs identical x and x' axes");
  if (!(hbar > 0.0)) throw std::invalid_argument("wigner_from_density: hbar must be positive");
  double scale = rho.abs_max(), worst = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) worst = std::max(worst, std::abs(rho(i, j) - std::conj(rho(j, i))));
  if (worst > 1e-6 * std::max(scale, 1e-300))
    throw NumericalError("wigner_from_density: rho is not Hermitian (residual " + std::to_string(worst / scale) + ")");
}

inline Reconstructed wigner_sum(const GridFunction2D<complex>& rho, double p, double q, double hbar) {
  const auto& xa = rho.x_axis();
  const double reach = std::min(q - xa.min(), xa.max() - q);
  if (!(reach > 0.0)) return {};
  // A step of 2 dx keeps q +- u/2 on grid nodes when q is a node.
  const double du = 2.0 * xa.spacing();
  auto n = static_cast<std::size_t>(std::floor(2.0 * reach / du));
  if (n < 1) return {};
  const double U = static_cast<double>(n) * du;
  complex sum{0.0, 0.0};
  for (std::size_t k = 0; k <= 2 * n; ++k) {
    double u = -U + static_cast<double>(k) * du;
    double w = (k == 0 || k == 2 * n) ? 0.5 : 1.0;
    double ph = -p * u / hbar;
    sum += w * rho.bilinear(q + 0.5 * u, q - 0.5 * u) * complex(std::cos(ph), std::sin(ph));
  }
  sum *= du;
  return {sum.real(), std::abs(sum.imag())};
}

}  // namespace detail

/// W(p, q) = int rho(q + u/2, q - u/2) e^{-i p u/hbar} du, trapezoid rule in
/// u with step twice the grid spacing and bilinear interpolation of rho.
/// Normalized so that the phase-space integral of W/(2 pi hbar) is tr rho.
/// rho must be Hermitian on a square grid (tolerance 1e-6).
inline Reconstructed wigner_from_density(const GridFunction2D<complex>& rho, double p, double q, double hbar) {
  detail::require_density_matrix(rho, hbar);
  return detail::wigner_sum(rho, p, q, hbar);
}

/// Closed-form Wigner functions (normalized as wigner_from_density) for
/// HOEigen, W = 2 (-1)^n e^{-r^2} L_n(2 r^2), r^2 = (varpi q^2 + p^2/varpi)/hbar,
/// and Coherent states; empty for other kinds.
inline std::optional<double> analytic_wigner(const StateSpec& s, double q, double p) {
  const double hb = s.hbar;
  if (const auto* h = std::get_if<HOEigen>(&s.kind)) {
    const double r2 = (h->varpi * q * q + p * p / h->varpi) / hb;
    return 2.0 * (h->n % 2 ? -1.0 : 1.0) * std::exp(-r2) * std::assoc_laguerre(static_cast<unsigned>(h->n), 0u, 2.0 * r2);
  }
  if (const auto* c = std::get_if<Coherent>(&s.kind)) {
    const double dq = q - coherent_mean_q(c->alpha, hb, c->varpi), dp = p - coherent_mean_p(c->alpha, hb, c->varpi);
    return 2.0 * std::exp(-(c->varpi * dq * dq + dp * dp / c->varpi) / hb);
  }
  return std::nullopt;
}

/// wigner_from_density on a (q, p) grid; the real parts, x-axis q.
inline GridFunction2D<double> wigner_grid_from_density(const GridFunction2D<complex>& rho, const UniformGrid& q_axis,
                                                       const UniformGrid& p_axis, double hbar) {
  detail::require_density_matrix(rho, hbar);
  return GridFunction2D<double>::sample(q_axis, p_axis, [&](double q, double p) { return detail::wigner_sum(rho, p, q, hbar).value; });
}

/// (1/(2 pi hbar)) int W(q, p) delta(X - mu q - nu p) dq dp by the same line
/// quadrature as radon_density; W is given on a (q, p) grid. Frame (0, 0)
/// gives the atom delta(X).
inline Tomogram tomogram_from_wigner(const GridFunction2D<double>& w, const TomographyFrame& frame,
                                     const UniformGrid& grid, double hbar) {
  if (frame.is_zero()) return {frame, grid, std::vector<double>(grid.size(), 0.0), {{1.0, 0.0}}};
  if (!(hbar > 0.0)) throw std::invalid_argument("tomogram_from_wigner: hbar must be positive");
  std::vector<double> v(grid.size());
  parallel_for(v.size(), [&](std::size_t i) {
    v[i] = detail::line_integral(w.x_axis(), w.y_axis(), frame, grid[i],
                                 [&](double q, double p) { return w.bilinear(q, p); }) /
           (2.0 * pi * hbar);
  });
  // Line integrals of a Wigner function are non-negative; clamp quadrature
  // noise and reject anything larger.
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  for (double& x : v) {
    if (x < 0.0) {
      if (x < -1e-3 * peak)
        throw NumericalError("tomogram_from_wigner: negative tomogram value " + std::to_string(x) +
                             "; the Wigner grid is too coarse");
      x = 0.0;
    }
  }
  return {frame, grid, std::move(v)};
}

}  // namespace tomolab
