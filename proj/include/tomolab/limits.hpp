#pragma once

// Planck-limit (hbar -> 0, state family fixed by a scaling law) and
// Ehrenfest-limit (hbar -> 0 at fixed mean energy) studies.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tomolab/classical.hpp"
#include "tomolab/kernel.hpp"
#include "tomolab/quantum.hpp"
#include "tomolab/special.hpp"
#include "tomolab/state.hpp"

namespace tomolab {

enum class Verdict { converged, not_converged, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::not_converged: return "not-converged";
    default: return "inconclusive";
  }
}

/// Least-squares line through (log x, log y).
struct PowerFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_power_law: need two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_power_law: values must be positive");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, syy += ly * ly;
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  PowerFit f;
  f.exponent = cxy / vx;
  f.intercept = (sy - f.exponent * sx) / n;
  f.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

/// Result of a limit study. parameter_values are strictly monotone;
/// fitted_exponent is set only when the log-log fit has R^2 >= 0.98.
struct LimitReport {
  static constexpr double kMinR2 = 0.98;

  std::string study;
  std::string parameter_name;  // "hbar" or "n"
  std::string regime;          // "planck" or "ehrenfest"
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<double> parameter_values;
  std::vector<double> distances;
  std::optional<double> fitted_exponent;
  double r2 = 0.0;
  Verdict verdict = Verdict::inconclusive;
  nlohmann::ordered_json details = nlohmann::ordered_json::array();
  std::vector<std::string> artifacts;
  std::vector<Tomogram> tomograms;  // one per parameter value, for artifact output

  /// Fits distances against parameter_values; returns whether an exponent was accepted.
  bool fit() {
    fitted_exponent.reset();
    if (distances.size() < 2 || std::any_of(distances.begin(), distances.end(), [](double d) { return !(d > 0.0); }))
      return false;
    PowerFit f = fit_power_law(parameter_values, distances);
    r2 = f.r2;
    if (f.r2 >= kMinR2) fitted_exponent = f.exponent;
    return fitted_exponent.has_value();
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["study"] = study;
    j["regime"] = regime;
    j["parameter_name"] = parameter_name;
    j["parameters"] = parameters;
    j["values"] = parameter_values;
    j["distances"] = distances;
    j["exponent"] = fitted_exponent ? nlohmann::ordered_json(*fitted_exponent) : nlohmann::ordered_json(nullptr);
    j["r2"] = r2;
    j["verdict"] = to_string(verdict);
    j["details"] = details;
    j["artifacts"] = artifacts;
    return j;
  }
};

/// Smooth bounded test function for weak-convergence checks.
struct TestFunction {
  std::string name;
  std::function<double(double)> f;
  double decay = 1.0;  // length scale beyond which |f| is negligible
};

/// Gaussians of widths {0.5, 1, 2} centred at {-1, 0, 1}, and cos(X) e^{-X^2/4}.
inline std::vector<TestFunction> default_test_battery() {
  std::vector<TestFunction> out;
  for (double w : {0.5, 1.0, 2.0})
    for (double c : {-1.0, 0.0, 1.0}) {
      char name[64];
      std::snprintf(name, sizeof name, "gauss(c=%g,w=%g)", c, w);
      out.push_back({name, [w, c](double x) { return std::exp(-0.5 * (x - c) * (x - c) / (w * w)); }, std::abs(c) + 8 * w});
    }
  out.push_back({"cos*gauss", [](double x) { return std::cos(x) * std::exp(-0.25 * x * x); }, 12.0});
  return out;
}

namespace detail {

inline void require_monotone(const std::vector<double>& v, const char* who) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    bool up = v[1] > v[0];
    if (up ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1]))
      throw std::invalid_argument(std::string(who) + ": parameter values must be strictly monotone");
  }
}

inline void require_geometric(const std::vector<double>& v, std::size_t min_count, const char* who) {
  if (v.size() < min_count)
    throw std::invalid_argument(std::string(who) + ": needs at least " + std::to_string(min_count) + " values");
  require_monotone(v, who);
  for (double x : v)
    if (!(x > 0.0)) throw std::invalid_argument(std::string(who) + ": values must be positive");
  const double r = v[1] / v[0];
  for (std::size_t i = 2; i < v.size(); ++i)
    if (std::abs(v[i] / v[i - 1] / r - 1.0) > 1e-6) throw std::invalid_argument(std::string(who) + ": sequence is not geometric");
}

inline void require_normalized(const Tomogram& t, const char* who) {
  double r = normalization_residual(t);
  if (r > 1e-3) throw NumericalError(std::string(who) + ": tomogram normalization residual " + std::to_string(r) + " exceeds 1e-3");
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

inline bool non_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) return false;
  return true;
}

template <class Fn>
Tomogram sample_tomogram(const TomographyFrame& f, const UniformGrid& g, Fn&& fn) {
  std::vector<double> v(g.size());
  parallel_for(v.size(), [&](std::size_t i) { v[i] = fn(g[i]); });
  return {f, g, std::move(v)};
}

// Grid over [lo, hi] with spacing at most h.
inline UniformGrid grid_with_spacing(double lo, double hi, double h) {
  auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
  return {lo, hi, std::max<std::size_t>(n, 3)};
}

}  // namespace detail

/// Running integral of a tomogram's smooth part, for windowed averages.
class RunningIntegral {
 public:
  explicit RunningIntegral(const Tomogram& t)
      : grid_(t.grid()), cum_(cumulative_trapezoid(std::span<const double>(t.values()), t.grid().spacing())) {}
  RunningIntegral(const UniformGrid& g, const std::vector<double>& v)
      : grid_(g), cum_(cumulative_trapezoid(std::span<const double>(v), g.spacing())) {}

  /// int_{-inf}^{x} (linear interpolation of the cumulative trapezoid)
  double at(double x) const {
    if (x <= grid_.min()) return 0.0;
    if (x >= grid_.max()) return cum_.back();
    return interpolate_linear<double>(grid_, cum_, x);
  }
  /// Mean over [x - w/2, x + w/2].
  double average(double x, double w) const { return (at(x + 0.5 * w) - at(x - 0.5 * w)) / w; }

 private:
  UniformGrid grid_;
  std::vector<double> cum_;
};

/// e = max over tests |int W phi dX - N phi(center)|, N the tomogram mass.
inline double weak_delta_error(const Tomogram& t, const std::vector<TestFunction>& tests, double center) {
  double m = t.mass(), worst = 0.0;
  for (const auto& tf : tests) worst = std::max(worst, std::abs(t.integrate(tf.f) - m * tf.f(center)));
  return worst;
}

// ---------------------------------------------------------------------------
// Planck limit

/// psi(x) = hbar^{gamma/2} Psi(hbar^gamma x) for a normalized profile Psi.
inline StateSpec planck_scaled_state(const CustomGrid& profile, double gamma, double hbar) {
  if (gamma < -1.0 || gamma > 0.0) throw std::invalid_argument("planck_scaled_state: gamma must lie in [-1, 0]");
  if (!(hbar > 0.0)) throw std::invalid_argument("planck_scaled_state: hbar must be positive");
  validate_state({profile, 1.0});
  const auto& g = profile.psi.grid();
  const double s = std::pow(hbar, -gamma);  // x = u hbar^{-gamma}
  const double amp = std::pow(hbar, 0.5 * gamma);
  std::vector<complex> v = profile.psi.values();
  for (auto& z : v) z *= amp;
  return {CustomGrid{SampledWave(UniformGrid(g.min() * s, g.max() * s, g.size()), std::move(v)), profile.source}, hbar};
}

inline Tomogram planck_scaled_tomogram(const CustomGrid& profile, double gamma, double hbar, const TomographyFrame& frame,
                                       const UniformGrid& x_grid) {
  return tomogram_from_wavefunction(planck_scaled_state(profile, gamma, hbar), frame, x_grid);
}

/// Weak convergence of a family of states (decreasing hbar) to delta(X - center).
inline LimitReport weak_delta_convergence(const std::vector<StateSpec>& states, const TomographyFrame& frame,
                                          const std::vector<TestFunction>& tests, double center,
                                          std::size_t grid_points = 8001) {
  std::vector<double> hb;
  for (const auto& s : states) hb.push_back(s.hbar);
  detail::require_geometric(hb, 4, "weak_delta_convergence");
  if (hb[1] > hb[0]) throw std::invalid_argument("weak_delta_convergence: hbar must decrease");
  LimitReport r;
  r.study = "weak_delta";
  r.parameter_name = "hbar";
  r.regime = "planck";
  r.parameters = {{"frame", {frame.mu, frame.nu}}, {"center", center}, {"tests", tests.size()}};
  r.parameter_values = hb;
  r.distances.resize(states.size());
  r.tomograms.resize(states.size(), Tomogram::point(frame, 0.0));
  std::vector<nlohmann::ordered_json> det(states.size());
  parallel_for(states.size(), [&](std::size_t k) {
    XRange xr = natural_x_range(states[k], frame);
    double lo = std::min(xr.center - xr.half_width, center - 1.0), hi = std::max(xr.center + xr.half_width, center + 1.0);
    Tomogram t = state_tomogram(states[k], frame, UniformGrid(lo, hi, grid_points));
    detail::require_normalized(t, "weak_delta_convergence");
    r.distances[k] = weak_delta_error(t, tests, center);
    det[k] = {{"hbar", hb[k]}, {"mass", t.mass()}, {"mean", t.mean()}, {"variance", t.variance()},
              {"wasserstein1", wasserstein1(t, Tomogram::point(frame, center))}};
    r.tomograms[k] = std::move(t);
  });
  for (auto& d : det) r.details.push_back(std::move(d));
  bool fitted = r.fit();
  if (!fitted) r.verdict = Verdict::inconclusive;
  else r.verdict = detail::strictly_decreasing(r.distances) && *r.fitted_exponent > 0.0 ? Verdict::converged : Verdict::not_converged;
  return r;
}

/// Interference between phi_n and phi_m as hbar -> 0. The cross term is
/// hbar^{-1/2} G(X/sqrt(hbar)), so its L1 mass is hbar-independent and its
/// signed integral vanishes; the fitted decay uses the Wasserstein-1 norm of
/// the signed interference measure, int |int_{-inf}^X cross| dX.
inline LimitReport interference_decay(int n, int m, const TomographyFrame& frame, const std::vector<double>& hbar_values,
                                      std::size_t grid_points = 8001) {
  if (n == m || n < 0 || m < 0) throw std::invalid_argument("interference_decay: requires distinct n, m >= 0");
  if (frame.nu == 0.0) throw std::invalid_argument("interference_decay: requires nu != 0");
  detail::require_geometric(hbar_values, 5, "interference_decay");
  for (double h : hbar_values)
    if (h < 1e-4 * (1 - 1e-9) || h > 1e-1 * (1 + 1e-9)) throw std::invalid_argument("interference_decay: hbar values must lie in [1e-4, 1e-1]");
  LimitReport r;
  r.study = "interference_decay";
  r.parameter_name = "hbar";
  r.regime = "planck";
  r.parameters = {{"n", n}, {"m", m}, {"frame", {frame.mu, frame.nu}}, {"norm", "wasserstein1"}};
  r.parameter_values = hbar_values;
  const std::size_t K = hbar_values.size();
  r.distances.resize(K);
  r.tomograms.resize(K, Tomogram::point(frame, 0.0));
  std::vector<nlohmann::ordered_json> det(K);
  const double zeta = std::hypot(frame.mu, frame.nu);
  parallel_for(K, [&](std::size_t k) {
    const double h = hbar_values[k];
    const double half = (std::sqrt(2.0 * std::max(n, m) + 1.0) + 10.0) * std::sqrt(h) * zeta;
    UniformGrid g(-half, half, grid_points);
    std::vector<double> cross(g.size()), absval(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      cross[i] = superposition_cross_term(n, m, frame, g[i], h);
      absval[i] = std::abs(cross[i]);
    }
    auto cum = cumulative_trapezoid(std::span<const double>(cross), g.spacing());
    std::vector<double> abscum(cum.size());
    for (std::size_t i = 0; i < cum.size(); ++i) abscum[i] = std::abs(cum[i]);
    Tomogram t = detail::sample_tomogram(frame, g, [&](double x) { return superposition_tomogram(n, m, frame, x, h); });
    detail::require_normalized(t, "interference_decay");
    r.distances[k] = trapezoid(abscum, g.spacing());
    det[k] = {{"hbar", h},
              {"wasserstein1", r.distances[k]},
              {"l1", trapezoid(absval, g.spacing())},
              {"signed", cum.back()},
              {"mass", t.mass()}};
    r.tomograms[k] = std::move(t);
  });
  for (auto& d : det) r.details.push_back(std::move(d));
  if (!r.fit()) r.verdict = Verdict::inconclusive;
  else r.verdict = *r.fitted_exponent > 0.0 && detail::strictly_decreasing(r.distances) ? Verdict::converged : Verdict::not_converged;
  return r;
}

/// Cat-state interference integral and weak limit as hbar -> 0 at fixed alpha.
inline LimitReport cat_interference_planck(complex alpha, const TomographyFrame& frame, const std::vector<double>& hbar_values,
                                           std::size_t grid_points = 8001) {
  detail::require_geometric(hbar_values, 4, "cat_interference_planck");
  detail::require_frame(frame, "cat_interference_planck");
  LimitReport r;
  r.study = "cat_interference";
  r.parameter_name = "hbar";
  r.regime = "planck";
  const double target = 2.0 * std::exp(-2.0 * std::norm(alpha));
  r.parameters = {{"alpha", {alpha.real(), alpha.imag()}}, {"frame", {frame.mu, frame.nu}}, {"overlap_target", target}};
  r.parameter_values = hbar_values;
  const std::size_t K = hbar_values.size();
  r.distances.resize(K);
  r.tomograms.resize(K, Tomogram::point(frame, 0.0));
  std::vector<nlohmann::ordered_json> det(K);
  std::vector<char> ok(K, 0);
  const auto tests = default_test_battery();
  parallel_for(K, [&](std::size_t k) {
    const double h = hbar_values[k];
    StateSpec even{Cat{alpha, Parity::even, 1.0}, h}, odd{Cat{alpha, Parity::odd, 1.0}, h};
    XRange xr = natural_x_range(even, frame);
    UniformGrid g(xr.center - xr.half_width, xr.center + xr.half_width, grid_points);
    std::vector<double> iv(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) iv[i] = cat_interference(alpha, frame, g[i], h);
    const double integral = trapezoid(iv, g.spacing());
    Tomogram te = state_tomogram(even, frame, g), to = state_tomogram(odd, frame, g);
    detail::require_normalized(te, "cat_interference_planck");
    detail::require_normalized(to, "cat_interference_planck");
    const double ne = cat_norm_squared(alpha, Parity::even), no = cat_norm_squared(alpha, Parity::odd);
    const double coef_even = ne * (2.0 + integral), coef_odd = no * (2.0 - integral);
    r.distances[k] = weak_delta_error(te, tests, 0.0);
    ok[k] = std::abs(integral - target) < 1e-6 && std::abs(te.mass() - 1.0) < 1e-6 && std::abs(to.mass() - 1.0) < 1e-6 &&
            std::abs(coef_even - 1.0) < 1e-6 && std::abs(coef_odd - 1.0) < 1e-6;
    det[k] = {{"hbar", h},
              {"interference_integral", integral},
              {"integral_error", integral - target},
              {"mass_even", te.mass()},
              {"mass_odd", to.mass()},
              {"weak_coefficient_even", coef_even},
              {"weak_coefficient_odd", coef_odd},
              {"weak_error_odd", weak_delta_error(to, tests, 0.0)}};
    r.tomograms[k] = std::move(te);
  });
  for (auto& d : det) r.details.push_back(std::move(d));
  bool all_ok = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  if (!r.fit()) r.verdict = Verdict::inconclusive;
  else r.verdict = all_ok && detail::strictly_decreasing(r.distances) && *r.fitted_exponent > 0.0 ? Verdict::converged : Verdict::not_converged;
  return r;
}

// ---------------------------------------------------------------------------
// Ehrenfest limit: coherent and cat states with fixed (q_alpha, p_alpha)

/// alpha(hbar) = (q + i p)/sqrt(2 hbar), the amplitude with fixed phase-space centre.
inline complex ehrenfest_alpha(double q, double p, double hbar) { return complex(q, p) / std::sqrt(2.0 * hbar); }

inline LimitReport ehrenfest_coherent(double q_alpha, double p_alpha, const TomographyFrame& frame,
                                      const std::vector<double>& hbar_values) {
  detail::require_geometric(hbar_values, 3, "ehrenfest_coherent");
  detail::require_frame(frame, "ehrenfest_coherent");
  LimitReport r;
  r.study = "ehrenfest_coherent";
  r.parameter_name = "hbar";
  r.regime = "ehrenfest";
  const double target = trajectory_tomogram(rest_point(q_alpha, p_alpha), 0.0, frame).location;
  r.parameters = {{"q_alpha", q_alpha}, {"p_alpha", p_alpha}, {"frame", {frame.mu, frame.nu}}, {"target", target}};
  r.parameter_values = hbar_values;
  const std::size_t K = hbar_values.size();
  r.distances.resize(K);
  r.tomograms.resize(K, Tomogram::point(frame, 0.0));
  std::vector<nlohmann::ordered_json> det(K);
  std::vector<double> widths(K);
  std::vector<char> peak_ok(K, 0);
  const double zeta = frame.norm();
  parallel_for(K, [&](std::size_t k) {
    const double h = hbar_values[k];
    const complex a = ehrenfest_alpha(q_alpha, p_alpha, h);
    const double sigma = std::sqrt(0.5 * h) * zeta;
    const double lo = std::min(0.0, target) - 10.0 * sigma, hi = std::max(0.0, target) + 10.0 * sigma;
    UniformGrid g = detail::grid_with_spacing(lo, hi, sigma / 20.0);
    Tomogram t = detail::sample_tomogram(frame, g, [&](double x) { return coherent_tomogram(a, frame, x, h); });
    detail::require_normalized(t, "ehrenfest_coherent");
    const auto& v = t.values();
    std::size_t ip = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    const double peak_error = std::abs(g[ip] - target);
    peak_ok[k] = peak_error < g.spacing();
    widths[k] = std::sqrt(t.variance());
    r.distances[k] = wasserstein1(t, Tomogram::point(frame, target));
    det[k] = {{"hbar", h},          {"peak", g[ip]},       {"peak_error", peak_error}, {"cell", g.spacing()},
              {"width", widths[k]}, {"width_expected", sigma}, {"mass", t.mass()}};
    r.tomograms[k] = std::move(t);
  });
  for (auto& d : det) r.details.push_back(std::move(d));
  PowerFit wf = fit_power_law(hbar_values, widths);
  r.parameters["width_exponent"] = wf.exponent;
  r.parameters["width_r2"] = wf.r2;
  bool peaks = std::all_of(peak_ok.begin(), peak_ok.end(), [](char c) { return c != 0; });
  if (!r.fit()) r.verdict = Verdict::inconclusive;
  else r.verdict = peaks && detail::strictly_decreasing(r.distances) && *r.fitted_exponent > 0.0 ? Verdict::converged : Verdict::not_converged;
  return r;
}

/// Zero crossings of the cat interference term on [lo, hi], counted from its
/// phase (robust where the term itself underflows).
inline std::size_t cat_zero_crossings(complex alpha, const TomographyFrame& frame, double hbar, double lo, double hi) {
  const double span = std::abs(cat_interference_phase(alpha, frame, hi, hbar) - cat_interference_phase(alpha, frame, lo, hbar));
  auto n = static_cast<std::size_t>(std::max(1000.0, 40.0 * span / pi));
  UniformGrid g(lo, hi, n);
  std::size_t count = 0;
  double prev = std::floor((cat_interference_phase(alpha, frame, g[0], hbar) - 0.5 * pi) / pi);
  for (std::size_t i = 1; i < g.size(); ++i) {
    double cur = std::floor((cat_interference_phase(alpha, frame, g[i], hbar) - 0.5 * pi) / pi);
    count += static_cast<std::size_t>(std::abs(cur - prev));
    prev = cur;
  }
  return count;
}

inline LimitReport ehrenfest_cat(double q_alpha, double p_alpha, const TomographyFrame& frame,
                                 const std::vector<double>& hbar_values, Parity parity = Parity::even,
                                 double window = 1.0) {
  detail::require_geometric(hbar_values, 3, "ehrenfest_cat");
  detail::require_frame(frame, "ehrenfest_cat");
  LimitReport r;
  r.study = "ehrenfest_cat";
  r.parameter_name = "hbar";
  r.regime = "ehrenfest";
  const double target = std::abs(trajectory_tomogram(rest_point(q_alpha, p_alpha), 0.0, frame).location);
  r.parameters = {{"q_alpha", q_alpha},
                  {"p_alpha", p_alpha},
                  {"frame", {frame.mu, frame.nu}},
                  {"parity", parity == Parity::even ? "even" : "odd"},
                  {"target", target},
                  {"crossing_window", {-window, window}}};
  r.parameter_values = hbar_values;
  const std::size_t K = hbar_values.size();
  r.distances.resize(K);
  r.tomograms.resize(K, Tomogram::point(frame, 0.0));
  std::vector<nlohmann::ordered_json> det(K);
  std::vector<double> crossings(K);
  const double zeta = frame.norm();
  const Tomogram endpoints(frame, UniformGrid{}, {}, {{0.5, -target}, {0.5, target}});
  parallel_for(K, [&](std::size_t k) {
    const double h = hbar_values[k];
    const complex a = ehrenfest_alpha(q_alpha, p_alpha, h);
    const double sigma = std::sqrt(0.5 * h) * zeta;
    UniformGrid g = detail::grid_with_spacing(-target - 10.0 * sigma, target + 10.0 * sigma, sigma / 20.0);
    Tomogram t = detail::sample_tomogram(frame, g, [&](double x) { return cat_tomogram(a, parity, frame, x, h); });
    detail::require_normalized(t, "ehrenfest_cat");
    RunningIntegral run(t);
    const double left = run.at(0.0), right = t.smooth_mass() - left;
    crossings[k] = static_cast<double>(cat_zero_crossings(a, frame, h, -window, window));
    // Local average of N^2 I over three fringe periods, across the window.
    const double slope = std::abs(cat_interference_phase(a, frame, window, h) - cat_interference_phase(a, frame, -window, h)) / (2.0 * window);
    double local = 0.0, peak = 0.0;
    const double n2 = cat_norm_squared(a, parity);
    if (slope > 0.0) {
      const double period = pi / slope * 2.0;
      UniformGrid wg = detail::grid_with_spacing(-window, window, period / 20.0);
      std::vector<double> iv(wg.size());
      for (std::size_t i = 0; i < wg.size(); ++i) {
        iv[i] = n2 * cat_interference(a, frame, wg[i], h);
        peak = std::max(peak, std::abs(iv[i]));
      }
      RunningIntegral ri(wg, iv);
      for (std::size_t i = 0; i < wg.size(); ++i)
        if (std::abs(wg[i]) + 1.5 * period <= window) local = std::max(local, std::abs(ri.average(wg[i], 3.0 * period)));
    }
    r.distances[k] = wasserstein1(t, endpoints);
    det[k] = {{"hbar", h},
              {"alpha_abs2", std::norm(a)},
              {"norm_squared_even_minus_half", cat_norm_squared(a, Parity::even) - 0.5},
              {"norm_squared_odd_minus_half", cat_norm_squared(a, Parity::odd) - 0.5},
              {"mass_left", left},
              {"mass_right", right},
              {"zero_crossings", crossings[k]},
              {"interference_peak", peak},
              {"interference_local_average", local},
              {"mass", t.mass()}};
    r.tomograms[k] = std::move(t);
  });
  for (auto& d : det) r.details.push_back(std::move(d));
  bool halves = true;
  for (const auto& d : r.details)
    halves = halves && std::abs(d["mass_left"].get<double>() - 0.5) < 1e-3 && std::abs(d["mass_right"].get<double>() - 0.5) < 1e-3;
  std::vector<double> ratios;
  for (std::size_t k = 1; k < K; ++k)
    ratios.push_back(crossings[k - 1] > 0 ? crossings[k] / crossings[k - 1] : 0.0);
  r.parameters["crossing_ratios"] = ratios;
  r.parameters["hbar_ratio"] = hbar_values[1] / hbar_values[0];
  if (!r.fit()) r.verdict = Verdict::inconclusive;
  else r.verdict = halves && detail::strictly_decreasing(r.distances) && *r.fitted_exponent > 0.0 ? Verdict::converged : Verdict::not_converged;
  return r;
}

// ---------------------------------------------------------------------------
// Ehrenfest limit: particle in a box at unit energy

namespace detail {

// Support edges of the classical box tomogram.
inline std::vector<double> box_edges(const TomographyFrame& f, double L) {
  const double v = std::sqrt(2.0) * f.nu;
  return {-v, f.mu * L - v, v, f.mu * L + v};
}

}  // namespace detail

/// Windowed L1 distance between a box tomogram and the classical W_inf on a
/// grid, excluding +-exclusion_cells around the four support edges.
inline double box_windowed_distance(const Tomogram& t, double window, double L, std::size_t exclusion_cells) {
  const auto& g = t.grid();
  const TomographyFrame& f = t.frame();
  auto edges = detail::box_edges(f, L);
  RunningIntegral run(t);
  std::vector<double> diff(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool skip = false;
    for (double e : edges) skip = skip || std::abs(g[i] - e) <= static_cast<double>(exclusion_cells) * g.spacing();
    if (!skip) diff[i] = std::abs(run.average(g[i], window) - classical_box_tomogram(g[i], f, L));
  }
  return trapezoid(diff, g.spacing());
}

struct BoxStudyOptions {
  std::size_t exclusion_cells = 2;
  double momentum_mu = 0.02;           // frame (momentum_mu, 1) for the momentum concentration check
  double momentum_window = 0.1;        // |X -+ sqrt2| < window
  double position_nu = 1e-3;           // frame (1, position_nu) for the 1/L plateau check
  int exact_check_max_n = 200;         // exact quadrature diagnostic for n up to this
};

inline LimitReport ehrenfest_box(double L, const std::vector<int>& n_values, const std::vector<TomographyFrame>& frames,
                                 BoxStudyOptions opt = {}) {
  if (!(L > 0.0)) throw std::invalid_argument("ehrenfest_box: L must be positive");
  if (n_values.empty() || frames.empty()) throw std::invalid_argument("ehrenfest_box: needs n values and frames");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 10) throw std::invalid_argument("ehrenfest_box: n >= 10 required");
    if (i > 0 && n_values[i] <= n_values[i - 1]) throw std::invalid_argument("ehrenfest_box: n values must increase");
  }
  for (const auto& f : frames)
    if (f.mu == 0.0 || f.nu == 0.0) throw std::invalid_argument("ehrenfest_box: frames need mu != 0 and nu != 0");
  LimitReport r;
  r.study = "ehrenfest_box";
  r.parameter_name = "n";
  r.regime = "ehrenfest";
  nlohmann::ordered_json fr = nlohmann::ordered_json::array();
  for (const auto& f : frames) fr.push_back({f.mu, f.nu});
  r.parameters = {{"L", L}, {"frames", fr}, {"exclusion_cells", opt.exclusion_cells}, {"route", "stationary_phase"}};
  for (int n : n_values) r.parameter_values.push_back(n);
  const std::size_t K = n_values.size();
  r.distances.resize(K);
  r.tomograms.resize(K, Tomogram::point(frames[0], 0.0));
  std::vector<nlohmann::ordered_json> det(K);
  parallel_for(K, [&](std::size_t k) {
    const int n = n_values[k];
    nlohmann::ordered_json per_frame = nlohmann::ordered_json::array();
    double worst = 0.0;
    for (std::size_t j = 0; j < frames.size(); ++j) {
      const auto& f = frames[j];
      auto edges = detail::box_edges(f, L);
      const double lo = *std::min_element(edges.begin(), edges.end()) - 0.1;
      const double hi = *std::max_element(edges.begin(), edges.end()) + 0.1;
      const double window = box_cross_term_period(n, L, f);
      UniformGrid g = detail::grid_with_spacing(lo, hi, window / 40.0);
      Tomogram t = detail::sample_tomogram(f, g, [&](double x) { return box_tomogram_stationary_phase(n, L, f, x); });
      const double d = box_windowed_distance(t, window, L, opt.exclusion_cells);
      worst = std::max(worst, d);
      nlohmann::ordered_json e = {{"frame", {f.mu, f.nu}}, {"l1", d}, {"window", window},
                                  {"normalization_residual", normalization_residual(t)}};
      if (n <= opt.exact_check_max_n) {
        // Exact quadrature at hbar = sqrt2 L/(n pi), sampled at window/8.
        UniformGrid ge = detail::grid_with_spacing(lo, hi, window / 8.0);
        Tomogram te = box_tomogram(n, L, f, ge, box_ehrenfest_hbar(n, L));
        e["exact_l1"] = box_windowed_distance(te, window, L, static_cast<std::size_t>(std::ceil(opt.exclusion_cells * g.spacing() / ge.spacing())));
        e["exact_normalization_residual"] = normalization_residual(te);
      }
      per_frame.push_back(std::move(e));
      if (j == 0) r.tomograms[k] = std::move(t);
    }
    r.distances[k] = worst;
    det[k] = {{"n", n}, {"hbar", box_ehrenfest_hbar(n, L)}, {"frames", std::move(per_frame)}};
  });
  for (auto& d : det) r.details.push_back(std::move(d));

  // Marginal checks at the largest n.
  const int n_top = n_values.back();
  {
    TomographyFrame f{1.0, opt.position_nu};
    const double window = box_cross_term_period(n_top, L, f);
    UniformGrid g = detail::grid_with_spacing(-0.1, L + 0.1, window / 40.0);
    Tomogram t = detail::sample_tomogram(f, g, [&](double x) { return box_tomogram_stationary_phase(n_top, L, f, x); });
    RunningIntegral run(t);
    double plateau = (run.at(0.8 * L) - run.at(0.2 * L)) / (0.6 * L);
    r.parameters["position_plateau"] = plateau;
    r.parameters["position_plateau_expected"] = 1.0 / L;
  }
  {
    TomographyFrame f{opt.momentum_mu, 1.0};
    const double hb = box_ehrenfest_hbar(n_top, L);
    const double r2 = std::sqrt(2.0);
    UniformGrid g(-2.0, 2.0, 8001);
    Tomogram t = box_tomogram(n_top, L, f, g, hb);
    RunningIntegral run(t);
    double near = (run.at(r2 + opt.momentum_window) - run.at(r2 - opt.momentum_window)) +
                  (run.at(-r2 + opt.momentum_window) - run.at(-r2 - opt.momentum_window));
    r.parameters["momentum_concentration"] = near;
    r.parameters["momentum_grid_mass"] = t.mass();
    r.parameters["momentum_n"] = n_top;
  }
  r.fit();
  const bool plateau_ok = std::abs(r.parameters["position_plateau"].get<double>() - 1.0 / L) < 0.05 / L;
  r.verdict = detail::non_increasing(r.distances) && r.distances.back() < 0.05 && plateau_ok ? Verdict::converged
                                                                                             : Verdict::not_converged;
  return r;
}

// ---------------------------------------------------------------------------
// Ehrenfest limit: harmonic oscillator at unit energy, hbar = 1/n

/// Hermite tomogram at hbar = 1/n rebuilt from the parabolic-cylinder
/// asymptotic: W = sqrt(n/pi)/n! U^2(-(n + 1/2), sqrt(2n) X/|zeta|)/|zeta|.
inline double oscillator_tomogram_parabolic(int n, const TomographyFrame& frame, double X) {
  const double z = frame.norm();
  const double a = -(n + 0.5);
  const double x = std::sqrt(2.0 * n) * std::abs(X) / z;
  const double shape = parabolic_u_shape(a, x);
  const double log_w = 0.5 * std::log(n / pi) - log_gamma(n + 1.0) + 2.0 * parabolic_u_log_prefactor(a);
  return std::exp(log_w) * shape * shape / z;
}

/// Local period of the sin^2 oscillation of W_n at hbar = 1/n,
/// pi/((n + 1/2) sqrt2 sqrt(1 - xi^2)) with xi = |X|/(sqrt2 |zeta|).
inline double oscillator_local_period(int n, const TomographyFrame& frame, double X) {
  const double z = frame.norm();
  const double xi = std::abs(X) / (std::sqrt(2.0) * z);
  return z * pi / ((n + 0.5) * std::sqrt(2.0) * std::sqrt(std::max(1.0 - xi * xi, 1e-12)));
}

struct OscillatorStudyOptions {
  double window_periods = 3.0;
  double compare_half_width = 1.3;  // |X| <= this (frame (1, 0) units)
  double forbidden_X = 2.0;
};

inline LimitReport ehrenfest_oscillator(const std::vector<int>& n_values, const TomographyFrame& frame = {1.0, 0.0},
                                        OscillatorStudyOptions opt = {}) {
  if (n_values.empty()) throw std::invalid_argument("ehrenfest_oscillator: needs n values");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 20) throw std::invalid_argument("ehrenfest_oscillator: n >= 20 required");
    if (i > 0 && n_values[i] <= n_values[i - 1]) throw std::invalid_argument("ehrenfest_oscillator: n values must increase");
  }
  detail::require_frame(frame, "ehrenfest_oscillator");
  LimitReport r;
  r.study = "ehrenfest_oscillator";
  r.parameter_name = "n";
  r.regime = "ehrenfest";
  const double z = frame.norm();
  r.parameters = {{"frame", {frame.mu, frame.nu}},
                  {"window_periods", opt.window_periods},
                  {"compare_half_width", opt.compare_half_width * z},
                  {"classical_at_zero", classical_oscillator_tomogram(0.0, frame, 1.0)}};
  for (int n : n_values) r.parameter_values.push_back(n);
  const std::size_t K = n_values.size();
  r.distances.resize(K);
  r.tomograms.resize(K, Tomogram::point(frame, 0.0));
  std::vector<nlohmann::ordered_json> det(K);
  std::vector<char> ok(K, 0);
  parallel_for(K, [&](std::size_t k) {
    const int n = n_values[k];
    const double h = 1.0 / n;
    const double reach = 2.5 * z;
    UniformGrid g = detail::grid_with_spacing(-reach, reach, oscillator_local_period(n, frame, 0.0) / 40.0);
    Tomogram t = detail::sample_tomogram(frame, g, [&](double x) { return hermite_tomogram(n, frame, x, h); });
    detail::require_normalized(t, "ehrenfest_oscillator");
    RunningIntegral run(t);
    const double lim = opt.compare_half_width * z;
    std::vector<double> diff(g.size(), 0.0);
    double u_err = 0.0, w_max = 0.0, sin2_num = 0.0, sin2_den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g[i];
      if (std::abs(x) > lim) continue;
      const double w = opt.window_periods * oscillator_local_period(n, frame, x);
      const double avg = run.average(x, w);
      const double cls = classical_oscillator_tomogram(x, frame, 1.0);
      diff[i] = std::abs(avg - cls);
      u_err = std::max(u_err, std::abs(oscillator_tomogram_parabolic(n, frame, x) - t.values()[i]));
      w_max = std::max(w_max, t.values()[i]);
      if (std::abs(x) <= 0.5 * z) sin2_num += avg, sin2_den += 2.0 * cls;
    }
    const double l1 = trapezoid(diff, g.spacing());
    const double forbidden = hermite_tomogram(n, frame, opt.forbidden_X * z, h);
    const double bound = std::exp(-n / 10.0);
    r.distances[k] = l1;
    ok[k] = forbidden < bound;
    det[k] = {{"n", n},
              {"hbar", h},
              {"l1", l1},
              {"forbidden_value", forbidden},
              {"forbidden_bound", bound},
              {"parabolic_route_max_relative_difference", u_err / w_max},
              {"sin2_average", sin2_den > 0 ? sin2_num / sin2_den : 0.0},
              {"mass", t.mass()}};
    r.tomograms[k] = std::move(t);
  });
  for (auto& d : det) r.details.push_back(std::move(d));
  bool forbidden_ok = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  r.fit();
  r.verdict = forbidden_ok && detail::strictly_decreasing(r.distances) ? Verdict::converged : Verdict::not_converged;
  return r;
}

}  // namespace tomolab
