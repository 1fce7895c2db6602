#pragma once

// Invariant battery behind `tomolab selftest`: normalization, marginals,
// homogeneity, nonnegativity, orthonormality, dual-route agreement and
// reconstruction round trips. Reports contain no timings, so identical
// builds produce byte-identical output.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tomolab/classical.hpp"
#include "tomolab/inverse.hpp"
#include "tomolab/io.hpp"
#include "tomolab/kernel.hpp"
#include "tomolab/quantum.hpp"
#include "tomolab/state.hpp"

namespace tomolab {

struct SelftestOptions {
  bool quick = false;
  /// Relative error injected into the normalization rows, for checking that
  /// the battery notices a broken normalization.
  double norm_bias = 0.0;
  std::uint64_t seed = 20240521;
};

struct SelftestRow {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

struct SelftestReport {
  std::vector<SelftestRow> rows;
  bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const SelftestRow& r) { return r.passed; });
  }
};

namespace detail {

inline StateSpec selftest_state(StateKind k, double hbar) { return {std::move(k), hbar}; }

/// Closed-form catalog states used throughout the battery.
inline std::vector<std::pair<std::string, StateSpec>> closed_form_catalog(bool quick) {
  std::vector<std::pair<std::string, StateSpec>> v = {
      {"ho:n=0", selftest_state(HOEigen{0, 1.0}, 1.0)},
      {"ho:n=3,varpi=0.5", selftest_state(HOEigen{3, 0.5}, 0.7)},
      {"coherent:re=1.2,im=-0.5", selftest_state(Coherent{{1.2, -0.5}, 1.0}, 1.0)},
      {"cat:even,re=1.5,im=0.3", selftest_state(Cat{{1.5, 0.3}, Parity::even, 1.0}, 1.0)},
      {"cat:odd,re=0.8,im=0", selftest_state(Cat{{0.8, 0.0}, Parity::odd, 1.0}, 0.5)},
      {"superpos:n=1,m=4", selftest_state(Superposition{1, 4, 1.0}, 1.0)},
  };
  if (!quick) v.push_back({"ho:n=10", selftest_state(HOEigen{10, 1.0}, 0.3)});
  return v;
}

inline SampledWave selftest_gaussian_wave() {
  UniformGrid g(-10.0, 10.0, 2001);
  std::vector<complex> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = hermite_phi(0, g[i] - 0.5) * std::polar(1.0, 0.8 * g[i]);
  return {g, std::move(v)};
}

inline Tomogram selftest_tomogram(const StateSpec& s, const TomographyFrame& f, std::size_t points) {
  XRange r = natural_x_range(s, f);
  return state_tomogram(s, f, UniformGrid(r.center - r.half_width, r.center + r.half_width, points));
}

inline SelftestRow make_row(std::string name, double measured, double tol, std::string note = {}) {
  return {std::move(name), measured, tol, std::isfinite(measured) && measured < tol, std::move(note)};
}

}  // namespace detail

inline SelftestReport run_selftest(const SelftestOptions& opt = {}) {
  SelftestReport rep;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> angle(-pi, pi), scale(0.4, 2.5);
  const int n_frames = opt.quick ? 5 : 50;
  std::vector<TomographyFrame> frames;
  for (int k = 0; k < n_frames; ++k) frames.push_back(frame_from_scaling(scale(rng), angle(rng)));
  const auto catalog = detail::closed_form_catalog(opt.quick);
  const double bias = 1.0 + opt.norm_bias;

  // Normalization, closed forms.
  {
    double worst = 0.0, neg = 0.0;
    for (const auto& [name, s] : catalog)
      for (const auto& f : frames) {
        Tomogram t = detail::selftest_tomogram(s, f, 4001);
        worst = std::max(worst, std::abs(bias * t.mass() - 1.0));
        for (double v : t.values()) neg = std::max(neg, -v);
      }
    rep.rows.push_back(detail::make_row("normalization (closed forms)", worst, 1e-6));
    rep.rows.push_back(detail::make_row("nonnegativity (closed forms)", neg, 1e-10));
  }

  // Normalization, quadrature routes.
  {
    double worst = 0.0;
    StateSpec box{BoxEigen{3, 1.0}, 0.5};
    StateSpec custom{CustomGrid{detail::selftest_gaussian_wave(), "gaussian"}, 1.0};
    const int n = opt.quick ? 2 : 8;
    for (int k = 0; k < n; ++k) {
      const auto& f = frames[static_cast<std::size_t>(k)];
      worst = std::max(worst, std::abs(bias * detail::selftest_tomogram(box, f, 2001).mass() - 1.0));
      XRange r = natural_x_range(custom, f);
      Tomogram t = tomogram_from_wavefunction(custom, f, UniformGrid(r.center - r.half_width, r.center + r.half_width, 1201));
      worst = std::max(worst, std::abs(bias * t.mass() - 1.0));
    }
    rep.rows.push_back(detail::make_row("normalization (quadrature routes)", worst, 1e-3));
  }

  // Marginals: frame (1, 0) gives |psi(X)|^2, frame (0, 1) gives |psi-hat(X)|^2.
  {
    double worst = 0.0;
    for (const auto& [name, s] : catalog)
      for (double X : {-1.1, -0.2, 0.35, 1.6}) {
        worst = std::max(worst, std::abs(closed_form_value(s, {1.0, 0.0}, X) - std::norm(wavefunction(s, X))));
        worst = std::max(worst, std::abs(closed_form_value(s, {0.0, 1.0}, X) - std::norm(momentum_wavefunction(s, X))));
      }
    rep.rows.push_back(detail::make_row("marginal identities", worst, 1e-6));
  }

  // Homogeneity W(lambda X, lambda mu, lambda nu) = W(X, mu, nu)/|lambda|.
  {
    double worst = 0.0;
    for (const auto& [name, s] : catalog)
      for (double lam : {-2.0, 0.5, 3.0})
        for (std::size_t k = 0; k < std::min<std::size_t>(frames.size(), 5); ++k)
          for (double X : {-0.4, 0.9}) {
            const auto& f = frames[k];
            worst = std::max(worst, std::abs(closed_form_value(s, f.scaled(lam), lam * X) * std::abs(lam) - closed_form_value(s, f, X)));
          }
    rep.rows.push_back(detail::make_row("homogeneity", worst, 1e-8));
  }

  // Orthonormality int A_n A_m^* / (2 pi hbar |nu|) dX = delta_nm.
  {
    double worst = 0.0;
    const int top = opt.quick ? 4 : 8;
    for (double hbar : {0.3, 1.0})
      for (TomographyFrame f : {TomographyFrame{1.0, 0.5}, TomographyFrame{-0.4, 1.3}, TomographyFrame{0.7, -0.7}}) {
        const double half = (std::sqrt(2.0 * top + 1.0) + 10.0) * std::sqrt(hbar) * f.norm();
        UniformGrid g(-half, half, 4001);
        std::vector<std::vector<complex>> amp(static_cast<std::size_t>(top + 1), std::vector<complex>(g.size()));
        for (int n = 0; n <= top; ++n)
          for (std::size_t i = 0; i < g.size(); ++i) amp[static_cast<std::size_t>(n)][i] = hermite_amplitude(n, f, g[i], hbar);
        for (int n = 0; n <= top; ++n)
          for (int m = 0; m <= n; ++m) {
            complex sum{};
            for (std::size_t i = 0; i < g.size(); ++i) {
              double w = (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0;
              sum += w * amp[static_cast<std::size_t>(n)][i] * std::conj(amp[static_cast<std::size_t>(m)][i]);
            }
            sum *= g.spacing() / (2.0 * pi * hbar * std::abs(f.nu));
            worst = std::max(worst, std::abs(sum - complex(n == m ? 1.0 : 0.0, 0.0)));
          }
      }
    rep.rows.push_back(detail::make_row("orthonormality", worst, 1e-6));
  }

  // Closed form against direct quadrature of the amplitude integral.
  {
    double worst = 0.0;
    std::uniform_real_distribution<double> pos(-0.8, 0.8);
    const int per_state = opt.quick ? 4 : 20;
    for (const auto& [name, s] : catalog) {
      detail::WaveTomography wt(s);
      for (int k = 0; k < per_state; ++k) {
        const auto& f = frames[static_cast<std::size_t>(k) % frames.size()];
        Tomogram t = detail::selftest_tomogram(s, f, 2001);
        const double X = t.mean() + pos(rng) * std::sqrt(t.variance());
        const double closed = closed_form_value(s, f, X);
        const double quad = wt.value(f, X, Representation::position);
        worst = std::max(worst, std::abs(quad - closed) / std::abs(closed));
      }
    }
    rep.rows.push_back(detail::make_row("closed form vs quadrature (relative)", worst, 1e-6));
  }

  // Cat interference integral 2 exp(-2|alpha|^2).
  {
    double worst = 0.0;
    for (complex a : {complex(0.5, 0.0), complex(1.0, 0.0), complex(2.0, 0.0)})
      for (double hbar : {0.1, 0.5, 1.0}) {
        TomographyFrame f{0.8, 0.6};
        StateSpec s{Cat{a, Parity::even, 1.0}, hbar};
        XRange r = natural_x_range(s, f);
        UniformGrid g(r.center - r.half_width, r.center + r.half_width, 8001);
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) v[i] = cat_interference(a, f, g[i], hbar);
        worst = std::max(worst, std::abs(trapezoid(v, g.spacing()) - 2.0 * std::exp(-2.0 * std::norm(a))));
      }
    rep.rows.push_back(detail::make_row("cat interference integral", worst, 1e-6));
  }

  // Dual route: tomogram_from_wigner(wigner_from_density(rho)) against the wave function.
  {
    const double hbar = 1.0;
    StateSpec s{HOEigen{1, 1.0}, hbar};
    UniformGrid xa(-7.0, 7.0, 281);
    auto rho = GridFunction2D<complex>::sample(xa, xa, [&](double x, double y) {
      return wavefunction(s, x) * std::conj(wavefunction(s, y));
    });
    UniformGrid qa(-5.0, 5.0, 201);
    auto w = wigner_grid_from_density(rho, qa, qa, hbar);
    double worst = 0.0;
    for (TomographyFrame f : {TomographyFrame{1.0, 0.0}, TomographyFrame{0.6, 0.8}}) {
      UniformGrid g(-4.0, 4.0, 81);
      Tomogram a = tomogram_from_wigner(w, f, g, hbar);
      for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - closed_form_value(s, f, g[i])));
    }
    rep.rows.push_back(detail::make_row("dual route (Wigner vs wave function)", worst, 1e-3));
  }

  // Reconstruction round trips.
  {
    // Classical Gaussian through radon_density and inverse_radon.
    UniformGrid ax(-5.0, 5.0, opt.quick ? 101 : 201);
    auto dens = GridFunction2D<double>::sample(ax, ax, [](double q, double p) {
      return std::exp(-0.5 * (q - 0.3) * (q - 0.3) / 0.49 - 0.5 * (p + 0.2) * (p + 0.2) / 0.64) / (2.0 * pi * 0.7 * 0.8);
    });
    DensityGrid model{dens};
    UniformGrid fa = frame_axis(6.0, 5.0);
    TomogramFamily fam(fa, fa, [&](const TomographyFrame& f) {
      if (f.is_zero()) return Tomogram::point(f, 0.0);
      double hw = 5.0 * (std::abs(f.mu) + std::abs(f.nu));
      return radon_density(model, f, UniformGrid(-hw, hw, 801));
    }, 5.0);
    double worst = 0.0;
    for (double q : {-1.0, 0.3, 1.2})
      for (double p : {-0.9, -0.2, 0.7}) worst = std::max(worst, std::abs(inverse_radon(fam, q, p).value - dens.bilinear(q, p)));
    rep.rows.push_back(detail::make_row("round trip: classical Radon", worst, 1e-3));
  }
  if (!opt.quick) {
    StateSpec ground{HOEigen{0, 1.0}, 1.0};
    TomogramFamily fam = state_tomogram_family(ground, 12.0, 7.0, 0.05);
    double worst = 0.0;
    for (double q : {-1.0, 0.0, 0.8})
      for (double p : {-0.6, 0.0, 1.1})
        worst = std::max(worst, std::abs(wigner_from_tomogram(fam, p, q, 1.0).value - 2.0 * std::exp(-q * q - p * p)));
    rep.rows.push_back(detail::make_row("round trip: ground-state Wigner", worst, 1e-3));

    const complex alpha(1.0, 0.0);
    StateSpec coh{Coherent{alpha, 1.0}, 1.0};
    UniformGrid xs(-3.0, 3.0, 13);
    DensityFamily dfam = state_density_family(coh, xs, 12.0, 8.0, 0.05);
    auto rho = density_on_grid(dfam, xs, 1.0);
    double err = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < xs.size(); ++j)
        err = std::max(err, std::abs(rho(i, j) - wavefunction(coh, xs[i]) * std::conj(wavefunction(coh, xs[j]))));
    rep.rows.push_back(detail::make_row("round trip: coherent density matrix", err, 1e-3));
  }

  // Root-summation time average of an oscillator orbit against the arcsine law.
  {
    TomographyFrame f{1.0, 0.0};
    UniformGrid g(-2.0, 2.0, opt.quick ? 801 : 2001);
    Tomogram avg = time_averaged_tomogram(oscillator_orbit(std::sqrt(2.0), 0.0), f, g);
    Tomogram exact = classical_oscillator_tomogram_grid(f, g, 1.0);
    std::vector<double> d(g.size(), 0.0);
    const double R = oscillator_radius(f, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::abs(std::abs(g[i]) - R) > 0.05) d[i] = std::abs(avg.values()[i] - exact.values()[i]);
    rep.rows.push_back(detail::make_row("classical oscillator time average", trapezoid(d, g.spacing()), 1e-3));
  }
  return rep;
}

/// Fixed-width pass/fail table.
inline std::string format_selftest(const SelftestReport& r) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-42s %-24s %-10s %s\n", "check", "measured", "tolerance", "result");
  out += line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%-42s %-24s %-10.0e %s\n", row.name.c_str(), format_real(row.measured).c_str(), row.tolerance,
                  row.passed ? "PASS" : "FAIL");
    out += line;
  }
  out += r.passed() ? "selftest: all checks passed\n" : "selftest: FAILED\n";
  return out;
}

}  // namespace tomolab
