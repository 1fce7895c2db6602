#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tomolab/quantum.hpp"

using namespace tomolab;

namespace {

StateSpec ho(int n, double hbar = 1.0, double varpi = 1.0) { return {HOEigen{n, varpi}, hbar}; }

double mass_on(const StateSpec& s, TomographyFrame f, std::size_t n = 4001) {
  XRange r = natural_x_range(s, f);
  UniformGrid g(r.center - r.half_width, r.center + r.half_width, n);
  return state_tomogram(s, f, g).mass();
}

}  // namespace

TEST(Amplitude, HermiteMatchesDirectQuadrature) {
  for (int n : {0, 1, 4, 9}) {
    for (double hb : {0.3, 1.0}) {
      for (TomographyFrame f : {TomographyFrame{0.7, 1.1}, TomographyFrame{-1.3, 0.4}, TomographyFrame{0.0, -0.8}}) {
        auto s = ho(n, hb, 1.4);
        detail::WaveTomography wt(s);
        for (double X : {-1.2, 0.0, 0.45, 2.0}) {
          complex direct = wt.position_amplitude(f, X);
          complex closed = hermite_amplitude(n, f, X, hb, 1.4);
          EXPECT_LT(std::abs(direct - closed), 1e-9) << n << " " << hb << " " << f.mu << " " << X;
        }
      }
    }
  }
}

TEST(Amplitude, CoherentMatchesDirectQuadrature) {
  complex alpha(0.8, -0.6);
  StateSpec s{Coherent{alpha, 0.7}, 0.5};
  detail::WaveTomography wt(s);
  for (TomographyFrame f : {TomographyFrame{1.0, 1.0}, TomographyFrame{-0.4, 2.0}}) {
    for (double X : {-1.0, 0.2, 1.5}) {
      EXPECT_LT(std::abs(wt.position_amplitude(f, X) - coherent_amplitude(alpha, f, X, 0.5, 0.7)), 1e-9);
      EXPECT_NEAR(std::norm(coherent_amplitude(alpha, f, X, 0.5, 0.7)) / (2 * pi * 0.5 * std::abs(f.nu)),
                  coherent_tomogram(alpha, f, X, 0.5, 0.7), 1e-12);
    }
  }
}

TEST(Amplitude, GeneratingFunctionTaylorCoefficients) {
  // a_n = (1/N) sum_k J(r w^k) w^{-nk} / r^n, w = e^{2 pi i/N}; A_n = sqrt(n!) a_n.
  const int N = 64;
  const double r = 0.7;
  for (TomographyFrame f : {TomographyFrame{0.5, 1.2}, TomographyFrame{-2.0, 0.3}, TomographyFrame{1.0, -1.0}}) {
    for (double X : {-0.9, 0.3}) {
      std::vector<complex> samples(N);
      for (int k = 0; k < N; ++k) samples[k] = amplitude_generating(std::polar(r, 2 * pi * k / N), f, X, 0.8, 1.3);
      for (int n = 0; n <= 10; ++n) {
        complex a{0, 0};
        for (int k = 0; k < N; ++k) a += samples[k] * std::polar(1.0, -2 * pi * n * k / N);
        a /= N * std::pow(r, n);
        complex coeff = a * std::sqrt(std::tgamma(n + 1.0));
        EXPECT_LT(std::abs(coeff - hermite_amplitude(n, f, X, 0.8, 1.3)), 1e-11) << n;
      }
    }
  }
}

TEST(Amplitude, GeneratingFunctionContinuousAcrossMu) {
  // Principal branch stays continuous as mu changes sign at fixed nu.
  complex prev = amplitude_generating(0.3, {-1e-3, 0.5}, 0.2, 1.0);
  for (int k = -999; k <= 1000; ++k) {
    complex cur = amplitude_generating(0.3, {k * 1e-6, 0.5}, 0.2, 1.0);
    EXPECT_LT(std::abs(cur - prev), 1e-5);
    prev = cur;
  }
  EXPECT_THROW(amplitude_generating(0.0, {1, 0}, 0.0, 1.0), std::domain_error);
}

TEST(ClosedForm, MatchQuadratureBothRepresentations) {
  std::vector<StateSpec> states = {ho(3, 0.4, 1.0), {Coherent{{1.2, 0.5}, 1.0}, 0.7}, {Cat{{1.5, -0.3}, Parity::odd, 1.0}, 1.0},
                                   {Superposition{0, 3, 2.0}, 0.5}};
  for (const auto& s : states) {
    detail::WaveTomography wt(s);
    for (TomographyFrame f : {TomographyFrame{0.9, 0.6}, TomographyFrame{-0.3, 1.7}, TomographyFrame{1.5, -0.2}}) {
      XRange r = natural_x_range(s, f);
      for (double t : {-0.3, -0.05, 0.1, 0.25}) {
        double X = r.center + t * r.half_width;
        double closed = closed_form_value(s, f, X);
        EXPECT_NEAR(wt.value(f, X, Representation::position), closed, 1e-9);
        EXPECT_NEAR(wt.value(f, X, Representation::momentum), closed, 1e-9);
      }
    }
  }
}

TEST(ClosedForm, BranchesAtZeroNuAndZeroMu) {
  auto s = ho(2, 0.6, 1.5);
  for (double X : {-0.7, 0.1, 1.3}) {
    EXPECT_NEAR(tomogram_point(s, {1.2, 0.0}, X), hermite_tomogram(2, {1.2, 0.0}, X, 0.6, 1.5), 1e-14);
    EXPECT_NEAR(tomogram_point(s, {0.0, 0.8}, X), hermite_tomogram(2, {0.0, 0.8}, X, 0.6, 1.5), 1e-13);
  }
  auto t = tomogram_from_wavefunction(s, {0, 0}, UniformGrid(-1, 1, 5));
  ASSERT_EQ(t.atoms().size(), 1u);
  EXPECT_EQ(t.atoms()[0].location, 0.0);
  EXPECT_THROW(hermite_tomogram(0, {0, 0}, 0.0, 1.0), std::invalid_argument);
}

TEST(ClosedForm, NuSweepHasNoBranchJump) {
  // Regression: the representation switch and the nu -> 0 limit must agree.
  StateSpec s{Coherent{{0.9, 0.4}, 1.0}, 1.0};
  detail::WaveTomography wt(s);
  for (double nu : {-1e-1, -1e-3, -1e-6, 0.0, 1e-6, 1e-3, 1e-1}) {
    TomographyFrame f{1.0, nu};
    for (double X : {0.5, 1.27, 2.0}) EXPECT_NEAR(wt.value(f, X), coherent_tomogram({0.9, 0.4}, f, X, 1.0), 1e-9) << nu;
  }
}

TEST(ClosedForm, Normalization) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-pi, pi), sc(0.3, 3.0);
  std::vector<StateSpec> states = {ho(0), ho(7, 0.2), {Coherent{{2.0, -1.0}, 0.5}, 1.0}, {Cat{{2.5, 0.0}, Parity::even, 1.0}, 0.3},
                                   {Superposition{1, 4, 1.0}, 1.0}};
  for (const auto& s : states)
    for (int k = 0; k < 5; ++k) {
      auto f = frame_from_scaling(sc(rng), ang(rng));
      EXPECT_NEAR(mass_on(s, f), 1.0, 1e-8);
    }
}

TEST(ClosedForm, Homogeneity) {
  TomographyFrame f{0.6, -1.1};
  for (double lam : {-2.5, 0.4, 3.0})
    for (double X : {-0.8, 0.3}) {
      EXPECT_NEAR(hermite_tomogram(5, f.scaled(lam), lam * X, 0.5) * std::abs(lam), hermite_tomogram(5, f, X, 0.5), 1e-13);
      EXPECT_NEAR(cat_tomogram({1, 1}, Parity::even, f.scaled(lam), lam * X, 1.0) * std::abs(lam),
                  cat_tomogram({1, 1}, Parity::even, f, X, 1.0), 1e-13);
    }
}

TEST(ClosedForm, Marginals) {
  // mu = 1, nu = 0 is the position density; mu = 0, nu = 1 the momentum density.
  for (double x : {-1.0, 0.2, 1.7}) {
    double phi = hermite_phi(3, x);
    EXPECT_NEAR(hermite_tomogram(3, {1, 0}, x, 1.0), phi * phi, 1e-14);
    EXPECT_NEAR(hermite_tomogram(3, {0, 1}, x, 1.0), phi * phi, 1e-14);
  }
  complex a(0.5, 1.0);
  EXPECT_NEAR(coherent_tomogram(a, {1, 0}, 0.3, 1.0), std::norm(wavefunction({Coherent{a, 1.0}, 1.0}, 0.3)), 1e-14);
}

TEST(Superposition, CrossTermIntegratesToZero) {
  for (auto [n, m] : {std::pair{0, 1}, std::pair{2, 5}, std::pair{3, 4}}) {
    TomographyFrame f{0.8, 0.7};
    UniformGrid g(-12, 12, 6001);
    std::vector<double> cross(g.size()), diag(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      cross[i] = superposition_cross_term(n, m, f, g[i], 1.0);
      diag[i] = hermite_tomogram(n, f, g[i], 1.0) * hermite_tomogram(m, f, g[i], 1.0);
    }
    EXPECT_NEAR(trapezoid(cross, g.spacing()), 0.0, 1e-12);
    EXPECT_GT(trapezoid(diag, g.spacing()), 0.0);
  }
  EXPECT_THROW(superposition_tomogram(2, 2, {1, 0}, 0.0, 1.0), std::invalid_argument);
}

TEST(Cat, InterferenceIntegratesToOverlap) {
  // int I dX = 2 Re <-alpha|alpha> = 2 exp(-2|alpha|^2).
  for (complex a : {complex(0.5, 0.2), complex(1.0, -0.7), complex(0.3, 0.0)}) {
    TomographyFrame f{1.1, 0.5};
    UniformGrid g(-15, 15, 12001);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = cat_interference(a, f, g[i], 1.0);
    EXPECT_NEAR(trapezoid(v, g.spacing()), 2 * std::exp(-2 * std::norm(a)), 1e-10);
  }
}

TEST(Cat, LargeAmplitudeStaysFinite) {
  complex a(70.0, 0.0);
  TomographyFrame f{0.0, 1.0};
  double peak = 0.0;
  for (int k = -200; k <= 200; ++k) {
    double w = cat_tomogram(a, Parity::even, f, k * 0.01, 1.0);
    ASSERT_TRUE(std::isfinite(w));
    peak = std::max(peak, w);
  }
  // Momentum marginal of a well-separated even cat: 2 W_0 cos^2(...) envelope.
  EXPECT_NEAR(peak, 2 * hermite_tomogram(0, f, 0.0, 1.0), 1e-6);
  EXPECT_EQ(cat_tomogram(a, Parity::even, {1, 0}, 0.0, 1.0), 0.0);
}

TEST(Box, ReconcilesWithUnitEnergyForm) {
  const double L = 1.3;
  for (int n : {1, 4, 12}) {
    const double hb = box_ehrenfest_hbar(n, L);
    BoxEigen b{n, L};
    for (TomographyFrame f : {TomographyFrame{1.0, 0.5}, TomographyFrame{-0.6, 1.4}}) {
      for (double X : {-0.5, 0.3, 1.1}) {
        ChirpOptions opt;
        opt.max_panel = L / 64;
        auto F = [&](int branch) {
          // Phase n F(y) written as alpha y^2 + beta y.
          double a = n * pi / L * f.mu / (2 * std::sqrt(2.0) * f.nu);
          double be = -n * pi / L * (X / (std::sqrt(2.0) * f.nu) - branch);
          return chirp_integral([](double) { return complex(1.0); }, 0.0, L, a, be, opt);
        };
        complex am = F(-1), ap = F(+1);
        double unit = n * std::norm(am - ap) / (4 * L * L * std::sqrt(2.0) * std::abs(f.nu));
        EXPECT_NEAR(box_tomogram_value(b, f, X, hb, opt), unit, 1e-12);
        // Cross-check the phase function against the closed y-polynomial.
        double y = 0.37;
        EXPECT_NEAR(n * box_phase(y, X, f, L, -1),
                    n * pi / L * f.mu / (2 * std::sqrt(2.0) * f.nu) * y * y - n * pi / L * (X / (std::sqrt(2.0) * f.nu) + 1) * y,
                    1e-12);
      }
    }
  }
}

TEST(Box, MatchesWaveFunctionQuadrature) {
  StateSpec s{BoxEigen{3, 2.0}, 0.7};
  detail::WaveTomography wt(s);
  for (double X : {0.1, 0.8, 1.9}) {
    TomographyFrame f{0.9, 0.4};
    ChirpOptions opt;
    opt.max_panel = 0.01;
    complex direct = chirp_integral([&](double y) { return wavefunction(s, y); }, 0.0, 2.0, f.mu / (2 * 0.7 * f.nu), -X / (0.7 * f.nu), opt);
    EXPECT_NEAR(wt.value(f, X), std::norm(direct) / (2 * pi * 0.7 * f.nu), 1e-11);
  }
}

TEST(Box, NormalizedAndContinuousAtZeroNu) {
  const double L = 1.0, hb = 0.25;
  for (TomographyFrame f : {TomographyFrame{1.0, 0.3}, TomographyFrame{0.5, -1.0}, TomographyFrame{0.0, 1.0}}) {
    StateSpec s{BoxEigen{2, L}, hb};
    XRange r = natural_x_range(s, f);
    if (f.mu == 0.0) continue;  // momentum tails need a very wide grid; covered by the state tests
    auto t = box_tomogram(2, L, f, UniformGrid(r.center - r.half_width, r.center + r.half_width, 4001), hb);
    EXPECT_NEAR(t.mass(), 1.0, 1e-4);
  }
  BoxEigen b{2, L};
  ChirpOptions opt;
  EXPECT_NEAR(box_tomogram_value(b, {1.0, 1e-4}, 0.3, hb, opt), box_tomogram_value(b, {1.0, 0.0}, 0.3, hb, opt), 1e-3);
}

TEST(Box, RefusesUnresolvablePhase) {
  ChirpOptions opt;
  opt.max_nodes = 1000;
  try {
    box_tomogram(50, 1.0, {1.0, 1e-4}, UniformGrid(-1, 2, 11), 1e-3, opt);
    FAIL() << "expected ResolutionError";
  } catch (const ResolutionError& e) {
    EXPECT_GT(e.required_nodes(), 1000u);
  }
}

TEST(Box, StationaryPhase) {
  const double L = 1.0;
  const int n = 40;
  TomographyFrame f{1.0, 0.3};
  auto [qm, qp] = box_stationary_points(0.5, f);
  EXPECT_NEAR(qm, 0.5 - std::sqrt(2.0) * 0.3, 1e-15);
  EXPECT_NEAR(qp, 0.5 + std::sqrt(2.0) * 0.3, 1e-15);
  // Cross-term phase reduces to 2 n pi X/(mu L).
  for (double X : {0.45, 0.5, 0.6}) {
    auto [a, b] = box_stationary_points(X, f);
    double ph = n * (box_phase(a, X, f, L, -1) - box_phase(b, X, f, L, +1));
    EXPECT_NEAR(std::remainder(ph - 2 * n * pi * X / (f.mu * L), 2 * pi), 0.0, 1e-9);
  }
  // Window averages over one cross-term period reproduce the classical value.
  const double per = box_cross_term_period(n, L, f);
  for (double x0 : {0.45, 0.55}) {
    UniformGrid w(x0, x0 + per, 2001);
    std::vector<double> v(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = box_tomogram_stationary_phase(n, L, f, w[i]);
    EXPECT_NEAR(trapezoid(v, w.spacing()) / per, classical_box_tomogram(x0 + per / 2, f, L), 1e-3);
  }
  EXPECT_THROW(box_tomogram_stationary_phase(5, L, f, 0.5), std::domain_error);
  EXPECT_THROW(box_tomogram_stationary_phase(20, L, {0, 1}, 0.5), std::domain_error);
}

TEST(SampledState, MatchesClosedFormAndChecksMass) {
  UniformGrid xg(-10, 10, 2001);
  std::vector<complex> v(xg.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = hermite_phi(1, xg[i]);
  StateSpec s{CustomGrid{SampledWave(xg, v), "phi1"}, 1.0};
  for (TomographyFrame f : {TomographyFrame{1.0, 0.7}, TomographyFrame{0.2, 1.5}}) {
    UniformGrid g(-8, 8, 161);
    auto t = tomogram_from_wavefunction(s, f, g);
    for (std::size_t i = 0; i < g.size(); i += 8) EXPECT_NEAR(t.values()[i], hermite_tomogram(1, f, g[i], 1.0), 1e-6) << f.mu;
  }
  EXPECT_THROW(tomogram_from_wavefunction(s, {1.0, 0.0}, UniformGrid(-1, 1, 101)), MassDeficitError);
}

TEST(SampledState, OffCentreGridMomentumRoute) {
  // Gaussian centred at x0 on a grid that excludes the origin: coherent state alpha = x0/sqrt(2 hbar).
  const double hbar = 0.01, x0 = 3.0, s = std::sqrt(hbar);
  UniformGrid xg(x0 - 12 * s, x0 + 12 * s, 2401);
  std::vector<complex> v(xg.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = hermite_phi(0, (xg[i] - x0) / s) / std::sqrt(s);
  StateSpec st{CustomGrid{SampledWave(xg, v), "shifted"}, hbar};
  const complex alpha(x0 / std::sqrt(2 * hbar), 0.0);
  TomographyFrame f{0.2, 1.0};
  for (double X : {0.5, 0.6, 0.65})
    EXPECT_NEAR(tomogram_point(st, f, X, Representation::momentum), coherent_tomogram(alpha, f, X, hbar), 1e-6);
}

TEST(Wigner, GroundStateFromDensity) {
  UniformGrid ax(-7, 7, 281);
  auto rho = GridFunction2D<complex>::sample(ax, ax, [](double x, double y) {
    return complex(hermite_phi(0, x) * hermite_phi(0, y), 0.0);
  });
  for (auto [p, q] : {std::pair{0.0, 0.0}, std::pair{0.7, -0.4}, std::pair{-1.2, 1.0}}) {
    auto r = wigner_from_density(rho, p, q, 1.0);
    EXPECT_NEAR(r.value, 2 * std::exp(-q * q - p * p), 1e-10);
    EXPECT_LT(r.imag_residual, 1e-10);
  }
  auto bad = GridFunction2D<complex>::sample(ax, ax, [](double x, double y) { return complex(x * std::exp(-x * x - y * y), 0.0); });
  EXPECT_THROW(wigner_from_density(bad, 0.0, 0.0, 1.0), NumericalError);
}

TEST(Wigner, TomogramOfFirstExcitedState) {
  // W_1(q, p) = 2 (2 (q^2 + p^2) - 1) e^{-q^2 - p^2} for hbar = 1.
  UniformGrid ax(-7, 7, 561);
  auto w = GridFunction2D<double>::sample(ax, ax, [](double q, double p) {
    double r2 = q * q + p * p;
    return 2 * (2 * r2 - 1) * std::exp(-r2);
  });
  TomographyFrame f{0.8, 0.6};
  UniformGrid g(-5, 5, 101);
  auto t = tomogram_from_wigner(w, f, g, 1.0);
  // Bilinear interpolation error is h^2/8 max|W''| ~ 6e-4 at h = 0.025.
  for (std::size_t i = 0; i < g.size(); i += 5) EXPECT_NEAR(t.values()[i], hermite_tomogram(1, f, g[i], 1.0), 6e-4);
  EXPECT_EQ(tomogram_from_wigner(w, {0, 0}, g, 1.0).atoms().size(), 1u);
}

TEST(StateTomogram, AmplitudeDispatch) {
  StateSpec cat{Cat{{1.0, 0.5}, Parity::even, 1.0}, 0.8};
  TomographyFrame f{0.4, 0.9};
  for (double X : {-0.5, 0.7})
    EXPECT_NEAR(std::norm(tomogram_amplitude(cat, f, X)) / (2 * pi * 0.8 * f.nu), cat_tomogram({1.0, 0.5}, Parity::even, f, X, 0.8), 1e-12);
  StateSpec sup{Superposition{0, 2, 1.0}, 1.0};
  EXPECT_NEAR(std::norm(tomogram_amplitude(sup, f, 0.3)) / (2 * pi * f.nu), superposition_tomogram(0, 2, f, 0.3, 1.0), 1e-12);
  EXPECT_THROW(tomogram_amplitude(sup, {1, 0}, 0.0), std::domain_error);
}
