#include <gtest/gtest.h>

#include <cmath>

#include "tomolab/state.hpp"

using namespace tomolab;

namespace {

double norm_on(const StateSpec& s, double lo, double hi, std::size_t n, bool momentum) {
  UniformGrid g(lo, hi, n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = std::norm(momentum ? momentum_wavefunction(s, g[i]) : wavefunction(s, g[i]));
  return trapezoid(d, g.spacing());
}

// Direct Fourier quadrature of psi as an independent oracle for psi-hat.
complex fourier_oracle(const StateSpec& s, double p, double lo, double hi, std::size_t n) {
  UniformGrid g(lo, hi, n);
  std::vector<complex> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = wavefunction(s, g[i]) * std::exp(complex(0, -p * g[i] / s.hbar));
  return trapezoid<complex>(d, g.spacing()) / std::sqrt(2 * pi * s.hbar);
}

}  // namespace

TEST(State, WavefunctionsNormalized) {
  std::vector<StateSpec> states = {
      {HOEigen{0, 1.0}, 1.0},        {HOEigen{7, 2.0}, 0.3},      {Coherent{{1.0, -0.5}}, 0.5},
      {Cat{{1.0, 0.3}, Parity::even}, 1.0}, {Cat{{0.5, 0.0}, Parity::odd}, 0.7}, {Superposition{2, 5}, 0.3},
  };
  for (const auto& s : states) {
    EXPECT_NEAR(norm_on(s, -30, 30, 6001, false), 1.0, 1e-10);
    EXPECT_NEAR(norm_on(s, -30, 30, 6001, true), 1.0, 1e-10);
  }
  StateSpec box{BoxEigen{3, 2.0}, 1.0};
  EXPECT_NEAR(norm_on(box, 0, 2, 4001, false), 1.0, 1e-10);
}

TEST(State, MomentumMatchesFourierQuadrature) {
  std::vector<StateSpec> states = {
      {HOEigen{3, 1.5}, 0.4}, {Coherent{{0.7, 1.2}}, 0.8}, {Cat{{1.0, -0.4}, Parity::odd}, 1.0}, {Superposition{0, 3}, 1.0}};
  for (const auto& s : states)
    for (double p : {-1.3, 0.0, 0.4, 2.1})
      EXPECT_LT(std::abs(momentum_wavefunction(s, p) - fourier_oracle(s, p, -20, 20, 8001)), 1e-10);
  StateSpec box{BoxEigen{4, 1.0}, 0.5};
  for (double p : {-6.0, 0.0, 6.28, 9.0})
    EXPECT_LT(std::abs(momentum_wavefunction(box, p) - fourier_oracle(box, p, 0, 1, 20001)), 1e-8);
}

TEST(State, CoherentMeansAndCatNorm) {
  StateSpec s{Coherent{{0.8, -0.3}, 2.0}, 0.5};
  UniformGrid g(-15, 15, 6001);
  std::vector<double> q(g.size()), p(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    q[i] = g[i] * std::norm(wavefunction(s, g[i]));
    p[i] = g[i] * std::norm(momentum_wavefunction(s, g[i]));
  }
  EXPECT_NEAR(trapezoid(q, g.spacing()), coherent_mean_q({0.8, -0.3}, 0.5, 2.0), 1e-10);
  EXPECT_NEAR(trapezoid(p, g.spacing()), coherent_mean_p({0.8, -0.3}, 0.5, 2.0), 1e-10);
  double a2 = 1.0 / (2 * 0.01);
  EXPECT_NEAR(cat_norm_squared(std::sqrt(a2), Parity::even), 0.5, 1e-21);
  EXPECT_NEAR(cat_norm_squared(std::sqrt(a2), Parity::odd), 0.5, 1e-21);
  EXPECT_NEAR(cat_norm_squared(1.0, Parity::even), 1.0 / (2 * (1 + std::exp(-2.0))), 1e-16);
}

TEST(State, SampledWaveInterpolatesAndValidates) {
  UniformGrid g(-10, 10, 2001);
  std::vector<complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::pow(pi, -0.25) * std::exp(-0.5 * g[i] * g[i]);
  StateSpec s{CustomGrid{SampledWave(g, v), "gauss"}, 1.0};
  EXPECT_NO_THROW(validate_state(s));
  EXPECT_NEAR(std::abs(wavefunction(s, 0.123)), std::pow(pi, -0.25) * std::exp(-0.5 * 0.123 * 0.123), 1e-8);
  EXPECT_LT(std::abs(momentum_wavefunction(s, 0.7) - momentum_wavefunction({HOEigen{0}, 1.0}, 0.7)), 1e-10);
  for (auto& x : v) x *= 1.01;
  StateSpec bad{CustomGrid{SampledWave(g, v), "bad"}, 1.0};
  EXPECT_THROW(validate_state(bad), std::invalid_argument);
}

TEST(Descriptor, ParsesCatalog) {
  auto ho = parse_state("ho:n=3,varpi=2.5", 0.5);
  ASSERT_TRUE(ho.is<HOEigen>());
  EXPECT_EQ(ho.as<HOEigen>().n, 3);
  EXPECT_EQ(ho.as<HOEigen>().varpi, 2.5);
  EXPECT_EQ(ho.hbar, 0.5);
  auto c = parse_state("coherent:re=1,im=-0.5", 1.0);
  EXPECT_EQ(c.as<Coherent>().alpha, complex(1.0, -0.5));
  auto cat = parse_state("cat:odd,re=1,im=0", 1.0);
  EXPECT_EQ(cat.as<Cat>().parity, Parity::odd);
  auto sp = parse_state("superpos:n=2,m=5", 1.0);
  EXPECT_EQ(sp.as<Superposition>().m, 5);
  auto box = parse_state("box:n=5,L=1", 1.0);
  EXPECT_EQ(box.as<BoxEigen>().n, 5);
}

TEST(Descriptor, RejectsUnknownKeysNamingToken) {
  try {
    parse_state("ho:n=3,foo=2", 1.0);
    FAIL();
  } catch (const DescriptorError& e) {
    EXPECT_NE(std::string(e.what()).find("'foo'"), std::string::npos);
    EXPECT_EQ(e.position(), 7u);
  }
  EXPECT_THROW(parse_state("ho", 1.0), DescriptorError);
  EXPECT_THROW(parse_state("squeezed:r=1", 1.0), DescriptorError);
  EXPECT_THROW(parse_state("ho:n=x", 1.0), DescriptorError);
  EXPECT_THROW(parse_state("ho:n=-1", 1.0), DescriptorError);
  EXPECT_THROW(parse_state("cat:re=1", 1.0), DescriptorError);
  EXPECT_THROW(parse_state("cat:even,odd,re=1", 1.0), DescriptorError);
  EXPECT_THROW(parse_state("superpos:n=2,m=2", 1.0), DescriptorError);
  EXPECT_THROW(parse_state("box:n=0,L=1", 1.0), DescriptorError);
  EXPECT_THROW(parse_state("ho:n=1,n=2", 1.0), DescriptorError);
  EXPECT_THROW(parse_state("custom:x.csv", 1.0), DescriptorError);
  EXPECT_THROW(parse_state("ho:n=1", 0.0), std::invalid_argument);
}
