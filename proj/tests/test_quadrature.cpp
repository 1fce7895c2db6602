#include <gtest/gtest.h>

#include <cmath>

#include "tomolab/quadrature.hpp"

using namespace tomolab;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const auto& r = gauss_legendre<kPanelOrder>();
  double w = 0.0;
  for (double x : r.weights) w += x;
  EXPECT_NEAR(w, 2.0, 1e-14);
  // degree 19 is exact for 10 nodes
  double s = 0.0;
  for (int k = 0; k < kPanelOrder; ++k) s += r.weights[k] * std::pow(r.nodes[k], 18);
  EXPECT_NEAR(s, 2.0 / 19.0, 1e-14);
}

TEST(Chirp, GaussianFresnelClosedForm) {
  // int e^{-y^2} e^{i(a y^2 + b y)} dy = sqrt(pi / (1 - i a)) exp(-b^2 / (4 (1 - i a))).
  for (double a : {0.0, 3.0, -25.0}) {
    for (double b : {0.0, 2.0, -7.5}) {
      complex c(1.0, -a);
      complex exact = std::sqrt(pi / c) * std::exp(-b * b / (4.0 * c));
      complex got = chirp_integral([](double y) { return complex(std::exp(-y * y)); }, -9.0, 9.0, a, b, {0.5});
      EXPECT_LT(std::abs(got - exact), 1e-12) << a << " " << b;
    }
  }
}

TEST(Chirp, FiniteIntervalLinearPhase) {
  // int_0^1 e^{i b y} dy = (e^{ib} - 1) / (ib)
  double b = 400.0;
  complex exact = (std::exp(complex(0, b)) - 1.0) / complex(0, b);
  complex got = chirp_integral([](double) { return complex(1.0); }, 0.0, 1.0, 0.0, b);
  EXPECT_LT(std::abs(got - exact), 1e-13);
}

TEST(Chirp, RefusesOverBudget) {
  ChirpOptions opt;
  opt.max_nodes = 1000;
  try {
    chirp_integral([](double) { return complex(1.0); }, 0.0, 1.0, 1e6, 0.0, opt);
    FAIL() << "expected ResolutionError";
  } catch (const ResolutionError& e) {
    EXPECT_GT(e.required_nodes(), 1000u);
    EXPECT_EQ(e.required_nodes(), chirp_node_count(0.0, 1.0, 1e6, 0.0, opt));
  }
}

TEST(Chirp, NodeCountCoversEighthPeriods) {
  // Total phase 2 pi * 100 periods -> at least 800 panels.
  double beta = 2 * pi * 100;
  EXPECT_GE(chirp_node_count(0, 1, 0, beta, {}), 800u * kPanelOrder);
}
