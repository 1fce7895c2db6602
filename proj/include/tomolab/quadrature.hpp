#pragma once

// Composite Gauss-Legendre quadrature for chirped integrands
//   int_a^b f(y) exp(i (alpha y^2 + beta y)) dy.
// Panels are sized so that each spans at most 1/8 of the local phase period
// 2 pi / |2 alpha y + beta| and at most `max_panel` (the scale on which f
// itself varies).

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "tomolab/kernel.hpp"

namespace tomolab {

template <int N>
struct GaussLegendreRule {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};
};

/// Nodes and weights on [-1, 1] by Newton iteration on P_N.
template <int N>
const GaussLegendreRule<N>& gauss_legendre() {
  static const GaussLegendreRule<N> rule = [] {
    GaussLegendreRule<N> r;
    for (int i = 0; i < N; ++i) {
      double x = std::cos(pi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= N; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.nodes[i] = x;
      r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }();
  return rule;
}

inline constexpr int kPanelOrder = 10;

struct ChirpOptions {
  /// Upper bound on panel width from the amplitude's own variation.
  double max_panel = 1.0;
  /// Refuse when more nodes than this would be needed.
  std::size_t max_nodes = 20'000'000;
};

/// Number of quadrature nodes chirp_integral would use on [a, b].
inline std::size_t chirp_node_count(double a, double b, double alpha, double beta, const ChirpOptions& opt) {
  if (!(b > a)) return 0;
  // Phase arc length: integral of |phase'| over [a, b].
  auto prim = [&](double y) {
    double d = 2.0 * alpha * y + beta;
    return d * std::abs(d) / (4.0 * alpha);
  };
  double arc = 0.0;
  if (alpha == 0.0) {
    arc = std::abs(beta) * (b - a);
  } else {
    double y0 = -beta / (2.0 * alpha);
    if (y0 > a && y0 < b) arc = std::abs(prim(y0) - prim(a)) + std::abs(prim(b) - prim(y0));
    else arc = std::abs(prim(b) - prim(a));
  }
  double panels = arc * 8.0 / (2.0 * pi) + (b - a) / opt.max_panel + 1.0;
  return static_cast<std::size_t>(std::ceil(panels)) * kPanelOrder;
}

/// int_a^b f(y) exp(i (alpha y^2 + beta y)) dy. Throws ResolutionError when
/// the required node count exceeds opt.max_nodes.
template <class Fn>
complex chirp_integral(Fn&& f, double a, double b, double alpha, double beta, const ChirpOptions& opt = {}) {
  if (!(b > a)) return {0.0, 0.0};
  std::size_t need = chirp_node_count(a, b, alpha, beta, opt);
  if (need > opt.max_nodes)
    throw ResolutionError("chirp_integral: phase resolution needs " + std::to_string(need) +
                              " nodes (budget " + std::to_string(opt.max_nodes) + ")",
                          need);
  const auto& rule = gauss_legendre<kPanelOrder>();
  auto omega = [&](double y) { return std::abs(2.0 * alpha * y + beta); };
  complex total{0.0, 0.0};
  double y = a;
  while (y < b) {
    double h = std::min(opt.max_panel, b - y);
    // |phase'| is linear in y, so its panel maximum sits at an endpoint.
    for (int shrink = 0; shrink < 60; ++shrink) {
      double w = std::max(omega(y), omega(y + h));
      if (w * h <= 0.25 * pi) break;
      h = 0.25 * pi / w;
    }
    double mid = y + 0.5 * h, half = 0.5 * h;
    complex panel{0.0, 0.0};
    for (int k = 0; k < kPanelOrder; ++k) {
      double t = mid + half * rule.nodes[k];
      double phase = (alpha * t + beta) * t;
      panel += rule.weights[k] * f(t) * complex(std::cos(phase), std::sin(phase));
    }
    total += half * panel;
    y = (b - (y + h) < 1e-15 * std::max(1.0, std::abs(b))) ? b : y + h;
  }
  return total;
}

/// Plain composite Gauss-Legendre integral of a smooth function.
template <class Fn>
auto gauss_integral(Fn&& f, double a, double b, std::size_t panels) {
  const auto& rule = gauss_legendre<kPanelOrder>();
  using R = decltype(f(a));
  R total{};
  double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    double mid = a + (static_cast<double>(p) + 0.5) * h;
    R panel{};
    for (int k = 0; k < kPanelOrder; ++k) panel += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
    total += 0.5 * h * panel;
  }
  return total;
}

}  // namespace tomolab
