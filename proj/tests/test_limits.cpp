#include <gtest/gtest.h>

#include <cmath>

#include "tomolab/limits.hpp"

using namespace tomolab;

namespace {

std::vector<double> geometric(double first, double ratio, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(first * std::pow(ratio, i));
  return v;
}

CustomGrid gaussian_profile(double center = 0.0) {
  UniformGrid g(-12.0 + center, 12.0 + center, 2401);
  std::vector<complex> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-0.5 * (g[i] - center) * (g[i] - center)) / std::pow(pi, 0.25);
  return {SampledWave(g, v), "gaussian"};
}

}  // namespace

TEST(PowerFit, RecoversExponent) {
  std::vector<double> x = geometric(1.0, 0.5, 6), y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 0.7));
  PowerFit f = fit_power_law(x, y);
  EXPECT_NEAR(f.exponent, 0.7, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(LimitReport, ExponentOnlyWithGoodFit) {
  LimitReport r;
  r.parameter_values = {1, 2, 3, 4};
  r.distances = {1.0, 0.1, 1.0, 0.1};
  EXPECT_FALSE(r.fit());
  EXPECT_FALSE(r.fitted_exponent.has_value());
  auto j = r.to_json();
  EXPECT_TRUE(j["exponent"].is_null());
  for (const char* key : {"study", "parameters", "values", "distances", "exponent", "r2", "verdict", "artifacts"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Preconditions, GeometricSequenceRequired) {
  EXPECT_THROW(interference_decay(0, 1, {0.6, 0.8}, {1e-1, 5e-2, 2e-2, 1e-2, 5e-3}), std::invalid_argument);
  EXPECT_THROW(interference_decay(0, 1, {0.6, 0.8}, geometric(1e-1, 0.5, 4)), std::invalid_argument);
  EXPECT_THROW(interference_decay(1, 1, {0.6, 0.8}, geometric(1e-1, 0.5, 5)), std::invalid_argument);
  EXPECT_THROW(interference_decay(0, 1, {1.0, 0.0}, geometric(1e-1, 0.5, 5)), std::invalid_argument);
  EXPECT_THROW(interference_decay(0, 1, {0.6, 0.8}, geometric(1.0, 0.5, 5)), std::invalid_argument);
}

TEST(PlanckScaling, SelfSimilarAtMinusHalf) {
  CustomGrid prof = gaussian_profile();
  TomographyFrame f{0.6, 0.8};
  const double h1 = 0.04, h2 = 0.01;
  for (double F : {-0.3, 0.0, 0.2, 0.5}) {
    // W_h(X) = h^{-1/2} F(X/sqrt h)
    double a = std::sqrt(h1) * tomogram_point(planck_scaled_state(prof, -0.5, h1), f, F * std::sqrt(h1));
    double b = std::sqrt(h2) * tomogram_point(planck_scaled_state(prof, -0.5, h2), f, F * std::sqrt(h2));
    EXPECT_NEAR(a, b, 1e-6 * std::max(1.0, a));
  }
}

TEST(PlanckScaling, UnitHbarIsUnscaled) {
  CustomGrid prof = gaussian_profile();
  StateSpec s = planck_scaled_state(prof, -0.5, 1.0);
  const auto& v = s.as<CustomGrid>().psi.values();
  for (std::size_t i = 0; i < v.size(); i += 97) EXPECT_EQ(v[i], prof.psi.values()[i]);
  EXPECT_THROW(planck_scaled_state(prof, 0.5, 1.0), std::invalid_argument);
}

TEST(PlanckScaling, WidthFollowsHbar) {
  CustomGrid prof = gaussian_profile();
  TomographyFrame f{1.0, 0.0};
  UniformGrid g(-3.0, 3.0, 3001);
  double w1 = std::sqrt(planck_scaled_tomogram(prof, -0.5, 0.04, f, g).variance());
  double w2 = std::sqrt(planck_scaled_tomogram(prof, -0.5, 0.01, f, g).variance());
  EXPECT_NEAR(w1 / w2, 2.0, 1e-3);
}

TEST(WeakDelta, CoherentConverges) {
  std::vector<StateSpec> states;
  for (double h : geometric(1e-2, 0.25, 4)) states.push_back({Coherent{{1.0, 0.0}}, h});
  LimitReport r = weak_delta_convergence(states, {1.0, 0.0}, default_test_battery(), 0.0, 4001);
  EXPECT_EQ(r.verdict, Verdict::converged);
  ASSERT_TRUE(r.fitted_exponent.has_value());
  EXPECT_NEAR(*r.fitted_exponent, 0.5, 0.1);
}

TEST(WeakDelta, ShiftedProfileConvergesToShiftedCenter) {
  CustomGrid prof = gaussian_profile();
  const double x0 = 0.7;
  TomographyFrame f{0.8, 0.6};
  std::vector<StateSpec> states;
  for (double h : geometric(0.1, 0.25, 4)) {
    StateSpec s = planck_scaled_state(prof, -0.5, h);
    const auto& w = s.as<CustomGrid>().psi;
    UniformGrid g(w.grid().min() + x0, w.grid().max() + x0, w.grid().size());
    states.push_back({CustomGrid{SampledWave(g, w.values()), "shifted"}, h});
  }
  LimitReport r = weak_delta_convergence(states, f, default_test_battery(), f.mu * x0, 1201);
  EXPECT_EQ(r.verdict, Verdict::converged);
}

TEST(InterferenceDecay, ExponentHalf) {
  LimitReport r = interference_decay(0, 1, {0.6, 0.8}, geometric(1e-1, 0.5, 5), 4001);
  ASSERT_TRUE(r.fitted_exponent.has_value());
  EXPECT_NEAR(*r.fitted_exponent, 0.5, 0.03);
  EXPECT_GE(r.r2, 0.99);
  for (const auto& d : r.details) EXPECT_LT(std::abs(d["signed"].get<double>()), 1e-6);
  EXPECT_EQ(r.verdict, Verdict::converged);
}

TEST(CatPlanck, IntegralIndependentOfHbar) {
  LimitReport r = cat_interference_planck({1.0, 0.0}, {0.6, 0.8}, geometric(0.1, 0.5, 4), 4001);
  for (const auto& d : r.details) {
    EXPECT_NEAR(d["interference_integral"].get<double>(), 0.270671, 1e-6);
    EXPECT_NEAR(d["weak_coefficient_even"].get<double>(), 1.0, 1e-6);
  }
  EXPECT_EQ(r.verdict, Verdict::converged);
}

TEST(EhrenfestCoherent, PeakAtClassicalPoint) {
  LimitReport r = ehrenfest_coherent(1.0, 0.0, {1.0, 0.0}, {1e-2, 1e-3, 1e-4});
  for (const auto& d : r.details) {
    EXPECT_LT(d["peak_error"].get<double>(), d["cell"].get<double>());
    EXPECT_NEAR(d["width"].get<double>(), d["width_expected"].get<double>(), 1e-3 * d["width_expected"].get<double>());
  }
  EXPECT_EQ(r.verdict, Verdict::converged);
  LimitReport m = ehrenfest_coherent(0.3, 0.5, {0.0, 1.0}, {1e-2, 1e-3, 1e-4});
  EXPECT_DOUBLE_EQ(m.parameters["target"].get<double>(), 0.5);
}

TEST(EhrenfestCat, CrossingsAndEndpoints) {
  LimitReport r = ehrenfest_cat(1.0, 0.0, {0.6, 0.8}, geometric(1e-2, 0.5, 3));
  for (double ratio : r.parameters["crossing_ratios"]) EXPECT_NEAR(ratio, 2.0, 0.2);
  for (const auto& d : r.details) {
    EXPECT_NEAR(d["mass_left"].get<double>(), 0.5, 1e-3);
    EXPECT_NEAR(d["mass_right"].get<double>(), 0.5, 1e-3);
  }
  EXPECT_LT(std::abs(r.details[0]["norm_squared_even_minus_half"].get<double>()), 1e-21);
  EXPECT_EQ(r.verdict, Verdict::converged);
}

TEST(EhrenfestBox, WindowedDistanceDecreases) {
  BoxStudyOptions opt;
  opt.exact_check_max_n = 50;
  LimitReport r = ehrenfest_box(1.0, {25, 50, 100, 200}, {{1.0, 0.3}}, opt);
  EXPECT_TRUE(std::is_sorted(r.distances.rbegin(), r.distances.rend()));
  EXPECT_LT(r.distances.back(), 0.05);
  EXPECT_NEAR(r.parameters["position_plateau"].get<double>(), 1.0, 0.05);
  EXPECT_GE(r.parameters["momentum_concentration"].get<double>(), 0.9);
  EXPECT_EQ(r.verdict, Verdict::converged);
}

TEST(EhrenfestOscillator, ArcsineLaw) {
  LimitReport r = ehrenfest_oscillator({25, 50, 100});
  EXPECT_NEAR(r.parameters["classical_at_zero"].get<double>(), 1.0 / (std::sqrt(2.0) * pi), 1e-15);
  const auto& last = r.details.back();
  EXPECT_LT(last["l1"].get<double>(), 0.03);
  EXPECT_LT(last["forbidden_value"].get<double>(), 1e-4);
  EXPECT_LT(last["parabolic_route_max_relative_difference"].get<double>(), 0.02);
  EXPECT_NEAR(last["sin2_average"].get<double>(), 0.5, 0.02);
  EXPECT_EQ(r.verdict, Verdict::converged);
}

TEST(Determinism, RepeatedStudyIsIdentical) {
  auto a = interference_decay(2, 5, {0.6, 0.8}, geometric(1e-1, 0.5, 5), 2001).to_json().dump();
  auto b = interference_decay(2, 5, {0.6, 0.8}, geometric(1e-1, 0.5, 5), 2001).to_json().dump();
  EXPECT_EQ(a, b);
}
