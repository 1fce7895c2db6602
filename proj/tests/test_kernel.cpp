#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tomolab/kernel.hpp"

using namespace tomolab;

namespace {

Tomogram gaussian_tomogram(double mean, double sigma, UniformGrid grid, TomographyFrame f = {1.0, 0.0}) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double z = (grid[i] - mean) / sigma;
    v[i] = std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * pi));
  }
  return {f, grid, v};
}

}  // namespace

TEST(Frame, FromScaling) {
  auto a = frame_from_scaling(1.0, 0.0);
  EXPECT_DOUBLE_EQ(a.mu, 1.0);
  EXPECT_DOUBLE_EQ(a.nu, 0.0);
  auto b = frame_from_scaling(1.0, pi / 2);
  EXPECT_NEAR(b.mu, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(b.nu, 1.0);
  auto c = frame_from_scaling(2.0, pi / 4);
  EXPECT_NEAR(c.mu, 1.414214, 1e-6);
  EXPECT_NEAR(c.nu, 0.353553, 1e-6);
  EXPECT_THROW(frame_from_scaling(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(frame_from_scaling(-1.0, 1.0), std::invalid_argument);
}

TEST(Frame, ForwardIdentities) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> s(0.1, 5.0), th(-pi, pi);
  for (int k = 0; k < 100; ++k) {
    double sv = s(rng), tv = th(rng);
    auto f = frame_from_scaling(sv, tv);
    EXPECT_NEAR(f.mu / sv, std::cos(tv), 1e-12);
    EXPECT_NEAR(f.nu * sv, std::sin(tv), 1e-12);
  }
}

TEST(Grid, Basics) {
  UniformGrid g(-1.0, 1.0, 5);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
  EXPECT_DOUBLE_EQ(g[4], 1.0);
  EXPECT_TRUE(g.is_symmetric());
  EXPECT_EQ(g.refined(2).size(), 9u);
  EXPECT_THROW(UniformGrid(0.0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(UniformGrid(1.0, 0.0, 3), std::invalid_argument);
  auto c = UniformGrid::centered(0.0, 1.0, 0.25);
  EXPECT_EQ(c.size(), 9u);
  EXPECT_DOUBLE_EQ(c.min(), -1.0);
}

TEST(Normalization, Residual) {
  EXPECT_EQ(normalization_residual(Tomogram::point({1, 0}, 0.3)), 0.0);
  auto g = gaussian_tomogram(0.0, 1.0, UniformGrid(-8, 8, 2001));
  EXPECT_LT(normalization_residual(g), 1e-8);
  Tomogram zeros({1, 0}, UniformGrid(-1, 1, 11), std::vector<double>(11, 0.0));
  EXPECT_DOUBLE_EQ(normalization_residual(zeros), 1.0);
  Tomogram empty({1, 0}, UniformGrid{}, {});
  EXPECT_THROW(normalization_residual(empty), std::invalid_argument);
}

TEST(Normalization, RefinementStable) {
  UniformGrid grid(-8, 8, 801);
  auto g = gaussian_tomogram(0.3, 0.9, grid);
  auto fine = g.resampled(grid.refined(2));
  EXPECT_LT(std::abs(normalization_residual(fine) - normalization_residual(g)), 1e-6);
}

TEST(Tomogram, RejectsNegativeAndClampsNoise) {
  UniformGrid g(0, 1, 3);
  EXPECT_THROW(Tomogram({1, 0}, g, {1.0, -0.1, 1.0}), std::invalid_argument);
  Tomogram t({1, 0}, g, {1.0, -1e-12, 1.0});
  EXPECT_EQ(t.values()[1], 0.0);
  EXPECT_THROW(Tomogram({1, 0}, g, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(Tomogram({1, 0}, UniformGrid{}, {}, {{-1.0, 0.0}}), std::invalid_argument);
}

TEST(Distance, Basic) {
  UniformGrid grid(-10, 10, 2001);
  auto a = gaussian_tomogram(0.0, 1.0, grid);
  EXPECT_EQ(tomogram_distance_l1(a, a), 0.0);
  auto far = gaussian_tomogram(100.0, 1.0, UniformGrid(90, 110, 2001));
  EXPECT_NEAR(tomogram_distance_l1(a, far), 2.0, 1e-8);
  EXPECT_NEAR(tomogram_distance_l1(Tomogram::point({1, 0}, 0.0), Tomogram::point({1, 0}, 5.0)), 2.0, 1e-15);
  auto other = gaussian_tomogram(0.0, 1.0, grid, {0.0, 1.0});
  EXPECT_THROW(tomogram_distance_l1(a, other), std::invalid_argument);
}

TEST(Distance, ShiftedGaussiansMatchDenseOracle) {
  UniformGrid grid(-10, 10, 2001);
  auto a = gaussian_tomogram(0.0, 1.0, grid);
  auto b = gaussian_tomogram(0.1, 1.0, grid);
  // Oracle: brute-force quadrature at 10x resolution; closed form 2 erf(d / (2 sqrt 2)).
  UniformGrid fine = grid.refined(10);
  std::vector<double> diff(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) {
    double x = fine[i];
    diff[i] = std::abs(std::exp(-0.5 * x * x) - std::exp(-0.5 * (x - 0.1) * (x - 0.1))) / std::sqrt(2 * pi);
  }
  double oracle = trapezoid(diff, fine.spacing());
  EXPECT_NEAR(oracle, 2.0 * std::erf(0.1 / (2.0 * std::sqrt(2.0))), 1e-6);
  EXPECT_NEAR(tomogram_distance_l1(a, b), oracle, 1e-5);
  // Different grids: symmetric.
  auto c = gaussian_tomogram(0.1, 1.0, UniformGrid(-9, 11, 1501));
  EXPECT_NEAR(tomogram_distance_l1(a, c), tomogram_distance_l1(c, a), 1e-14);
  EXPECT_NEAR(tomogram_distance_l1(a, c), oracle, 1e-4);
}

TEST(Distance, TriangleInequality) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> m(-2, 2), s(0.3, 2);
  UniformGrid grid(-12, 12, 1201);
  for (int k = 0; k < 50; ++k) {
    auto a = gaussian_tomogram(m(rng), s(rng), grid);
    auto b = gaussian_tomogram(m(rng), s(rng), grid);
    auto c = gaussian_tomogram(m(rng), s(rng), grid);
    EXPECT_LE(tomogram_distance_l1(a, c), tomogram_distance_l1(a, b) + tomogram_distance_l1(b, c) + 1e-12);
  }
}

TEST(Wasserstein, AtomsAndDensities) {
  auto a = Tomogram::point({1, 0}, 0.0);
  auto b = Tomogram::point({1, 0}, 0.5);
  EXPECT_NEAR(wasserstein1(a, b), 0.5, 1e-15);
  UniformGrid grid(-10, 10, 4001);
  auto g = gaussian_tomogram(0.0, 0.1, grid);
  // E|X| for N(0, sigma^2) = sigma sqrt(2/pi).
  // Second-order scheme: error ~ h^2/12 int F'' at h = 0.005.
  EXPECT_NEAR(wasserstein1(g, a), 0.1 * std::sqrt(2.0 / pi), 5e-5);
}

TEST(GridFunction, IntegralAndInterpolation) {
  UniformGrid ax(-6, 6, 241);
  auto f = GridFunction2D<double>::sample(ax, ax, [](double x, double y) { return std::exp(-x * x - y * y) / pi; });
  EXPECT_NEAR(f.integral(), 1.0, 1e-8);
  EXPECT_NEAR(f.bilinear(0.0, 0.0), 1.0 / pi, 1e-12);
  EXPECT_EQ(f.bilinear(7.0, 0.0), 0.0);
  EXPECT_LT(f.boundary_max(), 1e-15);
}

TEST(Parallel, DeterministicAcrossWorkerCounts) {
  UniformGrid ax(-3, 3, 301);
  auto fn = [](double x, double y) { return std::sin(x * y) + x; };
  set_worker_count(1);
  auto a = GridFunction2D<double>::sample(ax, ax, fn);
  set_worker_count(4);
  auto b = GridFunction2D<double>::sample(ax, ax, fn);
  set_worker_count(-1);
  EXPECT_EQ(a.values(), b.values());
}
