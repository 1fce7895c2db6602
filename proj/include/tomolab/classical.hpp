#pragma once

// Classical tomograms: Radon transforms of phase-space densities, point
// trajectories and their time averages, and the closed forms for a particle
// in a box and for the harmonic oscillator.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tomolab/kernel.hpp"

namespace tomolab {

/// Phase-space density f on a (q, p) grid.
struct DensityGrid {
  GridFunction2D<double> f;
};

/// Periodic point motion (q(t), p(t)) with period T.
class PointTrajectory {
 public:
  using Path = std::function<double(double)>;
  PointTrajectory(Path q, Path p, double period) : q_(std::move(q)), p_(std::move(p)), period_(period) {
    if (!(period > 0.0)) throw std::invalid_argument("PointTrajectory: period must be positive");
    if (std::abs(q_(0.0) - q_(period)) >= 1e-9 || std::abs(p_(0.0) - p_(period)) >= 1e-9)
      throw std::invalid_argument("PointTrajectory: q and p must be periodic with the given period");
  }
  double q(double t) const { return q_(t); }
  double p(double t) const { return p_(t); }
  double period() const noexcept { return period_; }

 private:
  Path q_;
  Path p_;
  double period_;
};

/// Free particle of energy E (unit mass) bouncing in [0, L].
struct BoxTrajectory {
  double L = 1.0;
  double E = 1.0;
};

/// Unit-mass, unit-frequency oscillator of energy E.
struct OscillatorTrajectory {
  double E = 1.0;
};

using ClassicalModel = std::variant<DensityGrid, PointTrajectory, BoxTrajectory, OscillatorTrajectory>;

/// Number of cells on either side of a turning value that carry cell-averaged mass.
inline constexpr int kTurningZoneCells = 16;

// ---------------------------------------------------------------------------
// Radon transform of a density

namespace detail {

// Mass tolerance for produced tomograms.
inline constexpr double kClassicalMassTolerance = 1e-3;

// Integral of g along the line mu q + nu p = X clipped to the grid
// rectangle, divided by |(mu, nu)|. (mu, nu, X) are flipped to a canonical
// orientation first so that frames differing by a sign use the same nodes.
template <class Interp>
double line_integral(const UniformGrid& qa, const UniformGrid& pa, TomographyFrame f, double X, Interp&& g) {
  if (f.mu < 0.0 || (f.mu == 0.0 && f.nu < 0.0)) {
    f = f.scaled(-1.0);
    X = -X;
  }
  const double r = f.norm();
  const double nq = f.mu / r, np = f.nu / r;
  const double q0 = X / r * nq, p0 = X / r * np;
  // direction along the line
  const double tq = -np, tp = nq;
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  auto clip = [&](double origin, double dir, double a, double b) {
    if (dir == 0.0) {
      if (origin < a || origin > b) lo = 1.0, hi = 0.0;
      return;
    }
    double s1 = (a - origin) / dir, s2 = (b - origin) / dir;
    lo = std::max(lo, std::min(s1, s2));
    hi = std::min(hi, std::max(s1, s2));
  };
  clip(q0, tq, qa.min(), qa.max());
  clip(p0, tp, pa.min(), pa.max());
  if (!(hi > lo)) return 0.0;
  const double ds = 0.5 * std::min(qa.spacing(), pa.spacing());
  auto n = static_cast<std::size_t>(std::ceil((hi - lo) / ds));
  n = std::max<std::size_t>(n, 2);
  const double h = (hi - lo) / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    double s = lo + static_cast<double>(k) * h;
    double w = (k == 0 || k == n) ? 0.5 : 1.0;
    sum += w * g(q0 + s * tq, p0 + s * tp);
  }
  return sum * h / r;
}

inline void check_support(const GridFunction2D<double>& f, const char* who) {
  double peak = f.abs_max();
  double edge = f.boundary_max();
  if (edge > 1e-3 * peak) {
    double total = f.integral();
    throw MassDeficitError(std::string(who) + ": density does not vanish on the grid boundary (edge/peak = " +
                               std::to_string(edge / peak) + ", grid mass " + std::to_string(total) + ")",
                           std::abs(1.0 - total));
  }
}

inline void check_mass(const Tomogram& t, double expected, const char* who) {
  double deficit = std::abs(t.mass() - expected);
  if (deficit > kClassicalMassTolerance * std::max(1.0, std::abs(expected)))
    throw MassDeficitError(std::string(who) + ": tomogram mass " + std::to_string(t.mass()) + " differs from " +
                               std::to_string(expected) + "; the X grid does not cover the support",
                           deficit);
}

}  // namespace detail

/// W(X) = integral of f(q, p) delta(X - mu q - nu p) dq dp, by trapezoid
/// quadrature along each line with bilinear interpolation of f.
inline Tomogram radon_density(const DensityGrid& model, const TomographyFrame& frame, const UniformGrid& x_grid) {
  if (frame.is_zero()) throw std::invalid_argument("radon_density: frame (0, 0) has no Radon line");
  const auto& f = model.f;
  detail::check_support(f, "radon_density");
  std::vector<double> v(x_grid.size());
  parallel_for(v.size(), [&](std::size_t i) {
    v[i] = detail::line_integral(f.x_axis(), f.y_axis(), frame, x_grid[i],
                                 [&](double q, double p) { return f.bilinear(q, p); });
  });
  Tomogram t(frame, x_grid, std::move(v));
  detail::check_mass(t, f.integral(), "radon_density");
  return t;
}

// ---------------------------------------------------------------------------
// Trajectories

/// delta(X - mu q(t) - nu p(t)) as an atom.
inline DeltaAtom trajectory_tomogram(const PointTrajectory& model, double t, const TomographyFrame& frame) {
  return {1.0, frame.mu * model.q(t) + frame.nu * model.p(t)};
}

/// Speed of the box particle, sqrt(2E).
inline double box_speed(double E) { return std::sqrt(2.0 * E); }

/// Time-averaged tomogram of the box particle,
/// (1/(2|mu|L)) [chi(Q-) + chi(Q+)], Q-+ = (X -+ v nu)/mu with v = sqrt(2E).
/// chi is the closed indicator of [0, L]. Requires mu != 0.
inline double classical_box_tomogram(double X, const TomographyFrame& frame, double L, double E = 1.0) {
  if (frame.is_zero()) throw std::invalid_argument("classical_box_tomogram: zero frame");
  if (frame.mu == 0.0)
    throw std::domain_error("classical_box_tomogram: mu = 0 is a pair of atoms; use classical_box_tomogram_grid");
  if (!(L > 0.0) || !(E > 0.0)) throw std::invalid_argument("classical_box_tomogram: L and E must be positive");
  const double v = box_speed(E);
  auto chi = [L](double q) { return q >= 0.0 && q <= L ? 1.0 : 0.0; };
  double qm = (X - v * frame.nu) / frame.mu;
  double qp = (X + v * frame.nu) / frame.mu;
  return (chi(qm) + chi(qp)) / (2.0 * std::abs(frame.mu) * L);
}

namespace detail {

// Cell [x - h/2, x + h/2] intersected with the grid extent.
inline std::pair<double, double> grid_cell(const UniformGrid& g, std::size_t i) {
  double h = g.spacing();
  return {std::max(g.min(), g[i] - 0.5 * h), std::min(g.max(), g[i] + 0.5 * h)};
}

// Trapezoid weight of node i relative to h.
inline double node_weight(const UniformGrid& g, std::size_t i) { return (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0; }

inline double overlap(double a, double b, double lo, double hi) { return std::max(0.0, std::min(b, hi) - std::max(a, lo)); }

}  // namespace detail

/// Box tomogram on a grid. Each node carries the exact mass of its cell, so
/// the support edges do not leave a step error; interior nodes equal the
/// pointwise value. mu = 0 gives atoms 1/2 at X = +- v nu.
inline Tomogram classical_box_tomogram_grid(const TomographyFrame& frame, const UniformGrid& grid, double L,
                                            double E = 1.0) {
  if (frame.is_zero()) throw std::invalid_argument("classical_box_tomogram: zero frame");
  if (!(L > 0.0) || !(E > 0.0)) throw std::invalid_argument("classical_box_tomogram: L and E must be positive");
  const double shift = box_speed(E) * frame.nu;
  if (frame.mu == 0.0)
    return {frame, grid, std::vector<double>(grid.size(), 0.0), {{0.5, -std::abs(shift)}, {0.5, std::abs(shift)}}};
  const double lo = std::min(0.0, frame.mu * L), hi = std::max(0.0, frame.mu * L);
  const double density = 1.0 / (2.0 * std::abs(frame.mu) * L);
  const double h = grid.spacing();
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto [a, b] = detail::grid_cell(grid, i);
    double mass = density * (detail::overlap(a, b, lo + shift, hi + shift) + detail::overlap(a, b, lo - shift, hi - shift));
    v[i] = mass / (detail::node_weight(grid, i) * h);
  }
  return {frame, grid, std::move(v)};
}

/// Radius of the oscillator's support in X, sqrt(2E(mu^2 + nu^2)).
inline double oscillator_radius(const TomographyFrame& frame, double E) {
  return std::sqrt(2.0 * E * (frame.mu * frame.mu + frame.nu * frame.nu));
}

/// Arcsine law 1/(pi sqrt(R^2 - X^2)) on |X| < R; infinite at the turning
/// points |X| = R.
inline double classical_oscillator_tomogram(double X, const TomographyFrame& frame, double E = 1.0) {
  if (frame.is_zero()) throw std::invalid_argument("classical_oscillator_tomogram: zero frame");
  if (!(E > 0.0)) throw std::invalid_argument("classical_oscillator_tomogram: E must be positive");
  const double R = oscillator_radius(frame, E);
  const double ax = std::abs(X);
  if (ax > R) return 0.0;
  if (ax == R) return std::numeric_limits<double>::infinity();
  return 1.0 / (pi * std::sqrt((R - ax) * (R + ax)));
}

/// Mass of the arcsine law on [a, b].
inline double oscillator_cell_mass(double a, double b, double R) {
  auto F = [R](double x) { return std::asin(std::clamp(x / R, -1.0, 1.0)) / pi; };
  return F(b) - F(a);
}

/// Arcsine law on a grid; cells within kTurningZoneCells of +-R carry their
/// analytically integrated mass.
inline Tomogram classical_oscillator_tomogram_grid(const TomographyFrame& frame, const UniformGrid& grid, double E = 1.0) {
  const double R = oscillator_radius(frame, E);
  if (R == 0.0) throw std::invalid_argument("classical_oscillator_tomogram: zero frame");
  const double h = grid.spacing();
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = grid[i];
    if (std::abs(std::abs(x) - R) <= kTurningZoneCells * h) {
      auto [a, b] = detail::grid_cell(grid, i);
      v[i] = oscillator_cell_mass(a, b, R) / (detail::node_weight(grid, i) * h);
    } else {
      v[i] = classical_oscillator_tomogram(x, frame, E);
    }
  }
  return {frame, grid, std::move(v)};
}

// ---------------------------------------------------------------------------
// Time averages of generic trajectories

namespace detail {

inline constexpr std::size_t kTimeMesh = 4096;

// Monotone piece [t0, t1] of g(t) = mu q(t) + nu p(t).
struct MonotonePiece {
  double t0, t1;
  double g0, g1;
};

// Time t in [piece] with g(t) = x, by bisection (x between g0 and g1).
template <class G>
double invert_piece(const MonotonePiece& pc, G&& g, double x) {
  double a = pc.t0, b = pc.t1;
  bool rising = pc.g1 > pc.g0;
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
    double m = 0.5 * (a + b);
    ((g(m) < x) == rising ? a : b) = m;
  }
  return 0.5 * (a + b);
}

// Golden-section refinement of an extremum of g bracketed by [a, b].
template <class G>
double refine_extremum(G&& g, double a, double b, bool maximum) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  auto score = [&](double t) { return maximum ? g(t) : -g(t); };
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = score(c), fd = score(d);
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
    if (fc > fd) {
      b = d, d = c, fd = fc, c = b - r * (b - a), fc = score(c);
    } else {
      a = c, c = d, fc = fd, d = a + r * (b - a), fd = score(d);
    }
  }
  return 0.5 * (a + b);
}

template <class G>
std::vector<MonotonePiece> monotone_pieces(G&& g, double T) {
  const std::size_t n = kTimeMesh;
  std::vector<double> ts(n + 1), gs(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    ts[k] = T * static_cast<double>(k) / static_cast<double>(n);
    gs[k] = g(ts[k]);
  }
  // Breakpoints at mesh-detected extrema, refined.
  std::vector<double> breaks{0.0};
  for (std::size_t k = 1; k < n; ++k) {
    double dl = gs[k] - gs[k - 1], dr = gs[k + 1] - gs[k];
    if ((dl > 0.0 && dr <= 0.0) || (dl < 0.0 && dr >= 0.0)) {
      double t = refine_extremum(g, ts[k - 1], ts[k + 1], dl > 0.0);
      if (t > breaks.back()) breaks.push_back(t);
    }
  }
  breaks.push_back(T);
  std::vector<MonotonePiece> out;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    double a = breaks[k], b = breaks[k + 1];
    if (b - a <= 0.0) continue;
    out.push_back({a, b, g(a), g(b)});
  }
  return out;
}

}  // namespace detail

/// (1/T) integral_0^T delta(X - mu q(t) - nu p(t)) dt as a sum over roots
/// t* of 1/(T |d/dt (mu q + nu p)|). Turning values and their neighbouring
/// cells carry the cell-averaged mass. A frame along which the trajectory is
/// stationary gives a single atom.
inline Tomogram time_averaged_tomogram(const PointTrajectory& model, const TomographyFrame& frame,
                                       const UniformGrid& grid) {
  const double T = model.period();
  auto g = [&](double t) { return frame.mu * model.q(t) + frame.nu * model.p(t); };
  auto pieces = detail::monotone_pieces(g, T);
  double gmin = std::numeric_limits<double>::infinity(), gmax = -gmin;
  for (const auto& pc : pieces) {
    gmin = std::min({gmin, pc.g0, pc.g1});
    gmax = std::max({gmax, pc.g0, pc.g1});
  }
  const double scale = std::max({std::abs(gmin), std::abs(gmax), 1e-300});
  if (gmax - gmin <= 1e-12 * scale) return {frame, grid, std::vector<double>(grid.size(), 0.0), {{1.0, 0.5 * (gmin + gmax)}}};
  if (grid.empty()) throw std::invalid_argument("time_averaged_tomogram: empty X grid");

  const double h = grid.spacing();
  std::vector<double> turning;
  for (const auto& pc : pieces) turning.push_back(pc.g0), turning.push_back(pc.g1);
  auto near_turning = [&](double x) {
    for (double tv : turning)
      if (std::abs(x - tv) <= kTurningZoneCells * h) return true;
    return false;
  };
  // Time spent with g in [a, b] on one piece.
  auto dwell = [&](const detail::MonotonePiece& pc, double a, double b) {
    double lo = std::min(pc.g0, pc.g1), hi = std::max(pc.g0, pc.g1);
    a = std::max(a, lo), b = std::min(b, hi);
    if (!(b > a)) return 0.0;
    return std::abs(detail::invert_piece(pc, g, b) - detail::invert_piece(pc, g, a));
  };

  std::vector<double> v(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    const double x = grid[i];
    double value = 0.0;
    if (near_turning(x)) {
      auto [a, b] = detail::grid_cell(grid, i);
      double mass = 0.0;
      for (const auto& pc : pieces) mass += dwell(pc, a, b);
      value = mass / T / (detail::node_weight(grid, i) * h);
    } else {
      for (const auto& pc : pieces) {
        double lo = std::min(pc.g0, pc.g1), hi = std::max(pc.g0, pc.g1);
        if (x < lo || x > hi) continue;
        double t = detail::invert_piece(pc, g, x);
        double dt = 1e-6 * T;
        double slope = (g(t + dt) - g(t - dt)) / (2.0 * dt);
        if (slope != 0.0) value += 1.0 / (T * std::abs(slope));
      }
    }
    v[i] = value;
  });
  Tomogram t(frame, grid, std::move(v));
  bool covered = grid.min() <= gmin && grid.max() >= gmax;
  double deficit = std::abs(t.mass() - 1.0);
  if (deficit > detail::kClassicalMassTolerance) {
    if (!covered)
      throw MassDeficitError("time_averaged_tomogram: X grid [" + std::to_string(grid.min()) + ", " +
                                 std::to_string(grid.max()) + "] does not cover the trajectory range [" +
                                 std::to_string(gmin) + ", " + std::to_string(gmax) + "]",
                             deficit);
    throw ResolutionError("time_averaged_tomogram: mass deficit " + std::to_string(deficit) +
                              " with the trajectory range covered; the time mesh misses sign changes",
                          2 * detail::kTimeMesh);
  }
  return t;
}

inline Tomogram time_averaged_tomogram(const BoxTrajectory& model, const TomographyFrame& frame,
                                       const UniformGrid& grid) {
  return classical_box_tomogram_grid(frame, grid, model.L, model.E);
}

inline Tomogram time_averaged_tomogram(const OscillatorTrajectory& model, const TomographyFrame& frame,
                                       const UniformGrid& grid) {
  return classical_oscillator_tomogram_grid(frame, grid, model.E);
}

/// Tomogram of any classical model: Radon transform for densities, time
/// average for trajectories.
inline Tomogram classical_tomogram(const ClassicalModel& model, const TomographyFrame& frame, const UniformGrid& grid) {
  return std::visit(
      [&](const auto& m) -> Tomogram {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, DensityGrid>) return radon_density(m, frame, grid);
        else return time_averaged_tomogram(m, frame, grid);
      },
      model);
}

/// Oscillator orbit through (q0, p0): q = q0 cos t + p0 sin t, p = p0 cos t - q0 sin t.
inline PointTrajectory oscillator_orbit(double q0, double p0) {
  return {[=](double t) { return q0 * std::cos(t) + p0 * std::sin(t); },
          [=](double t) { return p0 * std::cos(t) - q0 * std::sin(t); }, 2.0 * pi};
}

/// Particle at rest at (q0, p0); any positive period.
inline PointTrajectory rest_point(double q0, double p0) {
  return {[=](double) { return q0; }, [=](double) { return p0; }, 1.0};
}

}  // namespace tomolab
