#pragma once

// Core value types: frames, uniform grids, tomograms with delta atoms,
// two-dimensional grid functions, and the trapezoid/metric utilities every
// other module builds on.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tomolab {

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Errors

/// Numerical failure that carries a diagnostic (as opposed to a bad argument,
/// which is reported with std::invalid_argument / std::domain_error).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Oscillatory quadrature would need more nodes than the budget allows.
class ResolutionError : public NumericalError {
 public:
  ResolutionError(const std::string& what, std::size_t required)
      : NumericalError(what), required_nodes_(required) {}
  std::size_t required_nodes() const noexcept { return required_nodes_; }

 private:
  std::size_t required_nodes_;
};

/// The grid does not carry the full probability mass.
class MassDeficitError : public NumericalError {
 public:
  MassDeficitError(const std::string& what, double deficit)
      : NumericalError(what), deficit_(deficit) {}
  double deficit() const noexcept { return deficit_; }

 private:
  double deficit_;
};

/// Frame sampling too coarse for the declared phase-space support.
class NyquistError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// ---------------------------------------------------------------------------
// Frames

/// The (mu, nu) pair labelling the phase-space line X = mu q + nu p.
/// mu has units 1/length, nu units 1/momentum; any real pair is allowed.
struct TomographyFrame {
  double mu = 1.0;
  double nu = 0.0;

  bool is_zero() const noexcept { return mu == 0.0 && nu == 0.0; }
  /// |zeta| for unit varpi, the Euclidean length of (mu, nu).
  double norm() const noexcept { return std::hypot(mu, nu); }
  TomographyFrame scaled(double lambda) const noexcept { return {lambda * mu, lambda * nu}; }
  friend bool operator==(const TomographyFrame&, const TomographyFrame&) = default;
};

/// mu = s cos(theta), nu = sin(theta) / s.
inline TomographyFrame frame_from_scaling(double s, double theta) {
  if (!(s > 0.0)) throw std::invalid_argument("frame_from_scaling: scaling s must be positive");
  return {s * std::cos(theta), std::sin(theta) / s};
}

inline bool same_frame(const TomographyFrame& a, const TomographyFrame& b, double tol = 1e-12) {
  return std::abs(a.mu - b.mu) <= tol * std::max(1.0, std::abs(a.mu)) &&
         std::abs(a.nu - b.nu) <= tol * std::max(1.0, std::abs(a.nu));
}

// ---------------------------------------------------------------------------
// Uniform grids

/// count uniformly spaced nodes from lo to hi inclusive. count == 0 is the
/// empty grid (a tomogram made only of atoms); otherwise count >= 2.
class UniformGrid {
 public:
  UniformGrid() = default;
  UniformGrid(double lo, double hi, std::size_t count) : lo_(lo), hi_(hi), count_(count) {
    if (count == 1) throw std::invalid_argument("UniformGrid: count must be 0 or >= 2");
    if (count >= 2 && !(hi > lo)) throw std::invalid_argument("UniformGrid: need max > min");
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("UniformGrid: non-finite bounds");
  }
  /// Grid with given spacing, centred on `center`, covering at least +-half_width.
  static UniformGrid centered(double center, double half_width, double spacing) {
    auto half = static_cast<std::size_t>(std::ceil(half_width / spacing));
    half = std::max<std::size_t>(half, 1);
    return {center - static_cast<double>(half) * spacing, center + static_cast<double>(half) * spacing, 2 * half + 1};
  }

  double min() const noexcept { return lo_; }
  double max() const noexcept { return hi_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  double spacing() const noexcept { return count_ >= 2 ? (hi_ - lo_) / static_cast<double>(count_ - 1) : 0.0; }
  double operator[](std::size_t i) const noexcept {
    // Last node pinned to hi exactly.
    return i + 1 == count_ ? hi_ : lo_ + static_cast<double>(i) * spacing();
  }
  bool contains(double x) const noexcept { return count_ >= 2 && x >= lo_ && x <= hi_; }
  std::vector<double> nodes() const {
    std::vector<double> out(count_);
    for (std::size_t i = 0; i < count_; ++i) out[i] = (*this)[i];
    return out;
  }
  /// Same extent, factor times finer.
  UniformGrid refined(std::size_t factor) const {
    if (count_ < 2) return *this;
    return {lo_, hi_, (count_ - 1) * factor + 1};
  }
  bool is_symmetric(double tol = 1e-12) const noexcept {
    return std::abs(lo_ + hi_) <= tol * std::max(1.0, hi_ - lo_);
  }
  friend bool operator==(const UniformGrid&, const UniformGrid&) = default;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::size_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Worker pool

namespace detail {
inline std::atomic<int>& thread_override() {
  static std::atomic<int> value{-1};
  return value;
}
inline thread_local bool in_parallel_region = false;
}  // namespace detail

/// Worker count: set_worker_count() if called, else TOMOLAB_THREADS (0 = auto).
inline unsigned worker_count() {
  int forced = detail::thread_override().load();
  long requested = forced;
  if (forced < 0) {
    const char* env = std::getenv("TOMOLAB_THREADS");
    requested = env ? std::strtol(env, nullptr, 10) : 0;
  }
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (requested <= 0) return hw;
  return static_cast<unsigned>(std::min<long>(requested, 256));
}

inline void set_worker_count(int n) { detail::thread_override().store(n); }

/// Runs fn(i) for i in [0, n). Each index must write only its own output
/// slot; results are therefore independent of scheduling. Nested calls run
/// serially.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1 || detail::in_parallel_region || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    detail::in_parallel_region = true;
    try {
      for (std::size_t i; (i = next.fetch_add(1)) < n && !failed.load();) fn(i);
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
    detail::in_parallel_region = false;
  };
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Quadrature helpers

/// Trapezoid rule on uniform samples, summed left to right.
template <class T>
T trapezoid(std::span<const T> values, double dx) {
  if (values.size() < 2) return T{};
  T sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return sum * dx;
}

inline double trapezoid(const std::vector<double>& values, double dx) {
  return trapezoid<double>(std::span<const double>(values), dx);
}

/// Cumulative trapezoid integral; out[0] = 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> values, double dx) {
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t i = 1; i < values.size(); ++i) out[i] = out[i - 1] + 0.5 * dx * (values[i - 1] + values[i]);
  return out;
}

/// Linear interpolation of uniform samples; zero outside the grid.
template <class T>
T interpolate_linear(const UniformGrid& grid, std::span<const T> values, double x) {
  if (!grid.contains(x)) return T{};
  double t = (x - grid.min()) / grid.spacing();
  auto i = static_cast<std::size_t>(t);
  if (i + 1 >= grid.size()) return values[grid.size() - 1];
  double f = t - static_cast<double>(i);
  return (1.0 - f) * values[i] + f * values[i + 1];
}

// ---------------------------------------------------------------------------
// Tomograms

/// Exact point mass of a tomogram.
struct DeltaAtom {
  double weight = 1.0;
  double location = 0.0;
  friend bool operator==(const DeltaAtom&, const DeltaAtom&) = default;
};

/// Probability density in X for one frame: smooth samples on a uniform grid
/// plus explicit delta atoms. Immutable once built.
class Tomogram {
 public:
  /// Negative samples within the quadrature noise floor
  /// (1e-9 of the largest sample) are clamped to zero; anything below is
  /// rejected.
  Tomogram(TomographyFrame frame, UniformGrid grid, std::vector<double> values, std::vector<DeltaAtom> atoms = {})
      : frame_(frame), grid_(grid), values_(std::move(values)), atoms_(std::move(atoms)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("Tomogram: value count does not match grid");
    double peak = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("Tomogram: non-finite sample");
      peak = std::max(peak, std::abs(v));
    }
    const double floor = 1e-9 * peak + 1e-300;
    for (double& v : values_) {
      if (v < 0.0) {
        if (v < -floor) throw std::invalid_argument("Tomogram: negative density sample " + std::to_string(v));
        v = 0.0;
      }
    }
    for (const auto& a : atoms_)
      if (!(a.weight >= 0.0) || !std::isfinite(a.location)) throw std::invalid_argument("Tomogram: invalid delta atom");
  }

  /// Tomogram consisting of a single unit atom.
  static Tomogram point(TomographyFrame frame, double location, double weight = 1.0) {
    return {frame, UniformGrid{}, {}, {{weight, location}}};
  }

  const TomographyFrame& frame() const noexcept { return frame_; }
  const UniformGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<DeltaAtom>& atoms() const noexcept { return atoms_; }

  double smooth_mass() const { return trapezoid(values_, grid_.spacing()); }
  double atom_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight;
    return s;
  }
  double mass() const { return smooth_mass() + atom_mass(); }

  /// Linear interpolation of the smooth part (atoms excluded).
  double at(double x) const { return interpolate_linear<double>(grid_, values_, x); }

  /// Smooth part resampled on another grid by linear interpolation.
  Tomogram resampled(const UniformGrid& grid) const {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = at(grid[i]);
    return {frame_, grid, std::move(v), atoms_};
  }

  /// Integral of test(X) against the full measure (trapezoid + atoms).
  template <class Fn>
  double integrate(Fn&& test) const {
    std::vector<double> prod(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) prod[i] = values_[i] * test(grid_[i]);
    double s = trapezoid(prod, grid_.spacing());
    for (const auto& a : atoms_) s += a.weight * test(a.location);
    return s;
  }

  double mean() const {
    return integrate([](double x) { return x; }) / mass();
  }
  double variance() const {
    double m = mean();
    return integrate([m](double x) { return (x - m) * (x - m); }) / mass();
  }

 private:
  TomographyFrame frame_;
  UniformGrid grid_;
  std::vector<double> values_;
  std::vector<DeltaAtom> atoms_;
};

/// |trapezoid(values) + sum(atom weights) - 1|.
inline double normalization_residual(const Tomogram& t) {
  if (t.grid().empty() && t.atoms().empty())
    throw std::invalid_argument("normalization_residual: tomogram has neither grid nor atoms");
  return std::abs(t.mass() - 1.0);
}

namespace detail {

// Sum of |wa - wb| over atoms matched by nearest location within tol, plus
// the weight of every unmatched atom. Greedy in order of a's atoms.
inline double atom_distance(const std::vector<DeltaAtom>& a, const std::vector<DeltaAtom>& b, double tol) {
  std::vector<bool> used(b.size(), false);
  double d = 0.0;
  for (const auto& x : a) {
    std::size_t best = b.size();
    double best_gap = tol;
    for (std::size_t j = 0; j < b.size(); ++j) {
      double gap = std::abs(b[j].location - x.location);
      if (!used[j] && gap <= best_gap) {
        best = j;
        best_gap = gap;
      }
    }
    if (best < b.size()) {
      used[best] = true;
      d += std::abs(x.weight - b[best].weight);
    } else {
      d += x.weight;
    }
  }
  for (std::size_t j = 0; j < b.size(); ++j)
    if (!used[j]) d += b[j].weight;
  return d;
}

inline std::vector<double> merged_nodes(const UniformGrid& a, const UniformGrid& b) {
  std::vector<double> xs = a.nodes();
  auto bn = b.nodes();
  xs.insert(xs.end(), bn.begin(), bn.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace detail

/// L1 distance between two tomograms of the same frame: integral of the
/// absolute difference of the smooth parts plus the atom mismatch.
/// Identical grids use the trapezoid rule directly; otherwise both smooth
/// parts are linearly interpolated on the merged node set.
inline double tomogram_distance_l1(const Tomogram& a, const Tomogram& b) {
  if (!same_frame(a.frame(), b.frame())) throw std::invalid_argument("tomogram_distance_l1: frames differ");
  double smooth = 0.0;
  if (a.grid() == b.grid()) {
    std::vector<double> diff(a.values().size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(a.values()[i] - b.values()[i]);
    smooth = trapezoid(diff, a.grid().spacing());
  } else {
    auto xs = detail::merged_nodes(a.grid(), b.grid());
    for (std::size_t i = 1; i < xs.size(); ++i) {
      double l = std::abs(a.at(xs[i - 1]) - b.at(xs[i - 1]));
      double r = std::abs(a.at(xs[i]) - b.at(xs[i]));
      smooth += 0.5 * (xs[i] - xs[i - 1]) * (l + r);
    }
  }
  double tol = std::max({a.grid().spacing(), b.grid().spacing(), 1e-12});
  return smooth + detail::atom_distance(a.atoms(), b.atoms(), tol);
}

/// Wasserstein-1 distance, the L1 norm of the difference of the cumulative
/// distribution functions. Handles atoms exactly; used where one side is a
/// point mass and L1 would saturate at 2.
inline double wasserstein1(const Tomogram& a, const Tomogram& b) {
  std::vector<double> xs;
  for (const auto* t : {&a, &b}) {
    auto n = t->grid().nodes();
    xs.insert(xs.end(), n.begin(), n.end());
    for (const auto& at : t->atoms()) xs.push_back(at.location);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.size() < 2) return 0.0;
  // CDF just left and just right of each breakpoint; the smooth parts are
  // accumulated by the trapezoid rule and |F_a - F_b| is integrated by the
  // trapezoid rule between breakpoints.
  struct Cdf {
    std::vector<double> left, right;
  };
  auto cdf = [&](const Tomogram& t) {
    Cdf c{std::vector<double>(xs.size()), std::vector<double>(xs.size())};
    double acc = 0.0;
    std::size_t k = 0;
    std::vector<DeltaAtom> atoms = t.atoms();
    std::sort(atoms.begin(), atoms.end(), [](auto& l, auto& r) { return l.location < r.location; });
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) acc += 0.5 * (xs[i] - xs[i - 1]) * (t.at(xs[i - 1]) + t.at(xs[i]));
      c.left[i] = acc;
      while (k < atoms.size() && atoms[k].location <= xs[i]) acc += atoms[k++].weight;
      c.right[i] = acc;
    }
    return c;
  };
  auto ca = cdf(a), cb = cdf(b);
  double d = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    d += 0.5 * (xs[i + 1] - xs[i]) *
         (std::abs(ca.right[i] - cb.right[i]) + std::abs(ca.left[i + 1] - cb.left[i + 1]));
  return d;
}

// ---------------------------------------------------------------------------
// Two-dimensional grid functions

/// Samples f(x_i, y_j) on a product of uniform axes, stored x-major:
/// values[i * ny + j]. Used for f(q, p), W(q, p) and rho(x, x').
template <class T>
class GridFunction2D {
 public:
  GridFunction2D() = default;
  GridFunction2D(UniformGrid x, UniformGrid y, std::vector<T> values)
      : x_(x), y_(y), values_(std::move(values)) {
    if (x_.size() < 2 || y_.size() < 2) throw std::invalid_argument("GridFunction2D: axes need >= 2 nodes");
    if (values_.size() != x_.size() * y_.size()) throw std::invalid_argument("GridFunction2D: value count mismatch");
  }
  template <class Fn>
  static GridFunction2D sample(UniformGrid x, UniformGrid y, Fn&& fn) {
    std::vector<T> v(x.size() * y.size());
    parallel_for(x.size(), [&](std::size_t i) {
      for (std::size_t j = 0; j < y.size(); ++j) v[i * y.size() + j] = fn(x[i], y[j]);
    });
    return {x, y, std::move(v)};
  }

  const UniformGrid& x_axis() const noexcept { return x_; }
  const UniformGrid& y_axis() const noexcept { return y_; }
  const std::vector<T>& values() const noexcept { return values_; }
  const T& operator()(std::size_t i, std::size_t j) const { return values_[i * y_.size() + j]; }

  /// Bilinear interpolation; zero outside the rectangle.
  T bilinear(double x, double y) const {
    if (!x_.contains(x) || !y_.contains(y)) return T{};
    double tx = (x - x_.min()) / x_.spacing();
    double ty = (y - y_.min()) / y_.spacing();
    auto i = std::min(static_cast<std::size_t>(tx), x_.size() - 2);
    auto j = std::min(static_cast<std::size_t>(ty), y_.size() - 2);
    double fx = tx - static_cast<double>(i), fy = ty - static_cast<double>(j);
    return (1 - fx) * ((1 - fy) * (*this)(i, j) + fy * (*this)(i, j + 1)) +
           fx * ((1 - fy) * (*this)(i + 1, j) + fy * (*this)(i + 1, j + 1));
  }

  /// Two-dimensional trapezoid integral.
  T integral() const {
    T total{};
    for (std::size_t i = 0; i < x_.size(); ++i) {
      double wi = (i == 0 || i + 1 == x_.size()) ? 0.5 : 1.0;
      T row{};
      for (std::size_t j = 0; j < y_.size(); ++j) {
        double wj = (j == 0 || j + 1 == y_.size()) ? 0.5 : 1.0;
        row += wj * (*this)(i, j);
      }
      total += wi * row;
    }
    return total * (x_.spacing() * y_.spacing());
  }

  /// Largest |value| on the boundary of the rectangle.
  double boundary_max() const {
    double m = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i)
      m = std::max({m, std::abs((*this)(i, 0)), std::abs((*this)(i, y_.size() - 1))});
    for (std::size_t j = 0; j < y_.size(); ++j)
      m = std::max({m, std::abs((*this)(0, j)), std::abs((*this)(x_.size() - 1, j))});
    return m;
  }
  double abs_max() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  UniformGrid x_;
  UniformGrid y_;
  std::vector<T> values_;
};

/// Value plus the size of the imaginary part discarded by an inverse map.
struct Reconstructed {
  double value = 0.0;
  double imag_residual = 0.0;
};

}  // namespace tomolab
