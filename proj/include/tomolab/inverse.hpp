#pragma once

// Inverse maps: phase-space densities, Wigner functions and density matrices
// reconstructed from families of tomograms.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tomolab/classical.hpp"
#include "tomolab/kernel.hpp"
#include "tomolab/quantum.hpp"
#include "tomolab/state.hpp"

namespace tomolab {

/// int W(X) e^{i k X} dX, trapezoid over the smooth part plus the atoms.
inline complex characteristic(const Tomogram& t, double k) {
  complex sum{0.0, 0.0};
  const auto& g = t.grid();
  const auto& v = t.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    double w = (i == 0 || i + 1 == v.size()) ? 0.5 : 1.0;
    sum += w * v[i] * std::polar(1.0, k * g[i]);
  }
  if (!v.empty()) sum *= g.spacing();
  for (const auto& a : t.atoms()) sum += a.weight * std::polar(1.0, k * a.location);
  return sum;
}

namespace detail {

inline void require_symmetric(const UniformGrid& g, const char* what) {
  if (g.size() < 3 || !g.is_symmetric()) throw std::invalid_argument(std::string(what) + " axis must be symmetric about 0");
}

inline void check_nyquist(const UniformGrid& g, double radius, const char* what) {
  if (!(radius > 0.0)) throw std::invalid_argument("support radius must be positive");
  const double limit = pi / radius;
  if (g.spacing() > limit)
    throw NyquistError(std::string(what) + " spacing " + std::to_string(g.spacing()) + " exceeds pi/R = " +
                       std::to_string(limit) + " for declared support radius R = " + std::to_string(radius));
}

}  // namespace detail

/// Tomograms on a rectangular (mu, nu) grid symmetric about the origin, for
/// a density whose support lies within |q|, |p| <= support_radius. The
/// characteristic value int W e^{iX} dX of each frame is computed once.
class TomogramFamily {
 public:
  using Builder = std::function<Tomogram(const TomographyFrame&)>;

  TomogramFamily(UniformGrid mu_axis, UniformGrid nu_axis, const Builder& build, double support_radius)
      : mu_(mu_axis), nu_(nu_axis), radius_(support_radius), chi_(mu_axis.size() * nu_axis.size()) {
    detail::require_symmetric(mu_, "mu");
    detail::require_symmetric(nu_, "nu");
    detail::check_nyquist(mu_, radius_, "mu");
    detail::check_nyquist(nu_, radius_, "nu");
    parallel_for(chi_.size(), [&](std::size_t k) {
      TomographyFrame f{mu_[k / nu_.size()], nu_[k % nu_.size()]};
      chi_[k] = characteristic(build(f), 1.0);
    });
  }

  const UniformGrid& mu_axis() const noexcept { return mu_; }
  const UniformGrid& nu_axis() const noexcept { return nu_; }
  double support_radius() const noexcept { return radius_; }
  /// int W(X, mu_i, nu_j) e^{iX} dX
  complex characteristic_at(std::size_t i, std::size_t j) const { return chi_[i * nu_.size() + j]; }

  /// Largest |characteristic| on the outer edge of the (mu, nu) grid: the
  /// size of what the truncated frame grid leaves out.
  double edge_magnitude() const {
    double m = 0.0;
    for (std::size_t i = 0; i < mu_.size(); ++i)
      for (std::size_t j = 0; j < nu_.size(); ++j)
        if (i == 0 || j == 0 || i + 1 == mu_.size() || j + 1 == nu_.size()) m = std::max(m, std::abs(characteristic_at(i, j)));
    return m;
  }

 private:
  UniformGrid mu_, nu_;
  double radius_;
  std::vector<complex> chi_;
};

/// f(q, p) = (1/(2 pi)^2) int W(X, mu, nu) e^{i(X - mu q - nu p)} dX dmu dnu:
/// Fourier transform in X per frame (precomputed by the family), then the
/// trapezoid rule over (mu, nu).
inline Reconstructed inverse_radon(const TomogramFamily& family, double q, double p) {
  const auto& ma = family.mu_axis();
  const auto& na = family.nu_axis();
  complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < ma.size(); ++i) {
    double wi = (i == 0 || i + 1 == ma.size()) ? 0.5 : 1.0;
    for (std::size_t j = 0; j < na.size(); ++j) {
      double wj = (j == 0 || j + 1 == na.size()) ? 0.5 : 1.0;
      sum += wi * wj * family.characteristic_at(i, j) * std::polar(1.0, -(ma[i] * q + na[j] * p));
    }
  }
  sum *= ma.spacing() * na.spacing() / (4.0 * pi * pi);
  return {sum.real(), std::abs(sum.imag())};
}

/// W(q, p) = (hbar/(2 pi)) int W(X, mu, nu) e^{i(X - mu q - nu p)} dX dmu dnu,
/// normalized so that int W dq dp/(2 pi hbar) = 1.
inline Reconstructed wigner_from_tomogram(const TomogramFamily& family, double p, double q, double hbar) {
  if (!(hbar > 0.0)) throw std::invalid_argument("wigner_from_tomogram: hbar must be positive");
  Reconstructed r = inverse_radon(family, q, p);
  return {2.0 * pi * hbar * r.value, 2.0 * pi * hbar * r.imag_residual};
}

/// Requested nu-slice absent from a DensityFamily.
class MissingSliceError : public std::invalid_argument {
 public:
  explicit MissingSliceError(double nu)
      : std::invalid_argument("density_from_tomogram: no tomogram slice at nu = " + std::to_string(nu)), nu_(nu) {}
  double required_nu() const noexcept { return nu_; }

 private:
  double nu_;
};

/// Tomograms over a symmetric mu grid at a set of fixed nu values, for a
/// state whose position support lies within |x| <= support_radius.
class DensityFamily {
 public:
  using Builder = TomogramFamily::Builder;

  DensityFamily(UniformGrid mu_axis, std::vector<double> nus, const Builder& build, double support_radius)
      : mu_(mu_axis), nus_(std::move(nus)), radius_(support_radius), chi_(mu_.size() * nus_.size()) {
    detail::require_symmetric(mu_, "mu");
    detail::check_nyquist(mu_, radius_, "mu");
    parallel_for(chi_.size(), [&](std::size_t k) {
      TomographyFrame f{mu_[k % mu_.size()], nus_[k / mu_.size()]};
      chi_[k] = characteristic(build(f), 1.0);
    });
  }

  const UniformGrid& mu_axis() const noexcept { return mu_; }
  const std::vector<double>& nus() const noexcept { return nus_; }
  double support_radius() const noexcept { return radius_; }

  std::size_t slice(double nu) const {
    for (std::size_t s = 0; s < nus_.size(); ++s)
      if (std::abs(nus_[s] - nu) <= 1e-12 * std::max(1.0, std::abs(nu))) return s;
    throw MissingSliceError(nu);
  }
  complex characteristic_at(std::size_t slice, std::size_t i) const { return chi_[slice * mu_.size() + i]; }

 private:
  UniformGrid mu_;
  std::vector<double> nus_;
  double radius_;
  std::vector<complex> chi_;
};

/// rho(x, x') = (1/(2 pi)) int W(X, mu, (x - x')/hbar) e^{i(X - mu (x + x')/2)} dX dmu.
inline complex density_from_tomogram(const DensityFamily& family, double x, double xprime, double hbar) {
  if (!(hbar > 0.0)) throw std::invalid_argument("density_from_tomogram: hbar must be positive");
  const std::size_t s = family.slice((x - xprime) / hbar);
  const auto& ma = family.mu_axis();
  const double centre = 0.5 * (x + xprime);
  complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < ma.size(); ++i) {
    double w = (i == 0 || i + 1 == ma.size()) ? 0.5 : 1.0;
    sum += w * family.characteristic_at(s, i) * std::polar(1.0, -ma[i] * centre);
  }
  return sum * ma.spacing() / (2.0 * pi);
}

/// Largest |rho(x, x') - conj rho(x', x)| over the pairs of a reconstruction.
inline double hermiticity_residual(const GridFunction2D<complex>& rho) {
  double worst = 0.0;
  for (std::size_t i = 0; i < rho.x_axis().size(); ++i)
    for (std::size_t j = 0; j < rho.y_axis().size() && j < rho.x_axis().size(); ++j)
      worst = std::max(worst, std::abs(rho(i, j) - std::conj(rho(j, i))));
  return worst;
}

// ---------------------------------------------------------------------------
// Family builders

/// X grid for a frame: centred on the state's natural range, spacing dx.
inline UniformGrid frame_x_grid(const StateSpec& s, const TomographyFrame& f, double dx) {
  XRange r = natural_x_range(s, f);
  return UniformGrid::centered(r.center, std::max(r.half_width, 4.0 * dx), dx);
}

/// Frame axis [-extent, extent] whose spacing respects pi/R.
inline UniformGrid frame_axis(double extent, double support_radius) {
  auto half = static_cast<std::size_t>(std::ceil(extent * support_radius / pi));
  half = std::max<std::size_t>(half, 1);
  return {-extent, extent, 2 * half + 1};
}

/// Tomogram family of a catalog state, built from its best available route.
inline TomogramFamily state_tomogram_family(const StateSpec& s, double frame_extent, double support_radius, double dx) {
  UniformGrid ax = frame_axis(frame_extent, support_radius);
  return {ax, ax, [&](const TomographyFrame& f) { return state_tomogram(s, f, frame_x_grid(s, f, dx)); }, support_radius};
}

/// nu-slices (x_j - x_i)/hbar for all pairs of a position grid.
inline std::vector<double> density_slices(const UniformGrid& xs, double hbar) {
  std::vector<double> nus;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    nus.push_back(static_cast<double>(k) * xs.spacing() / hbar);
    if (k > 0) nus.push_back(-static_cast<double>(k) * xs.spacing() / hbar);
  }
  return nus;
}

/// Density-matrix family of a catalog state for all pairs of xs.
inline DensityFamily state_density_family(const StateSpec& s, const UniformGrid& xs, double mu_extent,
                                          double support_radius, double dx) {
  return {frame_axis(mu_extent, support_radius), density_slices(xs, s.hbar),
          [&](const TomographyFrame& f) { return state_tomogram(s, f, frame_x_grid(s, f, dx)); }, support_radius};
}

/// Reconstructs rho on xs x xs; pair differences must match the family's
/// slices, i.e. the family was built for the same grid.
inline GridFunction2D<complex> density_on_grid(const DensityFamily& family, const UniformGrid& xs, double hbar) {
  return GridFunction2D<complex>::sample(xs, xs, [&](double x, double y) {
    // Snap to the family's slice for the exact grid difference.
    double d = std::round((x - y) / xs.spacing()) * xs.spacing();
    return density_from_tomogram(family, 0.5 * (x + y) + 0.5 * d, 0.5 * (x + y) - 0.5 * d, hbar);
  });
}

}  // namespace tomolab
