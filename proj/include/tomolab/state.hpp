#pragma once

// Quantum state catalog: oscillator eigenstates, coherent and cat states,
// two-level superpositions, box eigenstates and sampled wave functions, with
// closed-form position and momentum wave functions and the natural scales
// used for grid and representation choices.

#include <charconv>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tomolab/kernel.hpp"
#include "tomolab/special.hpp"

namespace tomolab {

struct HOEigen {
  int n = 0;
  double varpi = 1.0;  // m * omega
};

struct Coherent {
  complex alpha{0.0, 0.0};
  double varpi = 1.0;
};

enum class Parity { even, odd };

struct Cat {
  complex alpha{1.0, 0.0};
  Parity parity = Parity::even;
  double varpi = 1.0;
};

/// (phi_n + phi_m) / sqrt(2).
struct Superposition {
  int n = 0;
  int m = 1;
  double varpi = 1.0;
};

/// sqrt(2/L) sin(n pi y / L) on [0, L].
struct BoxEigen {
  int n = 1;
  double L = 1.0;
};

/// Complex samples on a uniform grid, interpolated by Catmull-Rom cubics
/// and zero outside the grid.
class SampledWave {
 public:
  SampledWave() = default;
  SampledWave(UniformGrid grid, std::vector<complex> values) : grid_(grid), values_(std::move(values)) {
    if (grid_.size() < 4) throw std::invalid_argument("SampledWave: need at least 4 samples");
    if (values_.size() != grid_.size()) throw std::invalid_argument("SampledWave: value count mismatch");
  }
  const UniformGrid& grid() const noexcept { return grid_; }
  const std::vector<complex>& values() const noexcept { return values_; }

  complex operator()(double x) const {
    if (!grid_.contains(x)) return {0.0, 0.0};
    const double t = (x - grid_.min()) / grid_.spacing();
    const auto n = static_cast<long>(grid_.size());
    long i = std::min(static_cast<long>(t), n - 2);
    double f = t - static_cast<double>(i);
    auto at = [&](long k) { return (k < 0 || k >= n) ? complex{} : values_[static_cast<std::size_t>(k)]; };
    complex p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return p1 + 0.5 * f * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
  }

  double norm_squared() const {
    std::vector<double> d(values_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(values_[i]);
    return trapezoid(d, grid_.spacing());
  }
  double mean() const {
    std::vector<double> d(values_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = grid_[i] * std::norm(values_[i]);
    return trapezoid(d, grid_.spacing()) / norm_squared();
  }
  double stddev() const {
    double m = mean();
    std::vector<double> d(values_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (grid_[i] - m) * (grid_[i] - m) * std::norm(values_[i]);
    return std::sqrt(trapezoid(d, grid_.spacing()) / norm_squared());
  }

 private:
  UniformGrid grid_;
  std::vector<complex> values_;
};

struct CustomGrid {
  SampledWave psi;
  std::string source;  // file path or label, recorded in sidecars
};

using StateKind = std::variant<HOEigen, Coherent, Cat, Superposition, BoxEigen, CustomGrid>;

/// A quantum state together with hbar.
struct StateSpec {
  StateKind kind;
  double hbar = 1.0;

  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(kind);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(kind);
  }
};

/// N_+-^2 = 1 / (2 (1 +- e^{-2|alpha|^2})).
inline double cat_norm_squared(complex alpha, Parity parity) {
  double e = std::exp(-2.0 * std::norm(alpha));
  return parity == Parity::even ? 0.5 / (1.0 + e) : 0.5 / (1.0 - e);
}

/// <q> = sqrt(2 hbar / varpi) Re(alpha), <p> = sqrt(2 hbar varpi) Im(alpha).
inline double coherent_mean_q(complex alpha, double hbar, double varpi) { return std::sqrt(2.0 * hbar / varpi) * alpha.real(); }
inline double coherent_mean_p(complex alpha, double hbar, double varpi) { return std::sqrt(2.0 * hbar * varpi) * alpha.imag(); }

namespace detail {

// Coherent state in the Hermite-function convention sum alpha^n/sqrt(n!) phi_n,
// written through the generating function
//   sum t^n / sqrt(n!) phi_n(x) = pi^{-1/4} exp(-x^2/2 + sqrt(2) t x - t^2/2).
inline complex coherent_profile(complex t, double x, double norm_alpha) {
  return std::pow(pi, -0.25) * std::exp(-0.5 * norm_alpha - 0.5 * x * x + std::sqrt(2.0) * t * x - 0.5 * t * t);
}

// int_0^L e^{i w y} dy
inline complex box_exponential_integral(double w, double L) {
  double h = 0.5 * w * L;
  double sinc = std::abs(h) < 1e-8 ? 1.0 - h * h / 6.0 : std::sin(h) / h;
  return L * sinc * complex(std::cos(h), std::sin(h));
}

inline complex sampled_fourier(const SampledWave& psi, double p, double hbar) {
  const auto& g = psi.grid();
  complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    double w = (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0;
    double ph = -p * g[i] / hbar;
    sum += w * psi.values()[i] * complex(std::cos(ph), std::sin(ph));
  }
  return sum * g.spacing() / std::sqrt(2.0 * pi * hbar);
}

}  // namespace detail

/// Position wave function psi(x).
inline complex wavefunction(const StateSpec& s, double x) {
  const double hb = s.hbar;
  return std::visit(
      [&](const auto& k) -> complex {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HOEigen>) {
          double sc = std::sqrt(k.varpi / hb);
          return std::sqrt(std::sqrt(k.varpi / hb)) * hermite_phi(k.n, sc * x);
        } else if constexpr (std::is_same_v<K, Coherent>) {
          double sc = std::sqrt(k.varpi / hb);
          return std::sqrt(std::sqrt(k.varpi / hb)) * detail::coherent_profile(k.alpha, sc * x, std::norm(k.alpha));
        } else if constexpr (std::is_same_v<K, Cat>) {
          double sc = std::sqrt(k.varpi / hb);
          double sign = k.parity == Parity::even ? 1.0 : -1.0;
          double nrm = std::sqrt(cat_norm_squared(k.alpha, k.parity));
          double a2 = std::norm(k.alpha);
          return nrm * std::sqrt(std::sqrt(k.varpi / hb)) *
                 (detail::coherent_profile(k.alpha, sc * x, a2) + sign * detail::coherent_profile(-k.alpha, sc * x, a2));
        } else if constexpr (std::is_same_v<K, Superposition>) {
          double sc = std::sqrt(k.varpi / hb);
          return std::sqrt(std::sqrt(k.varpi / hb)) * (hermite_phi(k.n, sc * x) + hermite_phi(k.m, sc * x)) / std::sqrt(2.0);
        } else if constexpr (std::is_same_v<K, BoxEigen>) {
          if (x < 0.0 || x > k.L) return {0.0, 0.0};
          return std::sqrt(2.0 / k.L) * std::sin(k.n * pi * x / k.L);
        } else {
          return k.psi(x);
        }
      },
      s.kind);
}

/// Momentum wave function psi-hat(p) = (2 pi hbar)^{-1/2} int psi(y) e^{-i p y/hbar} dy.
/// Sampled states are transformed by a direct trapezoid sum.
inline complex momentum_wavefunction(const StateSpec& s, double p) {
  const double hb = s.hbar;
  return std::visit(
      [&](const auto& k) -> complex {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HOEigen>) {
          double sc = std::sqrt(k.varpi * hb);
          complex phase = std::pow(complex(0.0, -1.0), k.n);
          return phase * hermite_phi(k.n, p / sc) / std::sqrt(sc);
        } else if constexpr (std::is_same_v<K, Coherent>) {
          double sc = std::sqrt(k.varpi * hb);
          return detail::coherent_profile(complex(0.0, -1.0) * k.alpha, p / sc, std::norm(k.alpha)) / std::sqrt(sc);
        } else if constexpr (std::is_same_v<K, Cat>) {
          double sc = std::sqrt(k.varpi * hb);
          double sign = k.parity == Parity::even ? 1.0 : -1.0;
          double nrm = std::sqrt(cat_norm_squared(k.alpha, k.parity));
          complex t = complex(0.0, -1.0) * k.alpha;
          double a2 = std::norm(k.alpha);
          return nrm * (detail::coherent_profile(t, p / sc, a2) + sign * detail::coherent_profile(-t, p / sc, a2)) / std::sqrt(sc);
        } else if constexpr (std::is_same_v<K, Superposition>) {
          double sc = std::sqrt(k.varpi * hb);
          complex pn = std::pow(complex(0.0, -1.0), k.n), pm = std::pow(complex(0.0, -1.0), k.m);
          return (pn * hermite_phi(k.n, p / sc) + pm * hermite_phi(k.m, p / sc)) / std::sqrt(2.0 * sc);
        } else if constexpr (std::is_same_v<K, BoxEigen>) {
          // sin(ky) = (e^{iky} - e^{-iky}) / 2i
          double kk = k.n * pi / k.L, q = p / hb;
          complex plus = detail::box_exponential_integral(kk - q, k.L);
          complex minus = detail::box_exponential_integral(-kk - q, k.L);
          return std::sqrt(2.0 / k.L) * (plus - minus) / complex(0.0, 2.0) / std::sqrt(2.0 * pi * hb);
        } else {
          return detail::sampled_fourier(k.psi, p, hb);
        }
      },
      s.kind);
}

/// Natural position and momentum scales (for HO-family states sqrt(hbar/varpi)
/// and sqrt(hbar varpi)); used by the representation dispatch.
struct StateScales {
  double position = 1.0;
  double momentum = 1.0;
};

/// Interval outside of which |psi|^2 (or |psi-hat|^2) is negligible, and the
/// shortest length on which the amplitude varies.
struct Support {
  double lo = 0.0;
  double hi = 0.0;
  double resolution = 1.0;
};

namespace detail {

inline double ho_extent(int n) { return std::sqrt(2.0 * n + 1.0) + 10.0; }

}  // namespace detail

inline StateScales state_scales(const StateSpec& s) {
  const double hb = s.hbar;
  return std::visit(
      [&](const auto& k) -> StateScales {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, BoxEigen>) {
          return {k.L, k.n * pi * hb / k.L};
        } else if constexpr (std::is_same_v<K, CustomGrid>) {
          double sq = k.psi.stddev();
          return {sq, hb / (2.0 * sq)};
        } else {
          return {std::sqrt(hb / k.varpi), std::sqrt(hb * k.varpi)};
        }
      },
      s.kind);
}

/// Position-space support of the state.
inline Support position_support(const StateSpec& s) {
  const double hb = s.hbar;
  return std::visit(
      [&](const auto& k) -> Support {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HOEigen>) {
          double sc = std::sqrt(hb / k.varpi), e = detail::ho_extent(k.n);
          return {-e * sc, e * sc, sc / (std::sqrt(2.0 * k.n + 1.0) + 1.0)};
        } else if constexpr (std::is_same_v<K, Superposition>) {
          int top = std::max(k.n, k.m);
          double sc = std::sqrt(hb / k.varpi), e = detail::ho_extent(top);
          return {-e * sc, e * sc, sc / (std::sqrt(2.0 * top + 1.0) + 1.0)};
        } else if constexpr (std::is_same_v<K, Coherent> || std::is_same_v<K, Cat>) {
          double sc = std::sqrt(hb / k.varpi);
          double q = std::abs(coherent_mean_q(k.alpha, hb, k.varpi));
          double p = std::abs(coherent_mean_p(k.alpha, hb, k.varpi));
          double lo = std::is_same_v<K, Cat> ? -q : coherent_mean_q(k.alpha, hb, k.varpi);
          double hi = std::is_same_v<K, Cat> ? q : lo;
          // Resolve both the envelope and the carrier e^{i p y / hbar}.
          double res = std::min(sc / 2.0, hb / (p + 10.0 * std::sqrt(hb * k.varpi)));
          return {lo - 10.0 * sc, hi + 10.0 * sc, res};
        } else if constexpr (std::is_same_v<K, BoxEigen>) {
          return {0.0, k.L, k.L / (2.0 * k.n + 2.0)};
        } else {
          const auto& g = k.psi.grid();
          return {g.min(), g.max(), g.spacing()};
        }
      },
      s.kind);
}

/// Momentum-space support of the state (sampled states: the Nyquist band of
/// their grid).
inline Support momentum_support(const StateSpec& s) {
  const double hb = s.hbar;
  return std::visit(
      [&](const auto& k) -> Support {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HOEigen>) {
          double sc = std::sqrt(hb * k.varpi), e = detail::ho_extent(k.n);
          return {-e * sc, e * sc, sc / (std::sqrt(2.0 * k.n + 1.0) + 1.0)};
        } else if constexpr (std::is_same_v<K, Superposition>) {
          int top = std::max(k.n, k.m);
          double sc = std::sqrt(hb * k.varpi), e = detail::ho_extent(top);
          return {-e * sc, e * sc, sc / (std::sqrt(2.0 * top + 1.0) + 1.0)};
        } else if constexpr (std::is_same_v<K, Coherent> || std::is_same_v<K, Cat>) {
          double sc = std::sqrt(hb * k.varpi);
          double q = std::abs(coherent_mean_q(k.alpha, hb, k.varpi));
          double pm = coherent_mean_p(k.alpha, hb, k.varpi);
          double lo = std::is_same_v<K, Cat> ? -std::abs(pm) : pm;
          double hi = std::is_same_v<K, Cat> ? std::abs(pm) : pm;
          double res = std::min(sc / 2.0, hb / (q + 10.0 * std::sqrt(hb / k.varpi)));
          return {lo - 10.0 * sc, hi + 10.0 * sc, res};
        } else if constexpr (std::is_same_v<K, BoxEigen>) {
          // |psi-hat|^2 has 1/p^4 tails; this band holds all but ~1e-6 of the mass.
          double pk = k.n * pi * hb / k.L;
          double band = pk + 200.0 * pi * hb / k.L;
          return {-band, band, hb / k.L / 4.0};
        } else {
          const auto& g = k.psi.grid();
          double band = pi * hb / g.spacing();
          return {-band, band, hb / (g.max() - g.min())};
        }
      },
      s.kind);
}

namespace detail {

/// <p> and sigma_p of a sampled state, from central differences.
inline std::pair<double, double> sampled_momentum_moments(const SampledWave& psi, double hbar) {
  const auto& v = psi.values();
  const double dx = psi.grid().spacing();
  double p1 = 0.0, p2 = 0.0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    complex d = (v[i + 1] - v[i - 1]) / (2.0 * dx);
    p1 += (std::conj(v[i]) * complex(0.0, -1.0) * d).real() * dx;
    p2 += std::norm(d) * dx;
  }
  p1 *= hbar;
  p2 *= hbar * hbar;
  return {p1, std::sqrt(std::max(0.0, p2 - p1 * p1))};
}

}  // namespace detail

/// <mu q + nu p> and a half-width covering the tomogram's bulk, for choosing X grids.
struct XRange {
  double center = 0.0;
  double half_width = 1.0;
};

inline XRange natural_x_range(const StateSpec& s, const TomographyFrame& f) {
  Support q = position_support(s), p = momentum_support(s);
  if (const auto* c = std::get_if<CustomGrid>(&s.kind)) {
    // The Nyquist band is far wider than the bulk; use <p> +- 16 sigma_p.
    auto [pm, sp] = detail::sampled_momentum_moments(c->psi, s.hbar);
    p.lo = std::max(p.lo, pm - 16.0 * sp);
    p.hi = std::min(p.hi, pm + 16.0 * sp);
  }
  double c = 0.5 * (f.mu * (q.lo + q.hi) + f.nu * (p.lo + p.hi));
  double hw = 0.5 * (std::abs(f.mu) * (q.hi - q.lo) + std::abs(f.nu) * (p.hi - p.lo));
  return {c, hw};
}

// ---------------------------------------------------------------------------
// Descriptor mini-language

/// Parse failure with the offending token and its character offset.
class DescriptorError : public std::invalid_argument {
 public:
  DescriptorError(const std::string& descriptor, std::size_t position, const std::string& message)
      : std::invalid_argument("state descriptor '" + descriptor + "' at position " + std::to_string(position) + ": " +
                              message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

namespace detail {

struct Token {
  std::string key;
  std::string value;
  std::size_t position = 0;
};

inline std::vector<Token> split_fields(std::string_view body, std::size_t offset) {
  std::vector<Token> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t end = body.find(',', start);
    if (end == std::string_view::npos) end = body.size();
    std::string_view field = body.substr(start, end - start);
    if (!field.empty()) {
      std::size_t eq = field.find('=');
      Token t;
      t.position = offset + start;
      if (eq == std::string_view::npos) {
        t.key = std::string(field);
      } else {
        t.key = std::string(field.substr(0, eq));
        t.value = std::string(field.substr(eq + 1));
      }
      out.push_back(std::move(t));
    }
    start = end + 1;
  }
  return out;
}

inline double parse_real(const std::string& desc, const Token& t) {
  double v = 0.0;
  const char* b = t.value.data();
  const char* e = b + t.value.size();
  auto r = std::from_chars(b, e, v);
  if (t.value.empty() || r.ec != std::errc{} || r.ptr != e || !std::isfinite(v))
    throw DescriptorError(desc, t.position, "'" + t.value + "' is not a real number for key '" + t.key + "'");
  return v;
}

inline int parse_int(const std::string& desc, const Token& t) {
  int v = 0;
  const char* b = t.value.data();
  const char* e = b + t.value.size();
  auto r = std::from_chars(b, e, v);
  if (t.value.empty() || r.ec != std::errc{} || r.ptr != e)
    throw DescriptorError(desc, t.position, "'" + t.value + "' is not an integer for key '" + t.key + "'");
  return v;
}

}  // namespace detail

/// Loader for `custom:<path>` descriptors; the io layer provides the default.
using CustomLoader = std::function<SampledWave(const std::string& path)>;

/// Parses ho:n=<int>[,varpi=<f>] | coherent:re=<f>,im=<f> |
/// cat:even|odd,re=<f>,im=<f> | superpos:n=<int>,m=<int> | box:n=<int>,L=<f> |
/// custom:<path.csv>. Unknown keys are rejected with the token named.
inline StateSpec parse_state(const std::string& desc, double hbar, const CustomLoader& load_custom = {}) {
  if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
  std::size_t colon = desc.find(':');
  if (colon == std::string::npos) throw DescriptorError(desc, 0, "missing ':' after state kind");
  std::string kind = desc.substr(0, colon);
  std::string_view body(desc);
  body.remove_prefix(colon + 1);
  const std::size_t off = colon + 1;

  if (kind == "custom") {
    if (body.empty()) throw DescriptorError(desc, off, "custom state needs a CSV path");
    if (!load_custom) throw DescriptorError(desc, off, "no loader available for custom states");
    return {CustomGrid{load_custom(std::string(body)), std::string(body)}, hbar};
  }

  auto fields = detail::split_fields(body, off);
  std::map<std::string, detail::Token> kv;
  std::vector<detail::Token> flags;
  for (auto& t : fields) {
    if (t.value.empty() && t.key.find('=') == std::string::npos && (t.key == "even" || t.key == "odd")) {
      flags.push_back(t);
      continue;
    }
    if (kv.count(t.key)) throw DescriptorError(desc, t.position, "duplicate key '" + t.key + "'");
    kv[t.key] = t;
  }
  auto require_only = [&](std::initializer_list<const char*> allowed) {
    for (auto& [k, t] : kv) {
      bool ok = false;
      for (auto* a : allowed) ok = ok || k == a;
      if (!ok) throw DescriptorError(desc, t.position, "unknown key '" + k + "' for state kind '" + kind + "'");
    }
  };
  auto need = [&](const char* key) -> const detail::Token& {
    auto it = kv.find(key);
    if (it == kv.end()) throw DescriptorError(desc, off, std::string("missing required key '") + key + "'");
    return it->second;
  };
  auto real_or = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : detail::parse_real(desc, it->second);
  };
  auto no_flags = [&] {
    if (!flags.empty()) throw DescriptorError(desc, flags.front().position, "unexpected token '" + flags.front().key + "'");
  };

  if (kind == "ho") {
    no_flags();
    require_only({"n", "varpi"});
    HOEigen s{detail::parse_int(desc, need("n")), real_or("varpi", 1.0)};
    if (s.n < 0) throw DescriptorError(desc, need("n").position, "n must be non-negative");
    if (!(s.varpi > 0.0)) throw DescriptorError(desc, kv["varpi"].position, "varpi must be positive");
    return {s, hbar};
  }
  if (kind == "coherent") {
    no_flags();
    require_only({"re", "im"});
    return {Coherent{{real_or("re", 0.0), real_or("im", 0.0)}}, hbar};
  }
  if (kind == "cat") {
    require_only({"re", "im"});
    if (flags.size() != 1) throw DescriptorError(desc, off, "cat state needs exactly one of 'even' or 'odd'");
    Cat s{{real_or("re", 0.0), real_or("im", 0.0)}, flags[0].key == "even" ? Parity::even : Parity::odd};
    if (s.parity == Parity::odd && std::norm(s.alpha) == 0.0)
      throw DescriptorError(desc, off, "odd cat state needs alpha != 0");
    return {s, hbar};
  }
  if (kind == "superpos") {
    no_flags();
    require_only({"n", "m"});
    Superposition s{detail::parse_int(desc, need("n")), detail::parse_int(desc, need("m"))};
    if (s.n < 0 || s.m < 0) throw DescriptorError(desc, off, "n and m must be non-negative");
    if (s.n == s.m) throw DescriptorError(desc, need("m").position, "superposition needs n != m");
    return {s, hbar};
  }
  if (kind == "box") {
    no_flags();
    require_only({"n", "L"});
    BoxEigen s{detail::parse_int(desc, need("n")), detail::parse_real(desc, need("L"))};
    if (s.n < 1) throw DescriptorError(desc, need("n").position, "box level n must be >= 1");
    if (!(s.L > 0.0)) throw DescriptorError(desc, need("L").position, "L must be positive");
    return {s, hbar};
  }
  throw DescriptorError(desc, 0, "unknown state kind '" + kind + "' (expected ho, coherent, cat, superpos, box, custom)");
}

/// Checks the L2 normalization of sampled states (tolerance 1e-8).
inline void validate_state(const StateSpec& s) {
  if (!(s.hbar > 0.0)) throw std::invalid_argument("state: hbar must be positive");
  if (const auto* c = std::get_if<CustomGrid>(&s.kind)) {
    double nrm = c->psi.norm_squared();
    if (std::abs(nrm - 1.0) > 1e-8)
      throw std::invalid_argument("custom state: L2 norm " + std::to_string(nrm) + " differs from 1 by more than 1e-8");
  }
}

}  // namespace tomolab
