#pragma once

// Command-line front end: tomogram, limit, reconstruct, compare, selftest.
// run_cli is the whole program; tools/tomolab.cpp only forwards argv.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tomolab/classical.hpp"
#include "tomolab/inverse.hpp"
#include "tomolab/io.hpp"
#include "tomolab/kernel.hpp"
#include "tomolab/limits.hpp"
#include "tomolab/quantum.hpp"
#include "tomolab/selftest.hpp"
#include "tomolab/state.hpp"

namespace tomolab::cli {

namespace fs = std::filesystem;

/// Bad command-line input (exit status 2).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Value parsers

inline std::vector<double> parse_reals(const std::string& text, const std::string& what, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(what + ": cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

inline TomographyFrame parse_frame(const std::string& text) {
  auto v = parse_reals(text, "--frame");
  if (v.size() != 2) throw UsageError("--frame expects mu,nu");
  return {v[0], v[1]};
}

inline TomographyFrame parse_scaling(const std::string& text) {
  auto v = parse_reals(text, "--scaling");
  if (v.size() != 2) throw UsageError("--scaling expects s,theta");
  return frame_from_scaling(v[0], v[1]);
}

inline UniformGrid parse_grid(const std::string& text) {
  auto v = parse_reals(text, "--grid");
  if (v.size() != 3) throw UsageError("--grid expects min,max,count");
  if (!(v[2] >= 2.0) || v[2] != std::floor(v[2])) throw UsageError("--grid count must be an integer >= 2");
  if (!(v[1] > v[0])) throw UsageError("--grid needs max > min");
  return {v[0], v[1], static_cast<std::size_t>(v[2])};
}

/// `a:b:geometric[:count]`: geometric from a to b; the default count gives
/// ratios as close to 1/2 (or 2) as the endpoints allow. A comma list is
/// taken verbatim.
inline std::vector<double> parse_hbars(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_reals(text, "--hbars");
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 3 || parts.size() > 4 || parts[2] != "geometric")
    throw UsageError("--hbars expects a:b:geometric[:count] or a comma list");
  double a = parse_reals(parts[0], "--hbars").at(0), b = parse_reals(parts[1], "--hbars").at(0);
  if (!(a > 0.0) || !(b > 0.0) || a == b) throw UsageError("--hbars endpoints must be positive and distinct");
  std::size_t count = 0;
  if (parts.size() == 4) {
    double c = parse_reals(parts[3], "--hbars").at(0);
    if (!(c >= 2.0) || c != std::floor(c)) throw UsageError("--hbars count must be an integer >= 2");
    count = static_cast<std::size_t>(c);
  } else {
    count = static_cast<std::size_t>(std::lround(std::abs(std::log2(b / a)))) + 1;
    count = std::max<std::size_t>(count, 2);
  }
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = a * std::pow(b / a, static_cast<double>(k) / static_cast<double>(count - 1));
  out.back() = b;
  return out;
}

inline std::vector<int> parse_ints(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (double v : parse_reals(text, what)) {
    if (v != std::floor(v)) throw UsageError(what + ": expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

inline complex parse_complex(const std::string& text, const std::string& what) {
  auto v = parse_reals(text, what);
  if (v.size() != 2) throw UsageError(what + " expects re,im");
  return {v[0], v[1]};
}

// ---------------------------------------------------------------------------
// Classical model descriptors: oscillator[:E=<f>] | box:L=<f>[,E=<f>] |
// point:q=<f>,p=<f> | orbit:q=<f>,p=<f> | density:<path.csv>

struct ClassicalSpec {
  std::string descriptor;
  ClassicalModel model;
  std::string kind;  // oscillator | box | point | orbit | density
  double L = 1.0, E = 1.0, q = 0.0, p = 0.0;
};

inline ClassicalSpec parse_classical(const std::string& desc) {
  std::size_t colon = desc.find(':');
  std::string kind = desc.substr(0, colon);
  std::string body = colon == std::string::npos ? "" : desc.substr(colon + 1);
  ClassicalSpec s;
  s.descriptor = desc;
  s.kind = kind;
  if (kind == "density") {
    if (body.empty()) throw UsageError("classical descriptor '" + desc + "': density needs a CSV path");
    s.model = read_density_grid(body);
    return s;
  }
  std::map<std::string, double> kv;
  for (const auto& t : tomolab::detail::split_fields(body, colon + 1)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t.value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (t.value.empty() || used != t.value.size())
      throw UsageError("classical descriptor '" + desc + "' at position " + std::to_string(t.position) + ": bad value for '" + t.key + "'");
    kv[t.key] = v;
  }
  auto take = [&](const std::string& key, double fallback, bool required) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) throw UsageError("classical descriptor '" + desc + "': missing '" + key + "'");
      return fallback;
    }
    double v = it->second;
    kv.erase(it);
    return v;
  };
  if (kind == "oscillator") {
    s.E = take("E", 1.0, false);
    s.model = OscillatorTrajectory{s.E};
  } else if (kind == "box") {
    s.L = take("L", 1.0, false);
    s.E = take("E", 1.0, false);
    s.model = BoxTrajectory{s.L, s.E};
  } else if (kind == "point" || kind == "orbit") {
    s.q = take("q", 0.0, true);
    s.p = take("p", 0.0, true);
    s.model = kind == "point" ? rest_point(s.q, s.p) : oscillator_orbit(s.q, s.p);
  } else {
    throw UsageError("unknown classical model '" + kind + "' (expected oscillator, box, point, orbit, density)");
  }
  if (!kv.empty()) throw UsageError("classical descriptor '" + desc + "': unknown key '" + kv.begin()->first + "'");
  return s;
}

// ---------------------------------------------------------------------------
// Run configuration: flags <-> JSON

/// Effective flags of a parsed subcommand, keyed by long name.
inline Json record_options(const CLI::App& sub) {
  Json j = Json::object();
  for (const CLI::Option* o : sub.get_options()) {
    if (o->count() == 0) continue;
    std::string name = o->get_lnames().empty() ? o->get_name() : o->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (o->get_expected_max() == 0) {
      j[name] = true;
      continue;
    }
    const auto& r = o->results();
    if (r.size() == 1) j[name] = r.front();
    else j[name] = r;
  }
  return j;
}

/// argv equivalent of a config document {command, [study], flag: value...}.
inline std::vector<std::string> config_to_args(const Json& cfg) {
  if (!cfg.is_object() || !cfg.contains("command")) throw UsageError("--config: document needs a \"command\" key");
  std::vector<std::string> args{cfg["command"].get<std::string>()};
  if (cfg.contains("study")) args.push_back(cfg["study"].get<std::string>());
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (it.key() == "command" || it.key() == "study") continue;
    auto add = [&](const Json& v) {
      if (v.is_boolean()) {
        if (v.get<bool>()) args.push_back("--" + it.key());
        return;
      }
      args.push_back("--" + it.key());
      args.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    };
    if (it.value().is_array())
      for (const auto& v : it.value()) add(v);
    else
      add(it.value());
  }
  return args;
}

/// Merges `--key value` / `--flag` tokens over a config document.
inline Json merge_overrides(Json cfg, const std::vector<std::string>& extra) {
  std::map<std::string, Json> seen;
  for (std::size_t i = 0; i < extra.size(); ++i) {
    const std::string& t = extra[i];
    if (t.rfind("--", 0) != 0) throw UsageError("--config: unexpected argument '" + t + "'");
    std::string key = t.substr(2);
    Json v = true;
    if (i + 1 < extra.size() && extra[i + 1].rfind("--", 0) != 0) v = extra[++i];
    if (seen.count(key)) {
      if (!seen[key].is_array()) seen[key] = Json::array({seen[key]});
      seen[key].push_back(v);
    } else {
      seen[key] = v;
    }
  }
  for (auto& [k, v] : seen) cfg[k] = v;
  return cfg;
}

// ---------------------------------------------------------------------------
// Shared helpers

struct Context {
  std::ostream& out;
  std::ostream& err;
  Json run;  // replayable configuration
};

inline TomographyFrame frame_option(const std::string& frame, const std::string& scaling, const TomographyFrame& fallback,
                                    bool required) {
  if (!frame.empty() && !scaling.empty()) throw UsageError("give exactly one of --frame and --scaling");
  if (!frame.empty()) return parse_frame(frame);
  if (!scaling.empty()) return parse_scaling(scaling);
  if (required) throw UsageError("one of --frame or --scaling is required");
  return fallback;
}

inline UniformGrid default_grid(const StateSpec& s, const TomographyFrame& f, std::size_t points = 2001) {
  XRange r = natural_x_range(s, f);
  return {r.center - r.half_width, r.center + r.half_width, points};
}

inline std::string fmt(double x) {
  char b[64];
  std::snprintf(b, sizeof b, "%.6g", x);
  return b;
}

inline void write_report(const fs::path& path, const Json& j) { write_atomic(path, dump_json(j)); }

// ---------------------------------------------------------------------------
// tomogram

struct TomogramArgs {
  std::string state, frame, scaling, grid, rep, out = "tomogram.csv";
  double hbar = 1.0;
};

inline int cmd_tomogram(const TomogramArgs& a, Context& ctx) {
  StateSpec s = parse_state_with_files(a.state, a.hbar);
  TomographyFrame f = frame_option(a.frame, a.scaling, {}, true);
  UniformGrid g = a.grid.empty() ? default_grid(s, f) : parse_grid(a.grid);
  Tomogram t = [&] {
    if (a.rep.empty()) return state_tomogram(s, f, g);
    Representation r = a.rep == "position" ? Representation::position
                       : a.rep == "momentum" ? Representation::momentum
                                             : Representation::automatic;
    return tomogram_from_wavefunction(s, f, g, r);
  }();
  Json extra = {{"route", a.rep.empty() ? (has_closed_form(s) ? "closed_form" : "quadrature") : "quadrature:" + a.rep},
                {"run", ctx.run}};
  write_tomogram(a.out, t, tomogram_metadata(t, a.hbar, a.state, extra));
  const double res = normalization_residual(t);
  ctx.out << "wrote " << a.out << " (" << g.size() << " points) and " << sidecar_path(a.out).string() << "\n";
  ctx.out << "normalization residual: " << format_real(res) << "\n";
  if (!t.values().empty()) {
    auto it = std::max_element(t.values().begin(), t.values().end());
    ctx.out << "peak: X = " << format_real(g[static_cast<std::size_t>(it - t.values().begin())])
            << ", value = " << format_real(*it) << "\n";
  }
  for (const auto& at : t.atoms()) ctx.out << "atom: weight " << format_real(at.weight) << " at X = " << format_real(at.location) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// limit

inline const std::vector<std::string>& limit_studies() {
  static const std::vector<std::string> v = {"planck-delta",       "interference",  "cat-interference",
                                             "ehrenfest-coherent", "ehrenfest-cat", "ehrenfest-box",
                                             "ehrenfest-oscillator"};
  return v;
}

struct LimitArgs {
  std::string study, state, scaling, hbars, ns, alpha = "1,0", parity = "even", out;
  std::vector<std::string> frames;
  int n = 0, m = 1;
  double q_alpha = 1.0, p_alpha = 0.0, L = 1.0, center = 0.0;
  std::optional<double> gamma;
  std::size_t points = 8001;
};

inline LimitReport run_limit(const LimitArgs& a) {
  auto frame_or = [&](TomographyFrame fallback) {
    if (a.frames.size() > 1) throw UsageError("study '" + a.study + "' takes a single --frame");
    return frame_option(a.frames.empty() ? "" : a.frames.front(), a.scaling, fallback, false);
  };
  auto hbars_or = [&](const std::string& fallback) { return parse_hbars(a.hbars.empty() ? fallback : a.hbars); };
  auto ns_or = [&](const std::string& fallback) { return parse_ints(a.ns.empty() ? fallback : a.ns, "--ns"); };

  if (a.study == "planck-delta") {
    if (a.state.empty()) throw UsageError("planck-delta needs --state");
    const auto hb = hbars_or("1e-1:1e-3:geometric");
    std::vector<StateSpec> states;
    if (a.gamma) {
      StateSpec base = parse_state_with_files(a.state, 1.0);
      if (!base.is<CustomGrid>()) throw UsageError("--gamma applies to custom:<path> profiles");
      for (double h : hb) states.push_back(planck_scaled_state(base.as<CustomGrid>(), *a.gamma, h));
    } else {
      for (double h : hb) states.push_back(parse_state_with_files(a.state, h));
    }
    LimitReport r = weak_delta_convergence(states, frame_or({1.0, 0.0}), default_test_battery(), a.center, a.points);
    r.parameters["state"] = a.state;
    if (a.gamma) r.parameters["gamma"] = *a.gamma;
    return r;
  }
  if (a.study == "interference") return interference_decay(a.n, a.m, frame_or({0.6, 0.8}), hbars_or("1e-1:1e-4:geometric"), a.points);
  if (a.study == "cat-interference")
    return cat_interference_planck(parse_complex(a.alpha, "--alpha"), frame_or({0.6, 0.8}), hbars_or("1e-1:1e-3:geometric"), a.points);
  if (a.study == "ehrenfest-coherent") return ehrenfest_coherent(a.q_alpha, a.p_alpha, frame_or({1.0, 0.0}), hbars_or("1e-2:1e-4:geometric"));
  if (a.study == "ehrenfest-cat") {
    if (a.parity != "even" && a.parity != "odd") throw UsageError("--parity must be even or odd");
    return ehrenfest_cat(a.q_alpha, a.p_alpha, frame_or({0.6, 0.8}), hbars_or("1e-2:1.25e-3:geometric"),
                         a.parity == "even" ? Parity::even : Parity::odd);
  }
  if (a.study == "ehrenfest-box") {
    std::vector<TomographyFrame> fr;
    for (const auto& f : a.frames) fr.push_back(parse_frame(f));
    if (!a.scaling.empty()) fr.push_back(parse_scaling(a.scaling));
    if (fr.empty()) fr.push_back({1.0, 0.3});
    return ehrenfest_box(a.L, ns_or("25,50,100,200,400"), fr);
  }
  if (a.study == "ehrenfest-oscillator") return ehrenfest_oscillator(ns_or("25,50,100,200,400"), frame_or({1.0, 0.0}));
  throw UsageError("unknown study '" + a.study + "'");
}

inline int cmd_limit(const LimitArgs& a, Context& ctx) {
  LimitReport r = run_limit(a);
  fs::path dir = a.out.empty() ? fs::path("limit-" + a.study) : fs::path(a.out);
  r.artifacts.clear();
  for (std::size_t k = 0; k < r.tomograms.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%02zu.csv", k);
    const double h = r.parameter_name == "hbar" ? r.parameter_values[k]
                     : r.study == "ehrenfest_box" ? box_ehrenfest_hbar(static_cast<int>(r.parameter_values[k]), a.L)
                                                  : 1.0 / r.parameter_values[k];
    Json extra = {{"study", r.study}, {"parameter", r.parameter_name}, {"parameter_value", r.parameter_values[k]}};
    write_tomogram(dir / name, r.tomograms[k], tomogram_metadata(r.tomograms[k], h, r.study, extra));
    r.artifacts.push_back(name);
  }
  Json j = r.to_json();
  j["run"] = ctx.run;
  write_report(dir / "report.json", j);
  ctx.out << "study: " << r.study << " (" << r.regime << " limit, parameter " << r.parameter_name << ")\n";
  for (std::size_t k = 0; k < r.distances.size(); ++k)
    ctx.out << "  " << r.parameter_name << " = " << format_real(r.parameter_values[k]) << "  distance = " << format_real(r.distances[k]) << "\n";
  ctx.out << "exponent: " << (r.fitted_exponent ? format_real(*r.fitted_exponent) : std::string("none")) << " (R^2 = " << format_real(r.r2)
          << ")\n";
  ctx.out << "verdict: " << to_string(r.verdict) << "\n";
  ctx.out << "wrote " << (dir / "report.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// reconstruct

struct ReconstructArgs {
  std::string state, output = "wigner", grid, out = "reconstruct.csv";
  double hbar = 1.0, extent = 12.0, dx = 0.05;
  std::optional<double> radius;
};

/// Radius enclosing the bulk of the state in phase space (|q|, |p| within ~8 sigma).
inline double bulk_radius(const StateSpec& s) {
  Support q = position_support(s), p = momentum_support(s);
  if (s.is<CustomGrid>()) {
    auto [pm, sp] = tomolab::detail::sampled_momentum_moments(s.as<CustomGrid>().psi, s.hbar);
    p = {pm - 8.0 * sp, pm + 8.0 * sp, p.resolution};
  }
  return std::max({std::abs(q.lo), std::abs(q.hi), std::abs(p.lo), std::abs(p.hi)});
}

inline int cmd_reconstruct(const ReconstructArgs& a, Context& ctx) {
  StateSpec s = parse_state_with_files(a.state, a.hbar);
  if (a.output != "wigner" && a.output != "density") throw UsageError("--output must be wigner or density");
  const double R = a.radius ? *a.radius : bulk_radius(s);
  UniformGrid axis = a.grid.empty() ? UniformGrid(-3.0, 3.0, 61) : parse_grid(a.grid);
  Json rep = {{"state", a.state}, {"hbar", a.hbar}, {"output", a.output}, {"grid", axis_json(axis)},
              {"frame_extent", a.extent}, {"support_radius", R}, {"dx", a.dx}};
  const bool catalog = !s.is<CustomGrid>();
  if (a.output == "wigner") {
    TomogramFamily fam = state_tomogram_family(s, a.extent, R, a.dx);
    std::vector<double> vals(axis.size() * axis.size()), imag(vals.size());
    parallel_for(axis.size(), [&](std::size_t i) {
      for (std::size_t j = 0; j < axis.size(); ++j) {
        Reconstructed r = wigner_from_tomogram(fam, axis[j], axis[i], a.hbar);
        vals[i * axis.size() + j] = r.value;
        imag[i * axis.size() + j] = r.imag_residual;
      }
    });
    GridFunction2D<double> w(axis, axis, vals);
    write_atomic(a.out, grid_csv(w, "q", "p", "W"));
    rep["imag_residual_max"] = *std::max_element(imag.begin(), imag.end());
    rep["frame_grid_edge_magnitude"] = fam.edge_magnitude();
    rep["value_at_origin"] = wigner_from_tomogram(fam, 0.0, 0.0, a.hbar).value;
    if (catalog) {
      // Reference: closed form where one exists, else the Wigner transform of psi psi^*.
      std::optional<GridFunction2D<double>> dense;
      std::string reference = analytic_wigner(s, 0.0, 0.0) ? "analytic" : "density_route";
      if (!analytic_wigner(s, 0.0, 0.0)) {
        Support q = position_support(s);
        const double reach = std::max({std::abs(q.lo), std::abs(q.hi), std::abs(axis.min()), std::abs(axis.max())}) * 2.0;
        const double h = std::min(q.resolution / 4.0, 0.02);
        UniformGrid xa(-reach, reach, static_cast<std::size_t>(std::ceil(2.0 * reach / h)) | 1u);
        auto rho = GridFunction2D<complex>::sample(xa, xa, [&](double x, double y) { return wavefunction(s, x) * std::conj(wavefunction(s, y)); });
        dense = wigner_grid_from_density(rho, axis, axis, a.hbar);
      }
      double err = 0.0;
      for (std::size_t i = 0; i < axis.size(); ++i)
        for (std::size_t j = 0; j < axis.size(); ++j) {
          double ref = dense ? (*dense)(i, j) : *analytic_wigner(s, axis[i], axis[j]);
          err = std::max(err, std::abs(w(i, j) - ref));
        }
      rep["exact"] = {{"reference", reference}, {"max_error", err}};
      ctx.out << "max error vs " << reference << " Wigner function: " << format_real(err) << "\n";
    }
    ctx.out << "W(0,0) = " << format_real(rep["value_at_origin"].get<double>()) << "\n";
  } else {
    DensityFamily fam = state_density_family(s, axis, a.extent, R, a.dx);
    auto rho = density_on_grid(fam, axis, a.hbar);
    write_atomic(a.out, grid_csv(rho, "x", "xprime"));
    complex tr{};
    for (std::size_t i = 0; i < axis.size(); ++i) tr += rho(i, i);
    rep["hermiticity_residual"] = hermiticity_residual(rho);
    rep["diagonal_sum_times_dx"] = tr.real() * axis.spacing();
    if (catalog) {
      double err = 0.0;
      for (std::size_t i = 0; i < axis.size(); ++i)
        for (std::size_t j = 0; j < axis.size(); ++j)
          err = std::max(err, std::abs(rho(i, j) - wavefunction(s, axis[i]) * std::conj(wavefunction(s, axis[j]))));
      rep["exact"] = {{"reference", "psi(x) conj(psi(x'))"}, {"max_error", err}};
      ctx.out << "max error vs psi(x) conj(psi(x')): " << format_real(err) << "\n";
    }
  }
  rep["run"] = ctx.run;
  write_report(sidecar_path(a.out), rep);
  ctx.out << "wrote " << a.out << " and " << sidecar_path(a.out).string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  std::string state, classical, out;
  std::vector<std::string> frames;
  double hbar = 1.0;
  bool ehrenfest = false;
  std::size_t points = 4001;
};

struct CompareRow {
  TomographyFrame frame;
  std::string metric;
  double distance = 0.0;
  std::string status = "ok";
};

/// Local sin^2 period of W_n at general hbar: pi sqrt(hbar)|zeta| / sqrt(2n + 1 - y^2), y = X/(sqrt(hbar)|zeta|).
inline double hermite_local_period(int n, double hbar, const TomographyFrame& f, double X) {
  const double z = f.norm(), y = X / (std::sqrt(hbar) * z);
  return pi * std::sqrt(hbar) * z / std::sqrt(std::max(2.0 * n + 1.0 - y * y, 1e-12));
}

inline CompareRow compare_frame(const StateSpec& s, const ClassicalSpec& c, const TomographyFrame& f, std::size_t points) {
  CompareRow row{f, "", 0.0, "ok"};
  if (f.is_zero()) throw std::domain_error("frame (0, 0) has no smooth tomogram");
  if (c.kind == "point") {
    double T = trajectory_tomogram(std::get<PointTrajectory>(c.model), 0.0, f).location;
    UniformGrid g = default_grid(s, f, points);
    Tomogram q = state_tomogram(s, f, g);
    row.metric = "wasserstein1";
    row.distance = wasserstein1(q, Tomogram::point(f, T));
    return row;
  }
  if (c.kind == "box" && s.is<BoxEigen>()) {
    const auto& b = s.as<BoxEigen>();
    if (std::abs(b.L - c.L) > 1e-12 * c.L || c.E != 1.0) throw std::domain_error("box comparison needs matching L and E = 1");
    if (f.mu == 0.0) throw std::domain_error("windowed box comparison needs mu != 0");
    const double window = box_cross_term_period(b.n, b.L, f);
    auto edges = tomolab::detail::box_edges(f, b.L);
    const double lo = *std::min_element(edges.begin(), edges.end()) - 0.1, hi = *std::max_element(edges.begin(), edges.end()) + 0.1;
    const bool sp = f.nu != 0.0 && std::abs(s.hbar - box_ehrenfest_hbar(b.n, b.L)) <= 1e-12 * s.hbar && b.n >= 10;
    if (sp) {
      UniformGrid g = tomolab::detail::grid_with_spacing(lo, hi, window / 40.0);
      Tomogram t = tomolab::detail::sample_tomogram(f, g, [&](double x) { return box_tomogram_stationary_phase(b.n, b.L, f, x); });
      row.metric = "windowed_l1_stationary_phase";
      row.distance = box_windowed_distance(t, window, b.L, 2);
    } else {
      UniformGrid g = tomolab::detail::grid_with_spacing(lo, hi, window / 8.0);
      Tomogram t = box_tomogram(b.n, b.L, f, g, s.hbar);
      row.metric = "windowed_l1_quadrature";
      row.distance = box_windowed_distance(t, window, b.L, 1);
    }
    return row;
  }
  if ((c.kind == "oscillator" || c.kind == "orbit") && s.is<HOEigen>() && s.as<HOEigen>().varpi == 1.0) {
    const int n = s.as<HOEigen>().n;
    const double E = c.kind == "oscillator" ? c.E : 0.5 * (c.q * c.q + c.p * c.p);
    const double R = oscillator_radius(f, E), lim = 1.3 / std::sqrt(2.0) * R;
    UniformGrid g = tomolab::detail::grid_with_spacing(-1.8 * R, 1.8 * R, hermite_local_period(n, s.hbar, f, 0.0) / 40.0);
    Tomogram t = tomolab::detail::sample_tomogram(f, g, [&](double x) { return hermite_tomogram(n, f, x, s.hbar); });
    RunningIntegral run(t);
    std::vector<double> d(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::abs(g[i]) <= lim) d[i] = std::abs(run.average(g[i], 3.0 * hermite_local_period(n, s.hbar, f, g[i])) - classical_oscillator_tomogram(g[i], f, E));
    row.metric = "windowed_l1";
    row.distance = trapezoid(d, g.spacing());
    return row;
  }
  // Generic: both tomograms on the quantum grid, plain L1.
  UniformGrid g = default_grid(s, f, points);
  if (c.kind == "box" || c.kind == "oscillator" || c.kind == "orbit") {
    double R = c.kind == "box" ? std::abs(f.mu) * c.L + std::sqrt(2.0 * c.E) * std::abs(f.nu)
               : c.kind == "oscillator" ? oscillator_radius(f, c.E)
                                        : oscillator_radius(f, 0.5 * (c.q * c.q + c.p * c.p));
    g = UniformGrid(std::min(g.min(), -R - 0.1), std::max(g.max(), R + 0.1), points);
  }
  Tomogram q = state_tomogram(s, f, g);
  Tomogram cl = classical_tomogram(c.model, f, g);
  row.metric = "l1";
  row.distance = tomogram_distance_l1(q, cl);
  return row;
}

inline int cmd_compare(const CompareArgs& a, Context& ctx) {
  double hbar = a.hbar;
  StateSpec probe = parse_state_with_files(a.state, 1.0);
  if (a.ehrenfest) {
    if (probe.is<HOEigen>()) hbar = 1.0 / probe.as<HOEigen>().n;
    else if (probe.is<BoxEigen>()) hbar = box_ehrenfest_hbar(probe.as<BoxEigen>().n, probe.as<BoxEigen>().L);
    else throw UsageError("--ehrenfest applies to ho and box states");
  }
  StateSpec s = parse_state_with_files(a.state, hbar);
  ClassicalSpec c = parse_classical(a.classical);
  std::vector<TomographyFrame> frames;
  for (const auto& f : a.frames) frames.push_back(parse_frame(f));
  if (frames.empty()) frames.push_back({1.0, 0.0});
  std::vector<CompareRow> rows;
  for (const auto& f : frames) {
    try {
      rows.push_back(compare_frame(s, c, f, a.points));
    } catch (const std::exception& e) {
      rows.push_back({f, "-", std::nan(""), std::string("error: ") + e.what()});
    }
  }
  std::string csv = "mu,nu,metric,distance,status\n";
  char line[512];
  ctx.out << "state " << a.state << " (hbar = " << format_real(hbar) << ") vs classical " << a.classical << "\n";
  std::snprintf(line, sizeof line, "%-10s %-10s %-30s %-24s %s\n", "mu", "nu", "metric", "distance", "status");
  ctx.out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-10s %-10s %-30s %-24s %s\n", fmt(r.frame.mu).c_str(), fmt(r.frame.nu).c_str(), r.metric.c_str(),
                  format_real(r.distance).c_str(), r.status.c_str());
    ctx.out << line;
    csv += format_real(r.frame.mu) + "," + format_real(r.frame.nu) + "," + r.metric + "," + format_real(r.distance) + "," + r.status + "\n";
  }
  if (!a.out.empty()) {
    write_atomic(a.out, csv);
    write_report(sidecar_path(a.out), Json{{"state", a.state}, {"hbar", hbar}, {"classical", a.classical}, {"run", ctx.run}});
    ctx.out << "wrote " << a.out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// selftest

struct SelftestArgs {
  bool quick = false;
  double bias = 0.0;
  std::string out;
};

inline int cmd_selftest(const SelftestArgs& a, Context& ctx) {
  SelftestOptions o;
  o.quick = a.quick;
  o.norm_bias = a.bias;
  SelftestReport r = run_selftest(o);
  std::string text = format_selftest(r);
  ctx.out << text;
  if (!a.out.empty()) write_atomic(a.out, text);
  return r.passed() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  // --config <path>: the document supplies the command line; remaining flags override it.
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] != "--config") continue;
    if (i + 1 >= args.size()) {
      err << "error: --config needs a path\n";
      return 2;
    }
    try {
      Json cfg = Json::parse(read_text(args[i + 1]));
      if (cfg.contains("run")) cfg = cfg["run"];  // a sidecar or report replays its recorded run
      std::vector<std::string> rest(args.begin(), args.begin() + static_cast<long>(i));
      rest.insert(rest.end(), args.begin() + static_cast<long>(i) + 2, args.end());
      args = config_to_args(merge_overrides(cfg, rest));
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    }
    break;
  }

  CLI::App app{"tomolab: symplectic tomograms, their classical and semiclassical limits, and inverse maps"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");
  std::string config_path;
  app.add_option("--config", config_path, "JSON document mirroring the command line (flags by long name)");

  TomogramArgs ta;
  auto* tomo = app.add_subcommand("tomogram", "Evaluate a state's tomogram on an X grid");
  tomo->add_option("--state", ta.state, "State descriptor, e.g. ho:n=0 or custom:psi.csv")->required();
  tomo->add_option("--hbar", ta.hbar, "Planck constant")->check(CLI::PositiveNumber);
  tomo->add_option("--frame", ta.frame, "Frame mu,nu");
  tomo->add_option("--scaling", ta.scaling, "Frame as s,theta");
  tomo->add_option("--grid", ta.grid, "X grid min,max,count (default: the state's natural range, 2001 points)");
  tomo->add_option("--rep", ta.rep, "Force the quadrature route")->check(CLI::IsMember({"auto", "position", "momentum"}));
  tomo->add_option("--out", ta.out, "Output CSV (a JSON sidecar is written next to it)");

  LimitArgs la;
  auto* lim = app.add_subcommand("limit", "Run a Planck- or Ehrenfest-limit study");
  lim->add_option("study", la.study, "Study name")->required()->check(CLI::IsMember(limit_studies()));
  lim->add_option("--state", la.state, "State descriptor (planck-delta)");
  lim->add_option("--frame", la.frames, "Frame mu,nu (repeatable for ehrenfest-box)");
  lim->add_option("--scaling", la.scaling, "Frame as s,theta");
  lim->add_option("--hbars", la.hbars, "hbar sequence a:b:geometric[:count] or a comma list");
  lim->add_option("--ns", la.ns, "Quantum numbers, comma separated");
  lim->add_option("--n", la.n, "First Hermite index (interference)");
  lim->add_option("--m", la.m, "Second Hermite index (interference)");
  lim->add_option("--alpha", la.alpha, "Cat amplitude re,im (cat-interference)");
  lim->add_option("--q-alpha", la.q_alpha, "Fixed phase-space centre q (ehrenfest-coherent, ehrenfest-cat)");
  lim->add_option("--p-alpha", la.p_alpha, "Fixed phase-space centre p (ehrenfest-coherent, ehrenfest-cat)");
  lim->add_option("--parity", la.parity, "Cat parity even|odd (ehrenfest-cat)");
  lim->add_option("--L", la.L, "Box length (ehrenfest-box)")->check(CLI::PositiveNumber);
  lim->add_option("--center", la.center, "Expected delta location (planck-delta)");
  lim->add_option("--gamma", la.gamma, "Scaling exponent in [-1, 0] for custom profiles (planck-delta)");
  lim->add_option("--points", la.points, "X grid points for Planck studies")->check(CLI::Range(101, 1000001));
  lim->add_option("--out", la.out, "Output directory (default limit-<study>)");

  ReconstructArgs ra;
  auto* rec = app.add_subcommand("reconstruct", "Reconstruct a Wigner function or density matrix from tomograms");
  rec->add_option("--state", ra.state, "State descriptor")->required();
  rec->add_option("--hbar", ra.hbar, "Planck constant")->check(CLI::PositiveNumber);
  rec->add_option("--output", ra.output, "wigner | density")->check(CLI::IsMember({"wigner", "density"}));
  rec->add_option("--grid", ra.grid, "Target axis min,max,count, used for q and p (or x and x')");
  rec->add_option("--extent", ra.extent, "Frame grid half-width in mu and nu")->check(CLI::PositiveNumber);
  rec->add_option("--radius", ra.radius, "Declared phase-space support radius (sets the frame spacing pi/R)");
  rec->add_option("--dx", ra.dx, "X spacing of each tomogram")->check(CLI::PositiveNumber);
  rec->add_option("--out", ra.out, "Output CSV (a JSON report is written next to it)");

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "Quantum vs classical tomogram distances per frame");
  cmp->add_option("--state", ca.state, "Quantum state descriptor")->required();
  cmp->add_option("--classical", ca.classical, "oscillator[:E=] | box:L=[,E=] | point:q=,p= | orbit:q=,p= | density:<path.csv>")->required();
  cmp->add_option("--frame", ca.frames, "Frame mu,nu (repeatable)");
  cmp->add_option("--hbar", ca.hbar, "Planck constant")->check(CLI::PositiveNumber);
  cmp->add_flag("--ehrenfest", ca.ehrenfest, "Set hbar from the unit-energy constraint (ho: 1/n, box: sqrt2 L/(n pi))");
  cmp->add_option("--points", ca.points, "X grid points for unwindowed comparisons")->check(CLI::Range(101, 1000001));
  cmp->add_option("--out", ca.out, "Output CSV table");

  SelftestArgs sa;
  auto* st = app.add_subcommand("selftest", "Run the invariant battery");
  st->add_flag("--quick", sa.quick, "Reduced battery");
  st->add_option("--out", sa.out, "Also write the report to this file");
  st->add_option("--inject-norm-bias", sa.bias, "Scale measured masses by (1 + bias)")->group("");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (app.get_subcommands().empty()) err << "commands: tomogram, limit, reconstruct, compare, selftest\n";
    return 2;
  }

  CLI::App* used = app.get_subcommands().front();
  Context ctx{out, err, Json::object()};
  ctx.run["command"] = used->get_name();
  if (used == lim) ctx.run["study"] = la.study;
  const Json flags = record_options(*used);
  for (auto it = flags.begin(); it != flags.end(); ++it)
    if (it.key() != "study") ctx.run[it.key()] = it.value();
  try {
    if (used == tomo) return cmd_tomogram(ta, ctx);
    if (used == lim) return cmd_limit(la, ctx);
    if (used == rec) return cmd_reconstruct(ra, ctx);
    if (used == cmp) return cmd_compare(ca, ctx);
    return cmd_selftest(sa, ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DescriptorError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace tomolab::cli
