#pragma once

// CSV + JSON-sidecar serialization, with atomic (temp + rename) writes.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tomolab/classical.hpp"
#include "tomolab/kernel.hpp"
#include "tomolab/state.hpp"

namespace tomolab {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits, enough to round-trip any double.
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Writes content to path via a sibling temporary file and rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// JSON text with a trailing newline; numbers use the shortest round-trip form.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

/// Sidecar path: same stem, .json extension.
inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline double parse_csv_real(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError(where + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i)
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

inline std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace detail

/// Numeric table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw IoError("CSV has no column '" + name + "'");
  }
  bool has_column(const std::string& name) const {
    for (const auto& h : header)
      if (h == name) return true;
    return false;
  }
};

inline CsvTable parse_csv(const std::string& text, const std::string& source = "csv") {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty() || line[0] == '#') continue;
    auto cells = detail::split_csv_line(line);
    if (t.header.empty()) {
      for (auto c : cells) t.header.push_back(detail::trim(c));
      continue;
    }
    if (cells.size() != t.header.size())
      throw IoError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) + " fields");
    std::vector<double> row;
    for (auto c : cells) row.push_back(detail::parse_csv_real(c, source + ":" + std::to_string(lineno)));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw IoError(source + ": empty CSV");
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path), path.string()); }

/// Uniform grid through the given nodes; rejects non-uniform spacing.
inline UniformGrid grid_from_nodes(const std::vector<double>& x, const std::string& what) {
  if (x.size() < 2) throw IoError(what + ": need at least two nodes");
  UniformGrid g(x.front(), x.back(), x.size());
  const double tol = 1e-9 * std::max(std::abs(g.spacing()), 1e-300) * static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - g[i]) > tol) throw IoError(what + ": nodes are not uniformly spaced");
  return g;
}

// ---------------------------------------------------------------------------
// Tomograms

inline std::string tomogram_csv(const Tomogram& t) {
  std::string s = "X,value\n";
  for (std::size_t i = 0; i < t.values().size(); ++i) s += format_real(t.grid()[i]) + "," + format_real(t.values()[i]) + "\n";
  return s;
}

/// {frame: {mu, nu}, hbar, state, atoms: [{weight, location}], grid, ...extra}
inline Json tomogram_metadata(const Tomogram& t, double hbar, const std::string& state, const Json& extra = Json::object()) {
  Json j;
  j["frame"] = {{"mu", t.frame().mu}, {"nu", t.frame().nu}};
  j["hbar"] = hbar;
  j["state"] = state;
  Json atoms = Json::array();
  for (const auto& a : t.atoms()) atoms.push_back({{"weight", a.weight}, {"location", a.location}});
  j["atoms"] = atoms;
  j["grid"] = {{"min", t.grid().min()}, {"max", t.grid().max()}, {"count", t.grid().size()}};
  j["normalization_residual"] = normalization_residual(t);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

/// Writes `path` (CSV) and its JSON sidecar.
inline void write_tomogram(const std::filesystem::path& path, const Tomogram& t, const Json& metadata) {
  write_atomic(path, tomogram_csv(t));
  write_atomic(sidecar_path(path), dump_json(metadata));
}

struct LoadedTomogram {
  Tomogram tomogram;
  Json metadata;
};

inline LoadedTomogram read_tomogram(const std::filesystem::path& path) {
  Json meta = Json::parse(read_text(sidecar_path(path)));
  TomographyFrame f{meta.at("frame").at("mu").get<double>(), meta.at("frame").at("nu").get<double>()};
  std::vector<DeltaAtom> atoms;
  for (const auto& a : meta.at("atoms")) atoms.push_back({a.at("weight").get<double>(), a.at("location").get<double>()});
  CsvTable csv = read_csv(path);
  std::size_t cx = csv.column("X"), cv = csv.column("value");
  std::vector<double> x, v;
  for (const auto& r : csv.rows) x.push_back(r[cx]), v.push_back(r[cv]);
  UniformGrid g{};
  if (!x.empty()) {
    const auto& gm = meta.at("grid");
    g = UniformGrid(gm.at("min").get<double>(), gm.at("max").get<double>(), gm.at("count").get<std::size_t>());
    if (g.size() != x.size()) throw IoError(path.string() + ": row count does not match the sidecar grid");
  }
  return {Tomogram(f, g, std::move(v), std::move(atoms)), std::move(meta)};
}

// ---------------------------------------------------------------------------
// Wave functions and phase-space grids

/// Custom state CSV: columns x, re[, im] on a uniform grid.
inline SampledWave read_wavefunction_csv(const std::filesystem::path& path) {
  CsvTable t = read_csv(path);
  std::size_t cx = t.column("x"), cr = t.column("re");
  const bool has_im = t.has_column("im");
  std::size_t ci = has_im ? t.column("im") : 0;
  std::vector<double> x;
  std::vector<complex> v;
  for (const auto& r : t.rows) {
    x.push_back(r[cx]);
    v.emplace_back(r[cr], has_im ? r[ci] : 0.0);
  }
  return {grid_from_nodes(x, path.string()), std::move(v)};
}

inline std::string wavefunction_csv(const SampledWave& w) {
  std::string s = "x,re,im\n";
  for (std::size_t i = 0; i < w.values().size(); ++i)
    s += format_real(w.grid()[i]) + "," + format_real(w.values()[i].real()) + "," + format_real(w.values()[i].imag()) + "\n";
  return s;
}

/// Real function on a 2D grid as rows (x_name, y_name, value), x-major.
inline std::string grid_csv(const GridFunction2D<double>& f, const std::string& x_name, const std::string& y_name,
                            const std::string& value_name = "value") {
  std::string s = x_name + "," + y_name + "," + value_name + "\n";
  for (std::size_t i = 0; i < f.x_axis().size(); ++i)
    for (std::size_t j = 0; j < f.y_axis().size(); ++j)
      s += format_real(f.x_axis()[i]) + "," + format_real(f.y_axis()[j]) + "," + format_real(f(i, j)) + "\n";
  return s;
}

inline std::string grid_csv(const GridFunction2D<complex>& f, const std::string& x_name, const std::string& y_name) {
  std::string s = x_name + "," + y_name + ",re,im\n";
  for (std::size_t i = 0; i < f.x_axis().size(); ++i)
    for (std::size_t j = 0; j < f.y_axis().size(); ++j)
      s += format_real(f.x_axis()[i]) + "," + format_real(f.y_axis()[j]) + "," + format_real(f(i, j).real()) + "," +
           format_real(f(i, j).imag()) + "\n";
  return s;
}

inline Json axis_json(const UniformGrid& g) { return {{"min", g.min()}, {"max", g.max()}, {"count", g.size()}}; }

inline UniformGrid axis_from_json(const Json& j) {
  auto n = j.at("count").get<std::size_t>();
  if (n < 2) throw IoError("axis needs count >= 2");
  return {j.at("min").get<double>(), j.at("max").get<double>(), n};
}

/// DensityGrid CSV (columns q, p, f) with a sidecar {q: axis, p: axis}.
/// Rows may come in any order; every node must appear exactly once.
inline DensityGrid read_density_grid(const std::filesystem::path& path) {
  Json meta = Json::parse(read_text(sidecar_path(path)));
  UniformGrid qa = axis_from_json(meta.at("q")), pa = axis_from_json(meta.at("p"));
  CsvTable t = read_csv(path);
  std::size_t cq = t.column("q"), cp = t.column("p"), cf = t.column("f");
  std::vector<double> v(qa.size() * pa.size(), 0.0);
  std::vector<char> seen(v.size(), 0);
  auto index = [&](const UniformGrid& g, double x, const char* axis) {
    double k = (x - g.min()) / g.spacing();
    double r = std::round(k);
    if (std::abs(k - r) > 1e-6 || r < 0 || r >= static_cast<double>(g.size()))
      throw IoError(path.string() + ": " + axis + " = " + format_real(x) + " is not a node of the declared axis");
    return static_cast<std::size_t>(r);
  };
  for (const auto& r : t.rows) {
    std::size_t k = index(qa, r[cq], "q") * pa.size() + index(pa, r[cp], "p");
    if (seen[k]) throw IoError(path.string() + ": duplicate node");
    seen[k] = 1;
    v[k] = r[cf];
  }
  for (char s : seen)
    if (!s) throw IoError(path.string() + ": missing grid nodes");
  return {GridFunction2D<double>(qa, pa, std::move(v))};
}

inline void write_density_grid(const std::filesystem::path& path, const DensityGrid& d) {
  write_atomic(path, grid_csv(d.f, "q", "p", "f"));
  write_atomic(sidecar_path(path), dump_json(Json{{"q", axis_json(d.f.x_axis())}, {"p", axis_json(d.f.y_axis())}}));
}

/// parse_state with the CSV loader for custom:<path> descriptors.
inline StateSpec parse_state_with_files(const std::string& desc, double hbar) {
  return parse_state(desc, hbar, [](const std::string& p) { return read_wavefunction_csv(p); });
}

}  // namespace tomolab
