#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "tomolab/cli.hpp"

using namespace tomolab;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  fs::path d = fs::temp_directory_path() / "tomolab_cli_test";
  fs::create_directories(d);
  return d;
}

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST(CliParse, HbarSequence) {
  auto h = cli::parse_hbars("1e-1:1e-4:geometric");
  ASSERT_EQ(h.size(), 11u);
  EXPECT_EQ(h.front(), 1e-1);
  EXPECT_EQ(h.back(), 1e-4);
  for (std::size_t k = 1; k < h.size(); ++k) EXPECT_NEAR(h[k] / h[k - 1], std::pow(1e-3, 0.1), 1e-12);
  EXPECT_EQ(cli::parse_hbars("1e-2:1e-3:geometric:4").size(), 4u);
  EXPECT_EQ(cli::parse_hbars("0.1,0.05").size(), 2u);
  EXPECT_THROW(cli::parse_hbars("1:1:geometric"), cli::UsageError);
  EXPECT_THROW(cli::parse_hbars("1:0.1:linear"), cli::UsageError);
}

TEST(CliParse, FrameScalingGrid) {
  auto f = cli::parse_scaling("2,0");
  EXPECT_EQ(f.mu, 2.0);
  EXPECT_EQ(f.nu, 0.0);
  EXPECT_THROW(cli::parse_frame("1"), cli::UsageError);
  EXPECT_THROW(cli::parse_grid("1,0,10"), cli::UsageError);
  EXPECT_THROW(cli::parse_grid("0,1,2.5"), cli::UsageError);
}

TEST(CliParse, ClassicalDescriptors) {
  EXPECT_EQ(cli::parse_classical("oscillator").kind, "oscillator");
  EXPECT_EQ(cli::parse_classical("box:L=2,E=3").L, 2.0);
  EXPECT_EQ(cli::parse_classical("point:q=1,p=-1").p, -1.0);
  EXPECT_THROW(cli::parse_classical("point:q=1"), cli::UsageError);
  EXPECT_THROW(cli::parse_classical("box:L=1,Q=2"), cli::UsageError);
  EXPECT_THROW(cli::parse_classical("spring"), cli::UsageError);
}

TEST(CliTomogram, GroundStatePeak) {
  auto r = run({"tomogram", "--state", "ho:n=0", "--frame", "1,0", "--hbar", "1", "--grid", "-5,5,1001", "--out", path("g.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto t = read_tomogram(path("g.csv"));
  EXPECT_NEAR(t.tomogram.values()[500], 0.564190, 5e-7);
  EXPECT_NEAR(t.tomogram.values()[500], 1.0 / std::sqrt(pi), 1e-12);
  EXPECT_NE(r.out.find("normalization residual"), std::string::npos);
  EXPECT_EQ(t.metadata["run"]["command"], "tomogram");
}

TEST(CliTomogram, EvenCatIsSymmetric) {
  auto r = run({"tomogram", "--state", "cat:even,re=1,im=0", "--frame", "0,1", "--hbar", "1", "--out", path("cat.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto& v = read_tomogram(path("cat.csv")).tomogram.values();
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v[i], v[v.size() - 1 - i], 1e-10);
}

TEST(CliTomogram, BoxPositionMarginal) {
  auto r = run({"tomogram", "--state", "box:n=5,L=1", "--frame", "1,0", "--hbar", "1", "--grid", "0,1,101", "--out", path("box.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto t = read_tomogram(path("box.csv")).tomogram;
  for (std::size_t i = 0; i < t.grid().size(); ++i) {
    double s = std::sin(5.0 * pi * t.grid()[i]);
    EXPECT_NEAR(t.values()[i], 2.0 * s * s, 1e-12);
  }
}

TEST(CliTomogram, OutputsAreByteIdenticalAcrossRuns) {
  std::vector<std::string> a = {"tomogram", "--state", "superpos:n=1,m=4", "--frame", "0.6,0.8", "--hbar", "0.5"};
  auto p1 = path("d1.csv"), p2 = path("d2.csv");
  auto x = a, y = a;
  x.insert(x.end(), {"--out", p1});
  y.insert(y.end(), {"--out", p2});
  ASSERT_EQ(run(x).code, 0);
  ASSERT_EQ(run(y).code, 0);
  EXPECT_EQ(read_text(p1), read_text(p2));
}

TEST(CliTomogram, ErrorsExitWithUsageStatus) {
  auto r = run({"tomogram", "--state", "ho:n=oops", "--frame", "1,0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("position"), std::string::npos) << r.err;
  EXPECT_EQ(run({"tomogram", "--state", "ho:n=0", "--frame", "1,0", "--scaling", "1,0"}).code, 2);
  EXPECT_EQ(run({"tomogram", "--state", "ho:n=0"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST(CliConfig, ReplayFromSidecarAndOverride) {
  auto p = path("cfg.csv");
  ASSERT_EQ(run({"tomogram", "--state", "coherent:re=1,im=0.5", "--frame", "0.6,0.8", "--grid", "-6,6,301", "--out", p}).code, 0);
  std::string first = read_text(p);
  ASSERT_EQ(run({"--config", sidecar_path(p).string()}).code, 0);
  EXPECT_EQ(read_text(p), first);
  auto q = path("cfg_small.csv");
  ASSERT_EQ(run({"--config", sidecar_path(p).string(), "--grid", "-6,6,31", "--out", q}).code, 0);
  EXPECT_EQ(read_tomogram(q).tomogram.grid().size(), 31u);
}

TEST(CliLimit, InterferenceExponent) {
  auto dir = path("interference");
  auto r = run({"limit", "interference", "--n", "0", "--m", "1", "--frame", "0.6,0.8", "--hbars", "1e-1:1e-4:geometric", "--out", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(read_text(fs::path(dir) / "report.json"));
  EXPECT_NEAR(j["exponent"].get<double>(), 0.5, 0.03);
  EXPECT_EQ(j["verdict"], "converged");
  EXPECT_TRUE(fs::exists(fs::path(dir) / "point_00.csv"));
  EXPECT_TRUE(fs::exists(fs::path(dir) / "point_00.json"));
}

TEST(CliLimit, OscillatorConverges) {
  auto dir = path("oscillator");
  auto r = run({"limit", "ehrenfest-oscillator", "--ns", "25,50,100", "--out", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(read_text(fs::path(dir) / "report.json"));
  auto d = j["distances"].get<std::vector<double>>();
  for (std::size_t k = 1; k < d.size(); ++k) EXPECT_LT(d[k], d[k - 1]);
  EXPECT_EQ(j["verdict"], "converged");
}

TEST(CliLimit, PlanckDeltaCoherent) {
  auto dir = path("planck");
  auto r = run({"limit", "planck-delta", "--state", "coherent:re=1,im=0", "--out", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(read_text(fs::path(dir) / "report.json"));
  EXPECT_EQ(j["verdict"], "converged");
  EXPECT_EQ(j["parameters"]["center"].get<double>(), 0.0);
}

TEST(CliLimit, UnknownStudyListsOptions) {
  auto r = run({"limit", "nope"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ehrenfest-box"), std::string::npos);
}

TEST(CliReconstruct, CoherentDensityRoundTrip) {
  auto p = path("rho.csv");
  auto r = run({"reconstruct", "--state", "coherent:re=1,im=0", "--output", "density", "--out", p});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(read_text(sidecar_path(p)));
  EXPECT_LT(j["exact"]["max_error"].get<double>(), 1e-3);
}

TEST(CliReconstruct, FirstExcitedNegativeAtOrigin) {
  auto p = path("w1.csv");
  auto r = run({"reconstruct", "--state", "ho:n=1", "--grid", "-2,2,21", "--out", p});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(read_text(sidecar_path(p)));
  EXPECT_NEAR(j["value_at_origin"].get<double>(), -2.0, 1e-3);
  EXPECT_LT(j["exact"]["max_error"].get<double>(), 1e-3);
}

TEST(CliReconstruct, CustomStateOmitsExactSection) {
  UniformGrid g(-6.0, 6.0, 241);
  std::vector<complex> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = hermite_phi(0, g[i]);
  auto psi = path("psi0.csv");
  write_atomic(psi, wavefunction_csv(SampledWave(g, v)));
  auto p = path("wc.csv");
  auto r = run({"reconstruct", "--state", "custom:" + psi, "--grid", "-1,1,3", "--extent", "3", "--radius", "3", "--dx", "0.2",
                "--out", p});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(read_text(sidecar_path(p)));
  EXPECT_FALSE(j.contains("exact"));
  EXPECT_GT(j["value_at_origin"].get<double>(), 0.0);
}

TEST(CliCompare, OscillatorAndImpossibleFrame) {
  auto p = path("cmp.csv");
  auto r = run({"compare", "--state", "ho:n=100", "--ehrenfest", "--classical", "oscillator", "--frame", "1,0", "--frame", "0,0",
                "--out", p});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(read_text(p));
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0][3], "distance");
  EXPECT_LT(std::stod(rows[1][3]), 0.02);
  EXPECT_EQ(rows[1][4], "ok");
  EXPECT_NE(rows[2][4].find("error"), std::string::npos);
}

TEST(CliSelftest, QuickPassesAndBiasFails) {
  auto ok = run({"selftest", "--quick"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("all checks passed"), std::string::npos);
  EXPECT_EQ(run({"selftest", "--quick"}).out, ok.out);
  EXPECT_EQ(run({"selftest", "--quick", "--inject-norm-bias", "0.01"}).code, 1);
}
