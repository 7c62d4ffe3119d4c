#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "report.hpp"
#include "test_support.hpp"

using namespace mobius_mono;
using namespace mobius_mono::cli;
using mobius_mono::test::data_path;

namespace fs = std::filesystem;

namespace {

struct CommandRun {
  int code;
  std::string out;
  std::string err;
};

CommandRun run(const std::string& command, const std::string& config, std::optional<std::string> out_dir = {}) {
  CommandOptions opts;
  opts.config = config;
  opts.out_dir = std::move(out_dir);
  std::ostringstream out, err;
  const int code = run_command(command, opts, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mobius_mono_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const std::string& yaml) {
  try {
    parse_config(yaml, "test.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const char* const kDisk = R"(ambient: {n: 3}
mobius:
  word: [{type: sphere, params: {center: [2, 0, 0], radius: 1}}]
surface:
  kind: flat_disk
  params: {point: [1.5, 0, 0], frame: [[0, 1, 0], [0, 0, 1]], extent: 1}
sweep: {radii: [0.3, 0.8]}
)";

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) {
    if (const char* old = std::getenv("MOBIUS_MONO_THREADS")) saved_ = old;
    ::setenv("MOBIUS_MONO_THREADS", value, 1);
  }
  ~ThreadsEnv() {
    if (saved_) {
      ::setenv("MOBIUS_MONO_THREADS", saved_->c_str(), 1);
    } else {
      ::unsetenv("MOBIUS_MONO_THREADS");
    }
  }

 private:
  std::optional<std::string> saved_;
};

}  // namespace

TEST(Config, ParsesDiskConfig) {
  const Config cfg = parse_config(kDisk);
  EXPECT_EQ(cfg.n, 3);
  ASSERT_EQ(cfg.word.size(), 1u);
  EXPECT_EQ(cfg.word[0].type, "sphere");
  EXPECT_EQ(cfg.radii, (std::vector<double>{0.3, 0.8}));
  EXPECT_TRUE(cfg.checks.volume_identity);
  EXPECT_FALSE(cfg.checks.flux);
  EXPECT_DOUBLE_EQ(cfg.quadrature.tol, 1e-7);
  EXPECT_EQ(cfg.quadrature.max_depth, 14);
}

TEST(Config, UnknownKeyNamesFieldAndLine) {
  const std::string msg = config_error(std::string(kDisk) + "checks: {volume_identity: true, fluxx: true}\n");
  EXPECT_NE(msg.find("fluxx"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 8"), std::string::npos) << msg;
}

TEST(Config, WrongTypeNamesField) {
  const std::string msg = config_error(R"(ambient: {n: 3}
mobius:
  word: [{type: sphere, params: {center: [2, 0, 0], radius: abc}}]
surface: {kind: enneper}
sweep: {radii: [0.3]}
)");
  EXPECT_NE(msg.find("radius"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, UnknownSurfaceKind) {
  const std::string msg = config_error(R"(ambient: {n: 3}
mobius:
  word: [{type: sphere, params: {center: [2, 0, 0], radius: 1}}]
surface: {kind: costa}
sweep: {radii: [0.3]}
)");
  EXPECT_NE(msg.find("costa"), std::string::npos) << msg;
}

TEST(Config, DimensionMismatch) {
  const std::string msg = config_error(R"(ambient: {n: 4}
mobius:
  word: [{type: sphere, params: {center: [2, 0, 0], radius: 1}}]
surface: {kind: complex_parabola}
sweep: {radii: [0.3]}
)");
  EXPECT_NE(msg.find("center"), std::string::npos) << msg;
}

TEST(Cli, EmptyRadiusGridIsConfigError) {
  const fs::path dir = scratch_dir("empty_grid");
  std::ofstream(dir / "empty.yaml") << R"(ambient: {n: 3}
mobius:
  word: [{type: sphere, params: {center: [2, 0, 0], radius: 1}}]
surface:
  kind: flat_disk
  params: {point: [1.5, 0, 0], frame: [[0, 1, 0], [0, 0, 1]], extent: 1}
sweep: {radii: []}
)";
  const CommandRun r = run("sweep", (dir / "empty.yaml").string(), dir.string());
  EXPECT_EQ(r.code, kExitConfig) << r.err;
  EXPECT_FALSE(fs::exists(dir / "sweep.csv"));
}

TEST(Config, SweepSpacing) {
  const Config lin = parse_config(R"(ambient: {n: 3}
mobius:
  word: [{type: sphere, params: {center: [2, 0, 0], radius: 1}}]
surface: {kind: enneper}
sweep: {r_lo: 0.2, r_hi: 0.8, count: 4}
)");
  ASSERT_EQ(lin.radii.size(), 4u);
  EXPECT_NEAR(lin.radii[1], 0.4, 1e-15);
  const Config lg = parse_config(R"(ambient: {n: 3}
mobius:
  word: [{type: sphere, params: {center: [2, 0, 0], radius: 1}}]
surface: {kind: enneper}
sweep: {r_lo: 0.1, r_hi: 1.0, count: 3, spacing: log}
)");
  ASSERT_EQ(lg.radii.size(), 3u);
  EXPECT_NEAR(lg.radii[1], std::sqrt(0.1), 1e-15);
}

TEST(Config, PiLiterals) {
  const Config cfg = load_config(data_path("catenoid.yaml"));
  ASSERT_TRUE(cfg.surface && cfg.surface->domain);
  EXPECT_DOUBLE_EQ(cfg.surface->domain->lo(0), -std::numbers::pi);
  EXPECT_DOUBLE_EQ(cfg.surface->domain->hi(0), std::numbers::pi);
}

TEST(Config, NamedSigmaARequiresPointInBall) {
  const std::string msg = config_error(R"(ambient: {n: 3}
mobius:
  word: [{type: named_sigma_a, params: {a: [1.5, 0, 0]}}]
surface: {kind: enneper}
sweep: {radii: [0.3]}
)");
  EXPECT_FALSE(msg.empty());
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/dir/config.yaml"), ConfigError);
  EXPECT_EQ(run("sweep", "/nonexistent/dir/config.yaml").code, kExitConfig);
}

TEST(Cli, UnknownCommandIsConfigError) { EXPECT_EQ(run("plot", data_path("flat_disk.yaml")).code, kExitConfig); }

TEST(Cli, DecomposeMirroredWord) {
  const CommandRun r = run("decompose", data_path("mirrored_catenoid.yaml"));
  ASSERT_EQ(r.code, kExitPass) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const auto& dec = j.contains("decomposition") ? j["decomposition"] : j;
  EXPECT_NEAR(dec["b"][2].get<double>(), 3.0, 1e-12);
  EXPECT_NEAR(dec["R"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(dec["psi"]["linear"][0][0].get<double>(), -1.0, 1e-10);
}

TEST(Cli, FixesInfinityExitsWithMathError) {
  const CommandRun r = run("decompose", data_path("fixes_infinity.yaml"));
  EXPECT_EQ(r.code, kExitMath);
  EXPECT_NE(r.err.find("map fixes infinity"), std::string::npos) << r.err;
}

TEST(Cli, OriginPoleExitsWithMathError) {
  const CommandRun r = run("decompose", data_path("origin_pole.yaml"));
  EXPECT_EQ(r.code, kExitMath);
  EXPECT_NE(r.err.find("origin is the pole"), std::string::npos) << r.err;
}

TEST(Cli, DegenerateRadiusIsConfigError) {
  const CommandRun r = run("verify", data_path("degenerate_radius.yaml"), scratch_dir("degenerate").string());
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("degenerate-radius"), std::string::npos) << r.err;
}

TEST(Cli, BallImageListsImages) {
  const CommandRun ok = run("ball-image", data_path("flat_disk.yaml"));
  EXPECT_EQ(ok.code, kExitPass) << ok.err;
  EXPECT_NE(ok.out.find("center"), std::string::npos);
}

TEST(Cli, SweepFlatDisk) {
  const fs::path dir = scratch_dir("sweep_disk");
  const CommandRun r = run("sweep", data_path("flat_disk.yaml"), dir.string());
  ASSERT_EQ(r.code, kExitPass) << r.err;
  std::istringstream csv(read_file(dir / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line,
            "r,s,J,J_err,I,I_err,QA,QI,vol_lhs,vol_rhs,vol_residual,vol_budget,wt_lhs,wt_rhs,wt_residual,wt_budget,"
            "pass");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (line.back() == ',') cols.emplace_back();
    ASSERT_EQ(cols.size(), 17u) << line;
    EXPECT_NEAR(std::stod(cols[2]), std::numbers::pi / 4, 1e-6);
    EXPECT_EQ(cols[16], "true");
    if (rows == 1) EXPECT_TRUE(cols[8].empty());
  }
  EXPECT_EQ(rows, 3);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
}

TEST(Cli, VerifyReportPassFlagsAreConsistent) {
  const fs::path dir = scratch_dir("verify_disk");
  const CommandRun r = run("verify", data_path("flat_disk.yaml"), dir.string());
  ASSERT_EQ(r.code, kExitPass) << r.err << r.out;
  const auto j = nlohmann::json::parse(read_file(dir / "report.json"));
  ASSERT_TRUE(j["checks"].is_array());
  EXPECT_GE(j["checks"].size(), 6u);
  bool all = true;
  for (const auto& c : j["checks"]) {
    ASSERT_TRUE(c["residual"].is_number()) << c.dump();
    const double residual = c["residual"].get<double>();
    const double budget = c["budget"].get<double>();
    const bool within = c["rule"] == "abs(residual) <= budget" ? std::abs(residual) <= budget : residual >= -budget;
    EXPECT_EQ(within, c["pass"].get<bool>()) << c.dump();
    all = all && within;
  }
  EXPECT_EQ(all, j["pass"].get<bool>());
  EXPECT_TRUE(j.contains("decomposition"));
  EXPECT_TRUE(j.contains("timing"));
  EXPECT_TRUE(j.contains("config"));
}

TEST(Cli, VerifyPrescribedPoint) {
  const fs::path dir = scratch_dir("verify_plane");
  const CommandRun r = run("verify", data_path("plane_through_a.yaml"), dir.string());
  ASSERT_EQ(r.code, kExitPass) << r.err << r.out;
  const auto j = nlohmann::json::parse(read_file(dir / "report.json"));
  bool found = false;
  for (const auto& c : j["checks"]) {
    if (c["name"].get<std::string>().find("prescribed") == std::string::npos) continue;
    found = true;
    EXPECT_GE(c["residual"].get<double>(), -c["budget"].get<double>());
    EXPECT_NEAR(c["lhs"].get<double>(), 0.75 * std::numbers::pi, 1e-6);
  }
  EXPECT_TRUE(found);
}

TEST(Cli, VerifySigmaATiltedPlane) {
  const fs::path dir = scratch_dir("verify_sigma_a");
  const CommandRun r = run("verify", data_path("sigma_a_tilted.yaml"), dir.string());
  EXPECT_EQ(r.code, kExitPass) << r.err << r.out;
}

TEST(Cli, SweepIsIndependentOfThreadCount) {
  const fs::path a = scratch_dir("threads_1");
  const fs::path b = scratch_dir("threads_3");
  {
    ThreadsEnv env("1");
    ASSERT_EQ(run("sweep", data_path("flat_disk.yaml"), a.string()).code, kExitPass);
  }
  {
    ThreadsEnv env("3");
    ASSERT_EQ(run("sweep", data_path("flat_disk.yaml"), b.string()).code, kExitPass);
  }
  EXPECT_EQ(read_file(a / "sweep.csv"), read_file(b / "sweep.csv"));
}

TEST(Report, FormatDoubleRoundTrips) {
  for (double v : {0.1, std::numbers::pi, 1e-300, -2.5e17, 6.285932316208}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Report, PassRecomputedFromNumbers) {
  IdentityResidual r;
  r.lhs = 1.0;
  r.rhs = 1.0 + 1e-9;
  r.residual = -1e-9;
  r.budget = 1e-10;
  r.pass = true;  // stale in-memory flag
  EXPECT_FALSE(to_json(from_residual("volume", r))["pass"].get<bool>());
  EXPECT_FALSE(to_json(failed_check("flux", "NonRegularLevel"))["pass"].get<bool>());
}
