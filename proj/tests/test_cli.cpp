#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include "barstab/json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(BARSTAB_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("barstab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string out(const std::string& sub) const { return " --out " + (dir / sub).string(); }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, SpectrumWritesCsvAndManifest) {
  const Result r = run("spectrum --ell 2 --N 10 --nu 1e-3" + out("s"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string csv = slurp(dir / "s" / "spectrum.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "nu,ell,N,variant,rank,re,im");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 22);
  const auto m = nlohmann::json::parse(slurp(dir / "s" / "manifest.json"));
  EXPECT_EQ(m["subcommand"], "spectrum");
  EXPECT_EQ(m["parameters"]["N"], "10");
  EXPECT_TRUE(m.contains("wall_clock_seconds"));
  const std::string digest = m["outputs"]["spectrum.csv"];
  EXPECT_EQ(digest.size(), 64u);
}

TEST_F(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("spectrum --bogus 1" + out("a")).code, 2);
  EXPECT_EQ(run("spectrum --ell 0" + out("b")).code, 2);
  EXPECT_EQ(run("spectrum --variant sideways" + out("c")).code, 2);
  EXPECT_EQ(run("sweep --nus 1e-3,1e-3" + out("d")).code, 2);
  EXPECT_EQ(run("spectrum --config " + (dir / "missing.cfg").string()).code, 2);
  EXPECT_EQ(run("evolve --init random --T 10 --dt 5" + out("e")).code, 2);
}

TEST_F(Cli, InvalidHypoOverridesAreRejected) {
  const Result r = run("hypo --nu 1e-2 --N 64 --alpha0 0.5 --beta0 0.01 --gamma0 100" + out("h"));
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("beta0"), std::string::npos);
  EXPECT_EQ(run("hypo --nu 1e-2 --N 64 --alpha0 0.01" + out("h2")).code, 2);
}

TEST_F(Cli, CheckPassesOnShippedGoldens) {
  const Result r = run("check --golden " + std::string(BARSTAB_GOLDEN_DIR));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, CheckDetectsCorruptedGolden) {
  const fs::path g = dir / "golden";
  fs::create_directories(g);
  for (const auto& e : fs::directory_iterator(BARSTAB_GOLDEN_DIR)) fs::copy(e.path(), g / e.path().filename());
  std::string csv = slurp(g / "bar_full_l2_N8.csv");
  const auto pos = csv.find("0.98113207547169812");
  ASSERT_NE(pos, std::string::npos);
  csv.replace(pos, 19, "0.98113207547269812");
  std::ofstream(g / "bar_full_l2_N8.csv") << csv;
  const Result r = run("check --golden " + g.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("differs"), std::string::npos);
  EXPECT_NE(r.out.find("FAIL cli: golden bar_full_l2_N8.csv"), std::string::npos);
}

TEST_F(Cli, RunsAreByteIdentical) {
  for (const char* sub : {"a", "b"})
    ASSERT_EQ(run("evolve --init random-M --seed 7 --Nx 16 --Ny 3 --nu 1e-2 --T 5 --dt 0.1 --sample-every 10" +
                  out(sub))
                  .code,
              0);
  EXPECT_EQ(slurp(dir / "a" / "diagnostics.csv"), slurp(dir / "b" / "diagnostics.csv"));
  EXPECT_EQ(slurp(dir / "a" / "snapshots" / "field_000001.csv"), slurp(dir / "b" / "snapshots" / "field_000001.csv"));
  const auto ma = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  const auto mb = nlohmann::json::parse(slurp(dir / "b" / "manifest.json"));
  EXPECT_EQ(ma["outputs"], mb["outputs"]);
}

TEST_F(Cli, SingleViscositySweepHasNoFit) {
  ASSERT_EQ(run("sweep --N 10 --nus 1e-3" + out("s")).code, 0);
  EXPECT_TRUE(fs::exists(dir / "s" / "sweep.csv"));
  EXPECT_FALSE(fs::exists(dir / "s" / "fit.csv"));
}

TEST_F(Cli, DiffusiveSweepHasUnitSlope) {
  ASSERT_EQ(run("sweep --N 10 --amp 0" + out("s")).code, 0);
  std::istringstream is(slurp(dir / "s" / "fit.csv"));
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "slope,intercept,max_residual,n_samples");
  EXPECT_NEAR(std::stod(row.substr(0, row.find(','))), 1.0, 1e-12);
}

TEST_F(Cli, CommandLineOverridesConfig) {
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# spectrum settings\nell = 3\nN = 4\nnu = 0.01\n";
  ASSERT_EQ(run("spectrum --config " + cfg.string() + " --N 6" + out("c")).code, 0);
  const auto m = nlohmann::json::parse(slurp(dir / "c" / "manifest.json"));
  EXPECT_EQ(m["parameters"]["N"], "6");
  EXPECT_EQ(m["parameters"]["ell"], "3");
  EXPECT_EQ(m["inputs"].size(), 1u);
  const std::string csv = slurp(dir / "c" / "spectrum.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 14);
}

TEST_F(Cli, MatrixExportRoundTripsThroughCheck) {
  const fs::path g = dir / "g";
  ASSERT_EQ(run("spectrum --operator dipole --N 2 --nu 0.01 --variant symmetrized --matrix-out ../g/d.csv" +
                out("s"))
                .code,
            0);
  EXPECT_TRUE(fs::exists(g / "d.csv.json"));
  const Result r = run("check --golden " + g.string());
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(Cli, HypoWritesReports) {
  const Result r = run("hypo --nu 1e-2 --N 64 --T 100 --dt 0.1" + out("h"));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"constants.csv", "m0.csv", "decay.csv", "phi.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir / "h" / f)) << f;
  const std::string c = slurp(dir / "h" / "constants.csv");
  EXPECT_EQ(c.substr(0, c.find('\n')), "M0,a,ell,alpha0,beta0,gamma0,checks_passed");
}

TEST_F(Cli, NonlinearBarRun) {
  const Result r = run("evolve --solver nonlinear --init bar --Nx 8 --Ny 8 --nu 0.01 --T 0.1 --dt 0.01" + out("n"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string d = slurp(dir / "n" / "diagnostics.csv");
  EXPECT_EQ(d.substr(0, d.find('\n')), "t,l2,x_norm,phi,max_pq,enstrophy,grad_norm_sq");
}
