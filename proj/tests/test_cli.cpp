#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cellhom/cli.hpp"
#include "json.hpp"

using namespace cellhom;
namespace fs = std::filesystem;

namespace {

const std::string kDir = CELLHOM_CONFIG_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cellhom_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HomogenizeHomogeneousCell) {
  const Outcome r = run({"homogenize", kDir + "/homogeneous.json", "--out", path("a.json")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const nlohmann::json j = nlohmann::json::parse(slurp(path("a.json")));
  EXPECT_EQ(j.at("schema"), kResultSchema);
  const auto& d = j.at("geometric_modulus").at("stress_route");
  EXPECT_NEAR(d[0][0].get<double>(), 0.25, 1e-9);
  EXPECT_NEAR(d[0][1].get<double>(), 0.25, 1e-9);
  EXPECT_NEAR(d[1][1].get<double>(), 0.25, 1e-9);
  EXPECT_NEAR(d[2][2].get<double>(), 0.0, 1e-9);
  EXPECT_NEAR(d[0][2].get<double>(), 0.0, 1e-9);
  EXPECT_NE(r.out.find("B*"), std::string::npos);
}

TEST_F(Cli, ResultJsonDeterministicExceptTimestamp) {
  ASSERT_EQ(run({"homogenize", kDir + "/paper_cell.json", "--n", "16", "--out", path("a.json")}).code, cli::kOk);
  ASSERT_EQ(run({"homogenize", kDir + "/paper_cell.json", "--n", "16", "--out", path("b.json")}).code, cli::kOk);
  nlohmann::json a = nlohmann::json::parse(slurp(path("a.json")));
  nlohmann::json b = nlohmann::json::parse(slurp(path("b.json")));
  a.erase("timestamp");
  b.erase("timestamp");
  a["config"]["output"].erase("json");
  b["config"]["output"].erase("json");
  a.erase("config_hash");
  b.erase("config_hash");
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_FALSE(fs::exists(path("a.json.tmp")));
}

TEST_F(Cli, HomogenizeWritesVtk) {
  ASSERT_EQ(run({"homogenize", kDir + "/square_cell.json", "--n", "8", "--out", path("s.json"), "--vtk", path("s.vtk")}).code,
            cli::kOk);
  const std::string vtk = slurp(path("s.vtk"));
  EXPECT_NE(vtk.find("_e11"), std::string::npos);
  EXPECT_NE(vtk.find("_g12"), std::string::npos);
}

TEST_F(Cli, SweepTables) {
  const Outcome r = run({"sweep", kDir + "/paper_cell.json", "--n", "16", "--nu-list", "0.2", "--out", path("p")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const std::string spread = slurp(path("p_spread.csv"));
  EXPECT_EQ(spread.rfind("sweep,runs,", 0), 0u) << spread;
  EXPECT_NE(spread.find(",1,0,0,0,0,0,0,0"), std::string::npos) << spread;
  std::istringstream stiff(slurp(path("p_stiffness.csv")));
  std::string line;
  int rows = 0;
  while (std::getline(stiff, line)) ++rows;
  EXPECT_EQ(rows, 7);
}

TEST_F(Cli, SweepDefaultList) {
  const Outcome r = run({"sweep", kDir + "/paper_cell.json", "--n", "8", "--out", path("d")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::istringstream header(slurp(path("d_geometric.csv")));
  std::string line;
  std::getline(header, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
}

TEST_F(Cli, SweepKgGrid) {
  const Outcome r = run({"sweep", kDir + "/paper_cell.json", "--n", "8", "--kg-grid", "--out", path("g")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::string line;
  std::istringstream grid(slurp(path("g_kg.csv")));
  int rows = 0;
  while (std::getline(grid, line)) ++rows;
  EXPECT_EQ(rows, 10);
}

TEST_F(Cli, SweepRejectsMultiPhase) {
  EXPECT_EQ(run({"sweep", kDir + "/two_phase.json", "--n", "8", "--out", path("t")}).code, cli::kUsage);
}

TEST_F(Cli, PaperExampleCoarseWarns) {
  const Outcome r = run({"paper-example", "--n", "8", "--csv", path("pe")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE((r.out + r.err).find("warning"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("pe_stiffness.csv")));
  EXPECT_TRUE(fs::exists(path("pe_geometric.csv")));
}

TEST_F(Cli, MeshInfo) {
  const Outcome r = run({"mesh-info", kDir + "/homogeneous.json", "--vtk", path("m.vtk")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("64"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("m.vtk")));
}

TEST_F(Cli, VerifyQuick) {
  const Outcome ok = run({"verify", "--level", "quick", "--quiet", "--out", path("v.json")});
  EXPECT_EQ(ok.code, cli::kOk) << ok.out;
  EXPECT_TRUE(nlohmann::json::parse(slurp(path("v.json"))).at("passed").get<bool>());
  const Outcome bad = run({"verify", "--level", "quick", "--quiet", "--mutate-shift"});
  EXPECT_EQ(bad.code, cli::kVerifyFailed);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"homogenize"}).code, cli::kUsage);
  EXPECT_EQ(run({"homogenize", kDir + "/homogeneous.json", "--n", "4"}).code, cli::kUsage);
  EXPECT_EQ(run({"verify", "--level", "medium"}).code, cli::kUsage);
  const Outcome missing = run({"homogenize", path("nothing.json")});
  EXPECT_EQ(missing.code, cli::kUsage);
  EXPECT_NE(missing.err.find("cannot read"), std::string::npos);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST_F(Cli, BadConfigNamesField) {
  std::ofstream(path("bad.json")) << R"({"schema": "cellhom-config/1", "geometry": {"l1": 2, "l2": 1, "holes": [{"type": "circle", "center": [1, 0.5]}]}})";
  const Outcome r = run({"homogenize", path("bad.json")});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("geometry.holes[0].radius"), std::string::npos) << r.err;
}

TEST(CliTables, LayoutFromSweep) {
  const Mesh m = generate(square_cell(1.0, 0.0), 8);
  const SweepResult s = moduli_sweep(m, {IsotropicModuli(1, 1), IsotropicModuli(2, 0.5)});
  const std::string csv = cli::stiffness_table_csv({0.1, 0.2}, s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("entry"), 0u) << csv;
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  const std::string grid = cli::kg_grid_csv(s);
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 3);
}
