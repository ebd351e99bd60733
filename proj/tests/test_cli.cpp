#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "autogmap/autogmap.hpp"
#include "oracles.hpp"

namespace autogmap {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("autogmap_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  Result run(const std::string& args) const {
    const std::string err = path("stderr.txt");
    const std::string cmd = std::string(AUTOGMAP_CLI_PATH) + " " + args + " 2>" + err;
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, slurp(err)};
  }

  fs::path dir_;
};

TEST_F(Cli, BaselinePrintsVanillaArea) {
  const auto m = write("m22.mtx", to_matrix_market(testing::half_covered_22()));
  const auto r = run("baseline --input " + m + " --block 4");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["eval"]["area"].get<double>(), 0.174, 0.0005);
  EXPECT_EQ(scheme_from_json(j["scheme"]).diagonal_sizes(), (std::vector<Index>{4, 4, 4, 4, 4, 2}));
  const auto f = run("baseline --input " + m + " --block 6 --fill 6");
  ASSERT_EQ(f.code, 0);
  EXPECT_NEAR(nlohmann::json::parse(f.out)["eval"]["area"].get<double>(), 0.620, 0.002);
}

TEST_F(Cli, EvalDimensionMismatch) {
  const auto m = write("m8.mtx", to_matrix_market(testing::fixture_m8()));
  const auto s = write("s.json", to_json(scheme_from_sizes(10, {5, 5})).dump());
  const auto r = run("eval --input " + m + " --scheme " + s + " --alpha 0.8");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: dimension mismatch", 0), 0u) << r.err;
}

TEST_F(Cli, EvalMatchesLibrary) {
  const auto mat = testing::fixture_m8();
  const auto m = write("m8.mtx", to_matrix_market(mat));
  auto scheme = scheme_from_sizes(8, {2, 2, 2, 2});
  add_fill(scheme, 1, 1);
  const auto s = write("s.json", to_json(scheme).dump());
  const auto r = run("eval --input " + m + " --scheme " + s + " --alpha 0.8");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::ordered_json::parse(r.out), to_json(evaluate(scheme, PrefixIndex(mat), 0.8)));
}

TEST_F(Cli, OperationalErrors) {
  EXPECT_EQ(run("eval --input /nonexistent.mtx --scheme /nonexistent.json").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  const auto r = run("baseline --bogus 1");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error:", 0), 0u);
  const auto bad = write("bad.mtx", "%%MatrixMarket matrix coordinate real general\n3 4 1\n1 1 1\n");
  const auto p = run("baseline --input " + bad + " --block 2");
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.err.find("line 2"), std::string::npos) << p.err;
}

TEST_F(Cli, ReorderWritesMatrixAndPermutation) {
  const auto banded = synth_banded(30, 2, 0.8, 1);
  const auto shuffled = permute_matrix(banded, testing::random_permutation(30, 4));
  const auto in = write("in.mtx", to_matrix_market(shuffled));
  const auto r = run("reorder --input " + in + " --perm-out " + path("p.json") + " --out " + path("out.mtx"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("bandwidth before: " + std::to_string(bandwidth(shuffled))), std::string::npos);
  const auto p = permutation_from_json(nlohmann::json::parse(slurp(path("p.json"))));
  EXPECT_EQ(p, rcm_order(shuffled));
  EXPECT_EQ(parse_matrix_market(slurp(path("out.mtx"))), permute_matrix(shuffled, p));
  EXPECT_TRUE(fs::exists(path("out.mtx.config.json")));
  const auto asym = write("asym.mtx", to_matrix_market(SparseMatrix(3, {{0, 1, 1.0}})));
  EXPECT_EQ(run("reorder --input " + asym + " --perm-out " + path("q.json") + " --out " + path("q.mtx")).code, 2);
}

TEST_F(Cli, TrainIsDeterministicAndRoundTrips) {
  const auto mat = testing::fixture_m8();
  const auto m = write("m8.mtx", to_matrix_market(mat));
  const std::string common = "train --input " + m + " --grid 2 --grades 3 --alpha 0.8 --epochs 3000 --seed 5";
  const auto a = run(common + " --scheme-out " + path("a.json") + " --curves-out " + path("a.csv"));
  const auto b = run(common + " --scheme-out " + path("b.json") + " --curves-out " + path("b.csv"));
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  const auto scheme = scheme_from_json(nlohmann::json::parse(slurp(path("a.json"))));
  EXPECT_EQ(to_json(scheme).dump(2) + "\n", slurp(path("a.json")));
  EXPECT_EQ(evaluate(scheme, PrefixIndex(mat), 0.8).coverage, 1.0);
  const auto config = nlohmann::json::parse(slurp(path("a.json.config.json")));
  EXPECT_EQ(config["command"], "train");
  EXPECT_EQ(config["options"]["epochs"], "3000");
  EXPECT_EQ(config["options"]["lr"], "0.001");
}

TEST_F(Cli, TrainCheckpointResumes) {
  const auto m = write("m8.mtx", to_matrix_market(testing::fixture_m8()));
  const std::string common = "train --input " + m + " --grid 2 --grades 3 --epochs 200 --curves-out " + path("c.csv");
  ASSERT_EQ(run(common + " --scheme-out " + path("s.json") + " --checkpoint-out " + path("ck.json")).code, 0);
  const auto ck = agent_from_json(nlohmann::json::parse(slurp(path("ck.json"))));
  EXPECT_EQ(ck.shape.n_steps, 3u);
  EXPECT_EQ(run(common + " --scheme-out " + path("t.json") + " --init-checkpoint " + path("ck.json")).code, 0);
}

TEST_F(Cli, TrainWithoutCompleteSchemeExitsThree) {
  // one epoch on a dense matrix: only the all-continue sample would cover it
  std::vector<Entry> dense;
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j) dense.push_back({i, j, 1.0});
  const auto m = write("dense.mtx", to_matrix_market(SparseMatrix(12, dense)));
  const auto r = run("train --input " + m + " --grid 1 --grades 2 --epochs 1 --seed 0 --scheme-out " + path("s.json") + " --curves-out " +
                     path("c.csv"));
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(fs::exists(path("s.json")));
}

TEST_F(Cli, OracleReportsBest) {
  const auto m = write("m8.mtx", to_matrix_market(testing::fixture_m8()));
  const auto r = run("oracle --input " + m + " --grid 2 --grades 3 --alpha 0.8");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["enumerated_count"], 64);
  EXPECT_EQ(scheme_from_json(j["scheme"]).block_area(), 18u);
  EXPECT_EQ(run("oracle --input " + m + " --grid 1 --grades 6 --cap 100").code, 2);
}

TEST_F(Cli, VerifyCompleteAndIncomplete) {
  const auto m = write("m8.mtx", to_matrix_market(testing::with_random_values(testing::fixture_m8(), 2)));
  auto complete = scheme_from_sizes(8, {2, 2, 2, 2});
  add_fill(complete, 1, 1);
  const auto good = run("verify --input " + m + " --scheme " + write("good.json", to_json(complete).dump()) + " --trials 10 --seed 3");
  ASSERT_EQ(good.code, 0) << good.err;
  const auto j = nlohmann::json::parse(good.out);
  EXPECT_LT(j["max_relative_error"].get<double>(), 1e-10);
  const auto bad =
      run("verify --input " + m + " --scheme " + write("bad.json", to_json(scheme_from_sizes(8, {2, 2, 2, 2})).dump()) + " --trials 10 --seed 3");
  EXPECT_EQ(bad.code, 3);
}

TEST_F(Cli, RenderIsWellFormedSvgWithOneRectPerBlock) {
  const auto mat = testing::fixture_m8();
  const auto m = write("m8.mtx", to_matrix_market(mat));
  auto scheme = scheme_from_sizes(8, {2, 2, 2, 2});
  add_fill(scheme, 1, 1);
  const auto s = write("s.json", to_json(scheme).dump());
  ASSERT_EQ(run("render --input " + m + " --scheme " + s + " --out " + path("map.svg")).code, 0);
  const auto svg = slurp(path("map.svg"));
  std::size_t rects = 0, circles = 0;
  for (std::size_t pos = 0; (pos = svg.find("<rect class=", pos)) != std::string::npos; ++pos) ++rects;
  for (std::size_t pos = 0; (pos = svg.find("<circle", pos)) != std::string::npos; ++pos) ++circles;
  EXPECT_EQ(rects, scheme.blocks().size());
  EXPECT_EQ(circles, mat.nnz());
  if (std::system("command -v xmllint >/dev/null 2>&1") == 0) {
    EXPECT_EQ(std::system(("xmllint --noout " + path("map.svg")).c_str()), 0);
  }
  ASSERT_EQ(run("render --input " + m + " --scheme " + s + " --out " + path("again.svg")).code, 0);
  EXPECT_EQ(slurp(path("again.svg")), svg);
}

TEST_F(Cli, TilesManifest) {
  const auto s = write("s.json", to_json(scheme_from_sizes(82, {82})).dump());
  const auto r = run("tiles --scheme " + s + " --crossbar 32 --out " + path("tiles.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("tiles.json")));
  EXPECT_EQ(j["totals"]["tiles"], 9);
  EXPECT_EQ(j["totals"]["occupied"], 82 * 82);
  EXPECT_EQ(j["tiles"].size(), 9u);
}

}  // namespace
}  // namespace autogmap
