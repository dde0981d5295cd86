#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "sparse_tcp/oracle.hpp"
#include "support.hpp"

namespace sparse_tcp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "sparse-tcp");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sparse_tcp_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static json read_json(const std::string& p) {
    std::ifstream in(p);
    return json::parse(in);
  }

  fs::path dir_;
};

TEST_F(CliTest, GenRoundTrips) {
  const std::string p = path("inst.json");
  ASSERT_EQ(run({"gen", "--kind", "z_feasible", "--n", "4", "--m", "3", "--seed", "7", "-o", p}).code, 0);
  const Instance a = load_instance(p);
  const Instance b = gen_instance(InstanceKind::kZFeasible, 4, 3, 7);
  EXPECT_EQ(a.A.entries(), b.A.entries());
  EXPECT_EQ(a.q, b.q);
}

TEST_F(CliTest, GenExampleInstance) {
  const std::string p = path("ex.json");
  ASSERT_EQ(run({"gen", "--kind", "paper_example", "-o", p}).code, 0);
  const Instance a = load_instance(p);
  EXPECT_EQ(a.A.entries(), gen_instance(InstanceKind::kPaperExample, 0, 0, 0).A.entries());
  EXPECT_EQ(a.source, InstanceSource::kPaperExample);
}

TEST_F(CliTest, GenDiagonalIsZ) {
  const CliRun r = run({"gen", "--kind", "diagonal", "--n", "2", "--m", "3", "--seed", "1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(is_z_tensor(instance_from_json(r.out).A));
}

TEST_F(CliTest, GenBadArguments) {
  EXPECT_EQ(run({"gen", "--kind", "bogus"}).code, 2);
  EXPECT_EQ(run({"gen"}).code, 2);
  EXPECT_EQ(run({"gen", "--kind", "random", "--n", "0"}).code, 2);
  EXPECT_EQ(run({"gen", "--kind", "random", "--n", "abc"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST_F(CliTest, SolvePlantedExitsZero) {
  const std::string p = path("inst.json"), o = path("sol.json");
  save_instance(gen_instance(InstanceKind::kZFeasible, 4, 3, 3, {1}), p);
  const CliRun r = run({"solve", p, "-o", o, "--no-timestamp"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = read_json(o);
  EXPECT_EQ(rep["schema"], "sparse-tcp/1");
  EXPECT_EQ(rep["report"]["card"], 1);
  EXPECT_TRUE(rep["report"]["converged"].get<bool>());
  EXPECT_EQ(rep["options"]["steps"], 12);
  EXPECT_FALSE(rep.contains("generated_at"));
  for (const char* k : {"u_final", "support", "residuals", "L_used", "f_history", "t_history"}) {
    EXPECT_TRUE(rep["report"].contains(k)) << k;
  }
}

TEST_F(CliTest, SolveLargeT0SingleStepGivesZero) {
  const std::string p = path("inst.json");
  const Instance inst = gen_instance(InstanceKind::kZFeasible, 2, 3, 5, {1});
  save_instance(inst, p);
  const CliRun r = run({"solve", p, "--t0", "10", "--steps", "1", "--no-timestamp"});
  const json rep = json::parse(r.out);
  EXPECT_EQ(rep["report"]["u_final"], json::array({0.0, 0.0}));
  EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, SolveErrors) {
  EXPECT_EQ(run({"solve", path("missing.json")}).code, 2);
  const std::string bad = path("bad.json");
  std::ofstream(bad) << "{\"m\": 2,";
  const CliRun r = run({"solve", bad});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("parse error"), std::string::npos);
  const std::string p = path("inst.json");
  save_instance(gen_instance(InstanceKind::kDiagonal, 2, 3, 1), p);
  EXPECT_EQ(run({"solve", p, "--set", "nonsense=1"}).code, 2);
  EXPECT_EQ(run({"solve", p, "--set", "t0"}).code, 2);
  EXPECT_EQ(run({"solve", p, "--set", "t0=-1"}).code, 2);
  EXPECT_EQ(run({"solve", p, "--format", "xml"}).code, 2);
}

TEST_F(CliTest, SolveOverridesRecorded) {
  const std::string p = path("inst.json");
  save_instance(gen_instance(InstanceKind::kDiagonal, 2, 3, 1), p);
  const CliRun r = run({"solve", p, "--set", "steps=3", "--set", "eps0=0.5", "--no-timestamp"});
  ASSERT_EQ(r.code, 0);
  const json rep = json::parse(r.out);
  EXPECT_EQ(rep["options"]["steps"], 3);
  EXPECT_EQ(rep["options"]["eps0"], 0.5);
  EXPECT_EQ(rep["report"]["t_history"].size(), 3u);
}

TEST_F(CliTest, SolveCsvHistory) {
  const std::string p = path("inst.json");
  save_instance(gen_instance(InstanceKind::kZFeasible, 3, 3, 2), p);
  const CliRun r = run({"solve", p, "--format", "csv"});
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,t,f,lp");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 12);
}

TEST_F(CliTest, SolveDeterministic) {
  const std::string p = path("inst.json");
  save_instance(gen_instance(InstanceKind::kZFeasible, 4, 3, 8), p);
  const CliRun a = run({"solve", p, "--no-timestamp"});
  const CliRun b = run({"solve", p, "--no-timestamp"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(a.out.empty());
}

TEST_F(CliTest, OracleDiagonalMinusOnes) {
  const std::string p = path("d.json");
  save_instance(testing::diagonal_minus_ones(3, 3), p);
  const CliRun r = run({"oracle", p, "--no-timestamp"});
  ASSERT_EQ(r.code, 0);
  const json rep = json::parse(r.out);
  EXPECT_EQ(rep["result"]["min_card"], 3);
  EXPECT_TRUE(rep["is_z_tensor"].get<bool>());
  EXPECT_EQ(rep["least_element"]["u"].size(), 3u);
}

TEST_F(CliTest, OraclePlantedCardOne) {
  const std::string p = path("inst.json");
  save_instance(gen_instance(InstanceKind::kZFeasible, 4, 3, 12, {1}), p);
  const CliRun r = run({"oracle", p, "--least-element", "--p", "0.5,0.25", "--no-timestamp"});
  ASSERT_EQ(r.code, 0);
  const json rep = json::parse(r.out);
  EXPECT_EQ(rep["result"]["min_card"], 1);
  EXPECT_EQ(rep["result"]["minimal_lp"].size(), 2u);
  EXPECT_TRUE(rep["least_element"]["oracle_agrees"].get<bool>());
}

TEST_F(CliTest, OracleGuards) {
  const std::string p = path("ex.json");
  save_instance(gen_instance(InstanceKind::kPaperExample, 0, 0, 0), p);
  const CliRun r = run({"oracle", p, "--least-element"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("not a Z-tensor"), std::string::npos);
  EXPECT_EQ(run({"oracle", p}).code, 0);
  const std::string big = path("big.json");
  save_instance(testing::diagonal_minus_ones(9, 2), big);
  EXPECT_EQ(run({"oracle", big}).code, 2);
  EXPECT_EQ(run({"oracle", p, "--p", "1.5"}).code, 2);
}

TEST_F(CliTest, VerifyOracleSolutionAndPerturbation) {
  const std::string p = path("inst.json"), o = path("or.json");
  const Instance inst = gen_instance(InstanceKind::kZFeasible, 3, 3, 4);
  save_instance(inst, p);
  ASSERT_EQ(run({"oracle", p, "-o", o}).code, 0);
  EXPECT_EQ(run({"verify", p, "--u-file", o}).code, 0);

  const Vector u = *brute_force_sparse(inst).sparse_solution;
  testing::Gen g(9);
  std::ostringstream list;
  for (int i = 0; i < 3; ++i) list << (i ? "," : "") << u[i] + g.uniform(-1e-2, 1e-2) + (i == 0 ? 1e-2 : 0);
  const CliRun r = run({"verify", p, "--u", list.str(), "--no-timestamp"});
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(json::parse(r.out)["pass"].get<bool>());
}

TEST_F(CliTest, VerifyArgumentErrors) {
  const std::string p = path("d.json");
  save_instance(testing::diagonal_minus_ones(2, 3), p);
  EXPECT_EQ(run({"verify", p}).code, 2);
  EXPECT_EQ(run({"verify", p, "--u", "1,x"}).code, 2);
  EXPECT_EQ(run({"verify", p, "--u", "1,1,1"}).code, 2);
  EXPECT_EQ(run({"verify", p, "--u", "1,1"}).code, 0);
  EXPECT_EQ(run({"verify", p, "--u-file", path("nope.json")}).code, 2);
}

TEST_F(CliTest, ExampleReport) {
  const CliRun a = run({"example", "--no-timestamp"});
  ASSERT_EQ(a.code, 0);
  const json rep = json::parse(a.out);
  EXPECT_EQ(rep["schema"], "sparse-tcp/1");
  ASSERT_EQ(rep["family"].size(), 5u);
  for (const json& row : rep["family"]) EXPECT_LT(row["identity_residual"].get<double>(), 1e-12);
  EXPECT_NE(a.out.find("T_{3,2}"), std::string::npos);
  EXPECT_NE(a.out.find("component 3"), std::string::npos);
  ASSERT_EQ(rep["readings"].size(), 2u);
  EXPECT_EQ(rep["readings"][0]["candidate"], json::array({1.0, 0.0, 0.0}));
  for (const json& reading : rep["readings"]) {
    for (const json& s : reading["oracle"]["solutions"]) {
      EXPECT_LE(s["residuals"]["feas_w"].get<double>(), 1e-8);
      EXPECT_LE(s["residuals"]["comp"].get<double>(), 1e-8);
    }
  }
  EXPECT_EQ(run({"example", "--no-timestamp"}).out, a.out);
}

TEST_F(CliTest, ExampleCsvAndTable) {
  const CliRun c = run({"example", "--format", "csv"});
  EXPECT_EQ(c.code, 0);
  EXPECT_EQ(c.out.rfind("a,x1,x2,x3,identity_residual", 0), 0u);
  const CliRun t = run({"example", "-o", path("ex.json")});
  EXPECT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("notes:"), std::string::npos);
  EXPECT_TRUE(read_json(path("ex.json")).contains("generated_at"));
}

TEST_F(CliTest, BenchRows) {
  const CliRun r = run({"bench", "--count", "50", "--no-timestamp"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "label,n,m,solver_card,oracle_card,fb_norm,wall_time");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 50);
  EXPECT_EQ(run({"bench", "--count", "50", "--no-timestamp"}).out, r.out);
  EXPECT_EQ(run({"bench", "--count", "0"}).code, 2);
}

TEST_F(CliTest, ProcessExitCodes) {
  const std::string bin = SPARSE_TCP_BIN;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(bin + " --help"), 0);
  EXPECT_EQ(status(bin + " solve " + path("missing.json")), 2);
  EXPECT_EQ(status(bin + " example --no-timestamp"), 0);
}

}  // namespace
}  // namespace sparse_tcp
