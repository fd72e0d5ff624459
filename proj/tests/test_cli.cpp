#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string(TRAJSYNTH_CLI) + " " + args + " 2>&1";
  CliRun r;
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
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("trajsynth_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  std::string gen(const std::string& scenario, const std::string& name, const std::string& extra = "") {
    const CliRun r = cli("gen --scenario " + scenario + " --pos 15 --neg 30 --min-len 16 --max-len 24 --seed 2 -o " +
                      path(name) + " " + extra);
    EXPECT_EQ(r.code, 0) << r.out;
    return path(name);
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, HelpExitsZero) {
  const CliRun r = cli("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("synth"), std::string::npos);
}

TEST_F(Cli, GenIsDeterministicPerSeed) {
  const std::string a = gen("lane-turn", "a.json"), b = gen("lane-turn", "b.json");
  EXPECT_EQ(slurp(a), slurp(b));
  const std::string c = gen("lane-turn", "c.csv");
  EXPECT_NE(slurp(c).find("# "), std::string::npos);
  const json d = json::parse(slurp(a));
  EXPECT_EQ(d["trajectories"].size(), 45u);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("gen --scenario bogus -o " + path("x.json")).code, 2);
  EXPECT_EQ(cli("gen -o " + path("x.json")).code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  const std::string d = gen("lane-turn", "d.json");
  EXPECT_EQ(cli("eval --dataset " + d + " --task lane-turn --query \"Any ; ; None\"").code, 2);
  EXPECT_EQ(cli("eval --dataset " + d + " --task lane-turn --query \"VelGt[?](A)\"").code, 2);
  EXPECT_EQ(cli("eval --dataset " + d + " --task lane-turn --query Nope").code, 2);
}

TEST_F(Cli, RuntimeErrorsExitThree) {
  EXPECT_EQ(cli("eval --dataset " + path("missing.json") + " --query Any").code, 3);
  std::ofstream(path("bad.json")) << "{\"trajectories\": 3}";
  EXPECT_EQ(cli("eval --dataset " + path("bad.json") + " --query Any").code, 3);
  const std::string d = gen("lane-turn", "d.json");
  const CliRun r = cli("synth --dataset " + d + " --task lane-turn --init-pos 100 --oracle labels");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("too few"), std::string::npos);
}

TEST_F(Cli, EvalScoresReferenceAndEmptyQueries) {
  const std::string d = gen("lane-turn", "d.json");
  const CliRun truth = cli("eval --dataset " + d + " --task lane-turn --query \"InRegion_1(A) ; Any ; InRegion_2(A)\"");
  ASSERT_EQ(truth.code, 0) << truth.out;
  EXPECT_DOUBLE_EQ(json::parse(truth.out)["f1"].get<double>(), 1.0);
  EXPECT_EQ(json::parse(truth.out)["matched"].size(), 15u);
  const CliRun none = cli("eval --dataset " + d + " --task lane-turn --query None");
  ASSERT_EQ(none.code, 0);
  EXPECT_DOUBLE_EQ(json::parse(none.out)["f1"].get<double>(), 0.0);
}

TEST_F(Cli, SynthZeroStepsRunsOneRound) {
  const std::string d = gen("lane-turn", "d.json");
  const CliRun r = cli("synth --dataset " + d + " --task lane-turn --steps 0 --oracle labels --result " + path("r.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const json t = json::parse(r.out);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0]["round"], 0);
  EXPECT_TRUE(json::parse(slurp(path("r.json"))).is_array());
}

TEST_F(Cli, SynthWithLabelsFileMatchesDatasetLabels) {
  const std::string d = gen("lane-follow", "d.json");
  const json data = json::parse(slurp(d));
  json labels = json::object();
  for (const auto& t : data["trajectories"]) labels[t["id"].get<std::string>()] = t["label"];
  std::ofstream(path("labels.json")) << labels.dump();
  const std::string base = "synth --dataset " + d + " --task lane-follow --steps 3 --init-pos 2 --init-neg 3 ";
  const CliRun from_file = cli(base + "--oracle " + path("labels.json"));
  const CliRun from_data = cli(base + "--oracle labels");
  const CliRun from_truth = cli(base + "--oracle truth");
  ASSERT_EQ(from_file.code, 0) << from_file.out;
  EXPECT_EQ(from_file.out, from_data.out);
  EXPECT_EQ(from_file.out, from_truth.out);
  EXPECT_GE(json::parse(from_file.out).size(), 2u);
}

TEST_F(Cli, BenchWritesRowsForBothMethods) {
  const CliRun r = cli("bench --task lane-turn --seed 1 --pos 6 --neg 12 --budget 5 -o " + path("b.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const json b = json::parse(slurp(path("b.json")));
  ASSERT_EQ(b["rows"].size(), 2u);
  EXPECT_EQ(b["rows"][0]["method"], "quant");
  EXPECT_EQ(b["rows"][1]["method"], "bsearch");
  EXPECT_TRUE(b["identical_classifications"].get<bool>());
}

TEST_F(Cli, ServeOnBusyPortExitsFour) {
  httplib::Server holder;
  const int port = holder.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  const std::string d = gen("lane-turn", "d.json");
  const CliRun r = cli("serve --dataset " + d + " --task lane-turn --host 127.0.0.1 --port " + std::to_string(port));
  EXPECT_EQ(r.code, 4) << r.out;
}
