#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "cogforest/feature_io.hpp"
#include "cogforest/forest.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(COGFOREST_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) { return oracle::read_file(p.string()); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("cogforest_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  // Small noisy toy set in <dir>/s.
  void synth() { ASSERT_EQ(run("synth --class-sizes 120,40 --heldout-per-cell 20 --noise 0.1 --out-dir " + p("s")).code, 0); }

  fs::path dir_;
};

std::string fixture(const std::string& name) { return oracle::fixture_path(name); }

}  // namespace

TEST_F(Cli, HelpListsEveryFlag) {
  const auto r = run("train --help");
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--heldout", "--plus", "--loss", "--warmup", "--epochs", "--refresh", "--envs", "--alpha",
                           "--lr", "--batch", "--seed", "--margin", "--n-min", "--n-d", "--n-l", "--p-d", "--d-rd",
                           "--d-rn", "--metric", "--leader-radius", "--feature-dim", "--out-dir", "--config"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("build " + fixture("planted_outliers.csv") + " --d-rd 1 --d-rn 1 --bogus").code, 2);
  EXPECT_EQ(run("build " + fixture("planted_outliers.csv") + " --d-rn 1").code, 2);
  EXPECT_EQ(run("build " + p("missing.csv") + " --d-rd 1 --d-rn 1").code, 2);
  EXPECT_EQ(run("build " + fixture("planted_outliers.csv") + " --d-rd 0 --d-rn 1").code, 2);
  EXPECT_EQ(run("build " + fixture("planted_outliers.csv") + " --d-rd 1 --d-rn 1 --metric taxicab").code, 2);
  EXPECT_EQ(run("weights " + fixture("three_path_forest.json") + " --q-attr 1.5").code, 2);
  EXPECT_EQ(run("noise " + fixture("three_path_forest.json") + " --features " + fixture("planted_outliers.csv")).code, 2);
  EXPECT_EQ(run("train " + fixture("planted_outliers.csv") + " --out-dir " + p("t")).code, 2);  // one class
}

TEST_F(Cli, BuildIsDeterministicAndRoundTrips) {
  synth();
  const std::string base = "build " + p("s/train.csv") + " --d-rd 3 --d-rn 1 --base-multiples --out-dir ";
  const auto a = run(base + p("a"));
  const auto b = run(base + p("b"));
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  for (const char* f : {"forest_0.json", "forest_1.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f));
  }
  EXPECT_NE(a.out.find("\"trees\""), std::string::npos);
  EXPECT_NE(a.out.find("\"class\":1"), std::string::npos);
}

TEST_F(Cli, BuiltForestsReloadIdentically) {
  synth();
  ASSERT_EQ(run("build " + p("s/train.csv") + " --d-rd 3 --d-rn 1 --base-multiples --out-dir " + p("f")).code, 0);
  const auto x = cogforest::read_features(p("s/train.csv"));
  const auto lib = cogforest::build_forests(
      x, cogforest::ClfParams{cogforest::Radius::multiple(3.0), cogforest::Radius::multiple(1.0)});
  for (const auto& f : lib) {
    const std::string text = slurp(dir_ / "f" / ("forest_" + std::to_string(f.class_label()) + ".json"));
    const auto loaded = cogforest::forest_from_json(text);
    EXPECT_EQ(loaded, f);
    EXPECT_EQ(cogforest::forest_to_json(loaded), text);
  }
}

TEST_F(Cli, TwoBlobsGiveTwoTrees) {
  std::ofstream(p("blobs.csv")) << "id,label,f0\na,0,0\nb,0,0.1\nc,0,0.2\nd,0,10\ne,0,10.1\n";
  const auto r = run("build " + p("blobs.csv") + " --d-rd 0.5 --d-rn 0.15 --out-dir " + p("f"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"trees\":2"), std::string::npos) << r.out;
}

TEST_F(Cli, SingleSampleClass) {
  std::ofstream(p("one.csv")) << "id,label,f0,f1\nonly,3,1.5,2.5\n";
  const auto r = run("build " + p("one.csv") + " --d-rd 1 --d-rn 0.5 --out-dir " + p("f"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"trees\":1"), std::string::npos);
  const auto w = run("weights " + p("f/forest_3.json") + " --q-attr 0.5");
  EXPECT_EQ(w.code, 0);
  EXPECT_EQ(w.out, "id,weight\nonly,1\n");
}

TEST_F(Cli, ThreePathRawWeight) {
  const auto r = run("weights " + fixture("three_path_forest.json") + " --q-attr 0 --raw");
  ASSERT_EQ(r.code, 0);
  // The fixture root carries 13/180 before normalization at q = 0.
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "id,weight");
  bool found = false;
  while (std::getline(in, line)) {
    const double w = std::stod(line.substr(line.find(',') + 1));
    found = found || std::abs(w - 13.0 / 180.0) < 1e-12;
  }
  EXPECT_TRUE(found);
  const auto norm = run("weights " + fixture("three_path_forest.json") + " --q-attr 0");
  std::istringstream nin(norm.out);
  std::getline(nin, line);
  double sum = 0.0;
  while (std::getline(nin, line)) sum += std::stod(line.substr(line.find(',') + 1));
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST_F(Cli, WeightsRejectMismatchedFeatures) {
  synth();
  ASSERT_EQ(run("build " + p("s/train.csv") + " --d-rd 3 --d-rn 1 --base-multiples --out-dir " + p("f")).code, 0);
  const auto ok = run("weights " + p("f/forest_0.json") + " " + p("f/forest_1.json") +
                      " --q-cls 0.5 --q-attr 0.5 --features " + p("s/train.csv"));
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(run("weights " + p("f/forest_0.json") + " --q-attr 0.5 --features " + p("s/heldout.csv")).code, 2);
  EXPECT_EQ(run("weights " + p("f/forest_0.json") + " " + p("f/forest_1.json") + " --q-attr 0.5").code, 2);
}

TEST_F(Cli, NoisePlantedOutliers) {
  const std::string x = fixture("planted_outliers.csv");
  ASSERT_EQ(run("build " + x + " --d-rd 3 --d-rn 1 --base-multiples --out-dir " + p("f")).code, 0);
  const std::string base = "noise " + p("f/forest_0.json") + " --features " + x + " --n-min 2 --n-l 0 ";
  const auto r = run(base + "--p-d 0.1");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "id,reason,density_percentile");
  std::set<std::string> ids;
  while (std::getline(in, line)) ids.insert(line.substr(0, line.find(',')));
  EXPECT_EQ(ids, (std::set<std::string>{"out0", "out1", "out2", "out3", "out4"}));

  ASSERT_EQ(run(base + "--p-d 0 --out " + p("empty.csv")).code, 0);
  EXPECT_EQ(slurp(p("empty.csv")), "id,reason,density_percentile\n");
}

TEST_F(Cli, TrainDeterministicAndConfigOverride) {
  synth();
  const std::string base = "train " + p("s/train.csv") + " --heldout " + p("s/heldout.csv") + " --plus ";
  std::ofstream(p("cfg.txt")) << "# toy\nepochs = 2\nwarmup=1\nbatch = 16\n";
  ASSERT_EQ(run(base + "--config " + p("cfg.txt") + " --out-dir " + p("a")).code, 0);
  ASSERT_EQ(run(base + "--config " + p("cfg.txt") + " --out-dir " + p("b")).code, 0);
  for (const char* f : {"model.json", "history.jsonl", "noise.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
  EXPECT_EQ(lines(slurp(dir_ / "a" / "history.jsonl")), 3);

  // Flags after the file win.
  ASSERT_EQ(run(base + "--config " + p("cfg.txt") + " --epochs 3 --out-dir " + p("c")).code, 0);
  EXPECT_EQ(lines(slurp(dir_ / "c" / "history.jsonl")), 4);

  std::ofstream(p("bad.txt")) << "epochz = 2\n";
  EXPECT_EQ(run(base + "--config " + p("bad.txt") + " --out-dir " + p("d")).code, 2);
}

TEST_F(Cli, PlusWithZeroPercentileMatchesMctl) {
  synth();
  const std::string base = "train " + p("s/train.csv") + " --epochs 2 --warmup 1 ";
  ASSERT_EQ(run(base + "--loss mctl --out-dir " + p("a")).code, 0);
  ASSERT_EQ(run(base + "--plus --p-d 0 --out-dir " + p("b")).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "history.jsonl"), slurp(dir_ / "b" / "history.jsonl"));
  EXPECT_EQ(slurp(dir_ / "a" / "model.json"), slurp(dir_ / "b" / "model.json"));
}

TEST_F(Cli, SynthWritesThreeFiles) {
  ASSERT_EQ(run("synth --format cgf --out-dir " + p("s")).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "train.cgf"));
  EXPECT_TRUE(fs::exists(dir_ / "s" / "heldout.cgf"));
  EXPECT_TRUE(fs::exists(dir_ / "s" / "truth.csv"));
  EXPECT_EQ(run("synth --class-sizes 10,x --out-dir " + p("t")).code, 2);
}
