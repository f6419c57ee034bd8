// Copyright 2026 The slotmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the slotmem binary end to end: exit codes, help, config precedence,
// artifacts and idempotence.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "viz.h"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

Result RunCli(const std::string& args) {
  const std::string cmd = std::string(SLOTMEM_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("slotmem_cli_test_" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

constexpr char kTinyModel[] =
    "slots=3\nd-enc=6\nd-slot=5\nmlp-hidden=7\nssm-state=3\nwindow-past=2\n"
    "window-future=2\nrelation=2\ndecoder-layers=1\nbatch=2\nsteps=2\n"
    "log-every=1\n";

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(RunCli("").code, 2);
  EXPECT_EQ(RunCli("frobnicate").code, 2);
  EXPECT_EQ(RunCli("gen-data --no-such-flag").code, 2);
  EXPECT_EQ(RunCli("gen-data --task T99").code, 2);
  EXPECT_EQ(RunCli("token-report --h 0").code, 2);
  EXPECT_EQ(RunCli("eval --n -1 --policy expert").code, 2);
  EXPECT_EQ(RunCli("eval --policy model --out " + P("e")).code, 2);
}

TEST_F(CliTest, RuntimeErrorsExitOne) {
  WriteFile(P("bad.ckpt"), "not a checkpoint");
  const Result r = RunCli("eval --checkpoint " + P("bad.ckpt") + " --out " + P("e"));
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("error:"), std::string::npos);
  EXPECT_EQ(RunCli("train --data " + P("nowhere") + " --out " + P("r")).code, 1);
}

TEST_F(CliTest, EverySubcommandHasHelp) {
  for (const char* sub : {"gen-data", "train", "eval", "report", "viz-slots",
                          "token-report", "audit-aliasing"}) {
    const Result r = RunCli(std::string(sub) + " --help");
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--config"), std::string::npos) << sub;
  }
  const Result top = RunCli("--help");
  EXPECT_EQ(top.code, 0);
  EXPECT_NE(top.out.find("audit-aliasing"), std::string::npos);
}

TEST_F(CliTest, TokenReportArithmetic) {
  const Result r = RunCli("token-report --h 8 --per-frame 16");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("custom\t8\t16\t128\t32\n"), std::string::npos) << r.out;
  const Result table = RunCli("token-report");
  EXPECT_NE(table.out.find("slot (h=1)\t1\t16\t16\t32\n"), std::string::npos);
  EXPECT_NE(table.out.find("dense (h=1)\t1\t256\t256\t32\n"), std::string::npos);
}

TEST_F(CliTest, ConfigFileIsOverriddenByFlags) {
  WriteFile(P("t.cfg"), "# comment\nh=8\nper-frame=16\n");
  const Result cfg = RunCli("token-report --config " + P("t.cfg"));
  EXPECT_NE(cfg.out.find("custom\t8\t16\t128\t32\n"), std::string::npos);
  const Result flag = RunCli("token-report --config " + P("t.cfg") + " --h 2");
  EXPECT_NE(flag.out.find("custom\t2\t16\t32\t32\n"), std::string::npos);
  EXPECT_EQ(flag.out.find("\t128\t"), std::string::npos);
  WriteFile(P("bad.cfg"), "nonsense=1\n");
  EXPECT_EQ(RunCli("token-report --config " + P("bad.cfg")).code, 2);
}

TEST_F(CliTest, GenDataWritesOneHundredTwentyEpisodesIdempotently) {
  ASSERT_EQ(RunCli("gen-data --task T1 --seed 0 --out " + P("d")).code, 0);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir_ / "d")) {
    if (e.path().extension() == ".ep") files.push_back(e.path());
  }
  EXPECT_EQ(files.size(), 120u);
  std::vector<std::string> before;
  for (const auto& f : files) before.push_back(Slurp(f));
  const std::string index = Slurp(dir_ / "d" / "index.txt");
  ASSERT_EQ(RunCli("gen-data --task T1 --seed 0 --out " + P("d")).code, 0);
  for (size_t i = 0; i < files.size(); ++i) {
    EXPECT_EQ(Slurp(files[i]), before[i]) << files[i];
  }
  EXPECT_EQ(Slurp(dir_ / "d" / "index.txt"), index);
}

TEST_F(CliTest, TrainEvalReportVizPipeline) {
  ASSERT_EQ(RunCli("gen-data --task T1 --train 3 --val 1 --out " + P("d")).code,
            0);
  WriteFile(P("tiny.cfg"), kTinyModel);
  const std::string train =
      "train --config " + P("tiny.cfg") + " --data " + P("d") + " --out ";
  Result r = RunCli(train + P("r1"));
  ASSERT_EQ(r.code, 0) << r.out;
  ASSERT_EQ(RunCli(train + P("r2")).code, 0);
  EXPECT_EQ(Slurp(dir_ / "r1" / "model.ckpt"), Slurp(dir_ / "r2" / "model.ckpt"));
  const std::string curve = Slurp(dir_ / "r1" / "loss_curve.tsv");
  EXPECT_EQ(curve, Slurp(dir_ / "r2" / "loss_curve.tsv"));
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 3);

  // Resuming a finished run keeps its curve.
  r = RunCli("train --data " + P("d") + " --out " + P("r1") + " --resume " +
          P("r1/model.ckpt"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(Slurp(dir_ / "r1" / "loss_curve.tsv"), curve);

  const std::string eval = "eval --checkpoint " + P("r1/model.ckpt") +
                           " --tasks T1 --n 2 --out " + P("e");
  ASSERT_EQ(RunCli(eval).code, 0);
  const std::string report = Slurp(dir_ / "e" / "eval_full.tsv");
  const std::string rollouts = Slurp(dir_ / "e" / "rollouts_full.tsv");
  ASSERT_EQ(RunCli(eval).code, 0);
  EXPECT_EQ(Slurp(dir_ / "e" / "eval_full.tsv"), report);
  EXPECT_EQ(Slurp(dir_ / "e" / "rollouts_full.tsv"), rollouts);

  ASSERT_EQ(RunCli("eval --policy expert --tasks T1 --n 2 --out " + P("e")).code,
            0);
  r = RunCli("report " + P("e/eval_full.tsv") + " " + P("e/eval_expert.tsv") +
          " --out " + P("table.md"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("| expert | 100.0 (100.0) | 100.0 (100.0) |"),
            std::string::npos)
      << r.out;
  EXPECT_EQ(Slurp(dir_ / "table.md"), r.out);

  r = RunCli("viz-slots --checkpoint " + P("r1/model.ckpt") +
          " --task T1 --frames 3 --out " + P("v"));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"frame_000.png", "frame_001.png", "frame_002.png"}) {
    const std::string png = Slurp(dir_ / "v" / f);
    ASSERT_GT(png.size(), 8u) << f;
    EXPECT_EQ(png.substr(1, 3), "PNG");
  }
  const std::string boxes = Slurp(dir_ / "v" / "boxes.tsv");
  EXPECT_EQ(std::count(boxes.begin(), boxes.end(), '\n'), 1 + 3 * 3);
}

TEST_F(CliTest, AuditFindsAliasedPairs) {
  const Result r = RunCli("audit-aliasing --tasks T3 --n 5 --out " + P("a"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(Slurp(dir_ / "a" / "aliasing_T3.tsv"));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  long long scanned = 0, close = 0, violations = 0;
  in >> scanned >> close >> violations;
  EXPECT_GT(scanned, 0);
  EXPECT_GE(violations, 1);
}

TEST(VizTest, BoxIsTightAroundHalfPeakAttention) {
  slotmem::ad::Matrix attn = slotmem::ad::Matrix::Zero(2, 16);
  attn(0, 5) = 1.0;   // (1, 1)
  attn(0, 11) = 0.5;  // (3, 2)
  attn(0, 0) = 0.49;  // below half peak
  const auto box = slotmem::viz::AttentionBox(attn, 0, 8);
  EXPECT_EQ(box.x0, 8);
  EXPECT_EQ(box.y0, 8);
  EXPECT_EQ(box.x1, 32);
  EXPECT_EQ(box.y1, 24);
  EXPECT_TRUE(slotmem::viz::AttentionBox(attn, 1, 8).empty());
  EXPECT_THROW(slotmem::viz::AttentionBox(attn, 2, 8), std::out_of_range);
}

TEST(VizTest, TileLaysOutRowMajorWithGaps) {
  slotmem::viz::Image a(2, 1), b(2, 1), c(2, 1);
  b.at(0, 0)[0] = 7;
  c.at(1, 0)[2] = 9;
  const auto t = slotmem::viz::Tile({a, b, c}, 2, 1);
  EXPECT_EQ(t.width, 5);
  EXPECT_EQ(t.height, 3);
  EXPECT_EQ(t.at(3, 0)[0], 7);
  EXPECT_EQ(t.at(1, 2)[2], 9);
}

}  // namespace
