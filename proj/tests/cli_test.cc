// Copyright 2026 The Neurofuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cli_util.h"
#include "json.hpp"
#include "test_util.h"

namespace neurofuzz {
namespace {

namespace fs = std::filesystem;
using testing::ReadTree;
using testing::RunCli;

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::TempDir("cli"));
    ASSERT_EQ(RunCli(*dir_, {"synth-oracle", "--out", "synth", "--objects", "200",
                             "--host-objects", "6", "--seed", "3"})
                  .exit_code,
              0);
    ASSERT_EQ(RunCli(*dir_, {"train", "--corpus", "synth/bundle", "--out", "model",
                             "--model-preset", "1", "--epochs", "1", "--window", "20",
                             "--seed", "5"})
                  .exit_code,
              0);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }

  static fs::path* dir_;
};

fs::path* CliTest::dir_ = nullptr;

std::size_t CountWithExtension(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

TEST_F(CliTest, MissingRequiredFlagIsAUsageError) {
  const auto r = RunCli(*dir_, {"train", "--out", "never"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("--corpus"), std::string::npos);
  EXPECT_FALSE(fs::exists(*dir_ / "never"));
}

TEST_F(CliTest, UnknownFlagPrintsHelp) {
  const auto r = RunCli(*dir_, {"generate", "--bogus", "1"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE((r.out + r.err).find("--checkpoint"), std::string::npos);
}

TEST_F(CliTest, DomainErrorExitsOne) {
  std::ofstream(*dir_ / "broken.ckpt") << "not a checkpoint";
  const auto r = RunCli(*dir_, {"eval", "--checkpoint", "broken.ckpt", "--corpus", "synth/bundle"});
  EXPECT_EQ(r.exit_code, 1);
}

TEST_F(CliTest, EveryRunPrintsItsConfiguration) {
  const auto r = RunCli(*dir_, {"generate", "--checkpoint", "model/final.ckpt", "--out", "gen",
                                "--n", "2", "--cap", "60"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto line = r.err.substr(0, r.err.find('\n'));
  ASSERT_EQ(line.rfind("config ", 0), 0u) << line;
  const auto config = nlohmann::json::parse(line.substr(7));
  EXPECT_EQ(config["command"], "generate");
  EXPECT_EQ(config["seed"], "0");
  EXPECT_EQ(config["diversity"], "1");
}

TEST_F(CliTest, TrainTwiceGivesIdenticalCheckpoints) {
  for (const char* out : {"twice-a", "twice-b"}) {
    ASSERT_EQ(RunCli(*dir_, {"train", "--corpus", "synth/bundle", "--out", out,
                             "--model-preset", "2", "--epochs", "2", "--seed", "7"})
                  .exit_code,
              0);
  }
  const auto a = ReadTree(*dir_ / "twice-a");
  const auto b = ReadTree(*dir_ / "twice-b");
  ASSERT_TRUE(a.count("final.ckpt"));
  ASSERT_TRUE(a.count("epoch-002.ckpt"));
  EXPECT_EQ(a.at("final.ckpt"), b.at("final.ckpt"));
  EXPECT_EQ(a.at("epoch-001.ckpt"), b.at("epoch-001.ckpt"));
  EXPECT_EQ(a.at("train_log.jsonl"), b.at("train_log.jsonl"));
}

TEST_F(CliTest, FuzzMetaWritesFilesAndSidecars) {
  const auto r = RunCli(*dir_, {"fuzz-meta", "--checkpoint", "model/final.ckpt", "--n", "100",
                                "--fr", "0.1", "--min-len", "60", "--max-len", "80",
                                "--out", "meta"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(CountWithExtension(*dir_ / "meta", ".pdf"), 100u);
  EXPECT_EQ(CountWithExtension(*dir_ / "meta", ".json"), 100u);
  std::ifstream in(*dir_ / "meta" / "campaign-000042.json");
  const auto sidecar = nlohmann::json::parse(in);
  EXPECT_EQ(sidecar["algorithm"], "metadata");
  EXPECT_TRUE(sidecar["fuzz_trace"].is_array());
  EXPECT_GE(sidecar["max_len"].get<int>(), 60);
  EXPECT_LE(sidecar["max_len"].get<int>(), 80);
}

TEST_F(CliTest, EnvironmentOverridesDefaultsButNotFlags) {
  auto r = RunCli(*dir_, {"fuzz-data", "--checkpoint", "model/final.ckpt", "--out", "env-a",
                          "--min-len", "40", "--max-len", "50"},
                  {"NEUROFUZZ_N=3", "NEUROFUZZ_FR=0.2"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(CountWithExtension(*dir_ / "env-a", ".pdf"), 3u);
  EXPECT_NE(r.err.find("\"fr\":\"0.2\""), std::string::npos);

  r = RunCli(*dir_, {"fuzz-data", "--checkpoint", "model/final.ckpt", "--out", "env-b",
                     "--min-len", "40", "--max-len", "50", "--n", "2"},
             {"NEUROFUZZ_N=3"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(CountWithExtension(*dir_ / "env-b", ".pdf"), 2u);
}

TEST_F(CliTest, InputsAreLeftUntouched) {
  const auto before = ReadTree(*dir_ / "synth");
  ASSERT_EQ(RunCli(*dir_, {"fuzz-data", "--checkpoint", "model/final.ckpt", "--host",
                           "synth/host.pdf", "--n", "3", "--min-len", "40", "--max-len",
                           "50", "--out", "hosted"})
                .exit_code,
            0);
  ASSERT_EQ(RunCli(*dir_, {"assemble", "--host", "synth/host.pdf", "--inputs", "hosted",
                           "--mode", "mou", "--out", "assembled"})
                .exit_code,
            0);
  EXPECT_EQ(ReadTree(*dir_ / "synth"), before);
}

TEST_F(CliTest, StructuredReport) {
  const std::string target = std::string(NEUROFUZZ_STUB_TARGET) + " --mode magic {input}";
  auto r = RunCli(*dir_, {"campaign", "--checkpoint", "model/final.ckpt", "--host",
                          "synth/host.pdf", "--target", target, "--n", "3", "--min-len",
                          "40", "--max-len", "50", "--out", "camp"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  r = RunCli(*dir_, {"report", "--campaign", "camp", "--format", "structured"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report["totals"]["runs"], 3);
  EXPECT_EQ(report["master_seed"], 0);

  r = RunCli(*dir_, {"report", "--campaign", "camp"});
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("runs 3"), std::string::npos);
}

}  // namespace
}  // namespace neurofuzz
