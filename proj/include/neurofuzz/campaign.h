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

// Running generated inputs against a target program.
//
// A command is an argv template. The placeholder {input} is replaced by the
// test file path and {coverage} by a per-run coverage file path the target
// may write. A run is a crash when the child dies from a signal or exits
// with 128 + SIGILL/SIGABRT/SIGBUS/SIGFPE/SIGSEGV (shell convention), and a
// hang when it is still running at the timeout; it is then killed together
// with its process group.
//
// Campaign directory layout:
//   inputs/<id>.pdf, inputs/<id>.json   every generated file and its sidecar
//   crashes/<id>.pdf, crashes/<id>.json copies of crashing inputs
//   coverage/<id>.cov                   coverage written by the target
//   results.jsonl                       one RunResult per line, by index
//   report.json                         CampaignReport

#ifndef NEUROFUZZ_CAMPAIGN_H_
#define NEUROFUZZ_CAMPAIGN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "neurofuzz/assembly.h"
#include "neurofuzz/corpus.h"
#include "neurofuzz/fuzz.h"
#include "neurofuzz/model.h"

namespace neurofuzz::campaign {

inline constexpr double kDefaultTimeoutSeconds = 5.0;

enum class ExitClass { kClean, kCrash, kHang };

const char* ExitClassName(ExitClass c);

struct RunResult {
  std::string datum_id;
  ExitClass exit_class = ExitClass::kClean;
  int exit_code = -1;  // -1 unless the child exited normally
  int signal = 0;      // terminating signal, 0 if none
  double wall_ms = 0.0;
  std::string detail;  // "exit 0", "signal 11", "timeout"
  std::string first_stderr_line;
  std::optional<std::filesystem::path> coverage_path;

  std::string BucketKey() const { return detail + "|" + first_stderr_line; }
};

// Whitespace-separated argv with single and double quotes.
std::vector<std::string> SplitCommand(std::string_view command);

// Throws ConfigError if the program cannot be found or executed.
void CheckExecutable(const std::string& program);

struct RunOptions {
  double timeout_seconds = kDefaultTimeoutSeconds;
  std::optional<std::filesystem::path> coverage_path;
  // Where the child's stderr is captured; a temporary next to the input if
  // empty.
  std::optional<std::filesystem::path> stderr_path;
};

// Throws InvalidArgumentError if the template lacks {input} and ConfigError
// if the program is missing.
RunResult RunTarget(std::span<const std::string> command_template,
                    const std::filesystem::path& input,
                    const RunOptions& options);

class CoverageSet {
 public:
  using Block = std::pair<std::string, std::uint64_t>;

  void Insert(std::string unit, std::uint64_t block) {
    blocks_.emplace(std::move(unit), block);
  }
  void Merge(const CoverageSet& other) {
    blocks_.insert(other.blocks_.begin(), other.blocks_.end());
  }
  std::size_t size() const { return blocks_.size(); }
  bool contains(const Block& b) const { return blocks_.contains(b); }
  const std::set<Block>& blocks() const { return blocks_; }
  bool operator==(const CoverageSet&) const = default;

 private:
  std::set<Block> blocks_;
};

// Lines `unit,block_id`; blank lines are skipped. Throws FormatError naming
// the line number of a malformed line, ConfigError if unreadable.
CoverageSet ParseCoverage(std::string_view text);
CoverageSet IngestCoverage(const std::filesystem::path& path);

struct CampaignReport {
  std::size_t runs = 0;
  std::size_t clean = 0;
  std::size_t crashes = 0;
  std::size_t hangs = 0;
  std::size_t errors = 0;  // runs whose coverage could not be ingested
  std::map<std::string, std::size_t> buckets;  // crash bucket -> count
  std::size_t coverage_blocks = 0;
  double elapsed_seconds = 0.0;
  double runs_per_hour = 0.0;
  std::string campaign_id;
  std::uint64_t master_seed = 0;
  int parallelism = 1;

  std::string ToJson() const;
  static CampaignReport FromJson(std::string_view json);
  std::string ToText() const;
};

// Produces the bytes of test file `index` and a JSON sidecar from a seed
// derived only from the master seed and the index. Must be thread-safe.
struct Generated {
  std::string bytes;
  std::string sidecar;
};
using Generator = std::function<Generated(std::size_t index, std::uint64_t seed)>;

struct CampaignConfig {
  std::filesystem::path out_dir;
  std::vector<std::string> command;
  std::size_t n = 1;
  int parallelism = 1;
  double timeout_seconds = kDefaultTimeoutSeconds;
  std::uint64_t master_seed = 0;
  std::string campaign_id = "campaign";
};

std::string DatumId(std::string_view campaign_id, std::size_t index);
std::uint64_t DatumSeed(std::uint64_t master_seed, std::size_t index);

// Generates, stores and runs n inputs with at most `parallelism` concurrent
// target processes. Individual run failures are recorded; configuration
// errors propagate.
CampaignReport RunCampaign(const CampaignConfig& config,
                           const Generator& generator,
                           std::vector<RunResult>* results = nullptr);

// Neural generation of incremental updates: each target object of an SOU or
// MOU plan is replaced by a fuzzed object generated from a random prefix of
// the test split.
struct NeuralGeneratorConfig {
  std::shared_ptr<const model::Checkpoint> checkpoint;
  std::shared_ptr<const corpus::PreprocessedCorpus> corpus;
  std::shared_ptr<const assembly::HostDocument> host;
  fuzz::Algorithm algorithm = fuzz::Algorithm::kMetadata;
  fuzz::FuzzSettings settings;  // seed is overridden per datum
  assembly::UpdateMode mode = assembly::UpdateMode::kSou;
  assembly::Fraction fraction;
};

Generator MakeNeuralGenerator(NeuralGeneratorConfig config);

}  // namespace neurofuzz::campaign

#endif  // NEUROFUZZ_CAMPAIGN_H_
