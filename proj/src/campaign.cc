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

#include "neurofuzz/campaign.h"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "neurofuzz/checkpoint.h"
#include "neurofuzz/errors.h"
#include "neurofuzz/io.h"
#include "neurofuzz/rng.h"
#include "neurofuzz/sampler.h"

extern char** environ;

namespace neurofuzz::campaign {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

bool IsCrashExitCode(int code) {
  switch (code - 128) {
    case SIGILL:
    case SIGABRT:
    case SIGBUS:
    case SIGFPE:
    case SIGSEGV:
      return true;
    default:
      return false;
  }
}

std::string Substitute(std::string arg, std::string_view placeholder,
                       const std::string& value) {
  for (std::size_t p = arg.find(placeholder); p != std::string::npos;
       p = arg.find(placeholder, p + value.size())) {
    arg.replace(p, placeholder.size(), value);
  }
  return arg;
}

std::string FirstLine(const fs::path& path) {
  std::string text;
  try {
    text = io::ReadFile(path);
  } catch (const ConfigError&) {
    return "";
  }
  const std::size_t end = text.find_first_of("\r\n");
  return text.substr(0, end);
}

}  // namespace

const char* ExitClassName(ExitClass c) {
  switch (c) {
    case ExitClass::kClean:
      return "clean";
    case ExitClass::kCrash:
      return "crash";
    case ExitClass::kHang:
      return "hang";
  }
  return "unknown";
}

std::vector<std::string> SplitCommand(std::string_view command) {
  std::vector<std::string> out;
  std::string current;
  bool in_token = false;
  char quote = 0;
  for (char c : command) {
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else {
        current.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_token) out.push_back(std::move(current));
      current.clear();
      in_token = false;
    } else {
      current.push_back(c);
      in_token = true;
    }
  }
  if (quote != 0) throw InvalidArgumentError("unterminated quote in command");
  if (in_token) out.push_back(std::move(current));
  return out;
}

void CheckExecutable(const std::string& program) {
  if (program.empty()) throw ConfigError("empty target command");
  if (program.find('/') != std::string::npos) {
    if (::access(program.c_str(), X_OK) != 0) {
      throw ConfigError("target program '" + program + "' is not executable");
    }
    return;
  }
  const char* path = std::getenv("PATH");
  std::string_view dirs = path != nullptr ? path : "/usr/bin:/bin";
  while (!dirs.empty()) {
    const std::size_t colon = dirs.find(':');
    const std::string dir(dirs.substr(0, colon));
    const std::string candidate = (dir.empty() ? "." : dir) + "/" + program;
    if (::access(candidate.c_str(), X_OK) == 0) return;
    if (colon == std::string_view::npos) break;
    dirs.remove_prefix(colon + 1);
  }
  throw ConfigError("target program '" + program + "' not found in PATH");
}

RunResult RunTarget(std::span<const std::string> command_template,
                    const fs::path& input, const RunOptions& options) {
  if (command_template.empty()) throw InvalidArgumentError("empty command");
  bool has_input = false;
  for (const std::string& arg : command_template) {
    if (arg.find("{input}") != std::string::npos) has_input = true;
  }
  if (!has_input) {
    throw InvalidArgumentError("command template lacks the {input} placeholder");
  }
  if (!(options.timeout_seconds > 0.0)) {
    throw InvalidArgumentError("timeout must be positive");
  }
  CheckExecutable(command_template[0]);

  const std::string coverage =
      options.coverage_path ? options.coverage_path->string() : "/dev/null";
  std::vector<std::string> args;
  for (const std::string& arg : command_template) {
    args.push_back(Substitute(Substitute(arg, "{input}", input.string()),
                              "{coverage}", coverage));
  }
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  const fs::path stderr_path =
      options.stderr_path ? *options.stderr_path
                          : fs::path(input.string() + ".stderr");
  if (options.coverage_path) {
    std::error_code ec;
    fs::remove(*options.coverage_path, ec);
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, stderr_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGDEF);
  posix_spawnattr_setpgroup(&attr, 0);
  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  posix_spawnattr_setsigdefault(&attr, &defaults);

  const auto start = Clock::now();
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, argv[0], &actions, &attr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    throw ConfigError("cannot execute '" + args[0] + "': " + std::strerror(rc));
  }

  const auto timeout = std::chrono::duration<double>(options.timeout_seconds);
  int status = 0;
  bool timed_out = false;
  auto sleep = std::chrono::microseconds(100);
  while (true) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) {
      throw Error(std::string("waitpid failed: ") + std::strerror(errno));
    }
    if (Clock::now() - start >= timeout) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(sleep);
    sleep = std::min(sleep * 2, std::chrono::microseconds(5000));
  }
  const auto elapsed = Clock::now() - start;

  RunResult result;
  result.datum_id = input.stem().string();
  result.wall_ms = std::chrono::duration<double, std::milli>(elapsed).count();
  if (timed_out || elapsed >= timeout) {
    result.exit_class = ExitClass::kHang;
    result.detail = "timeout";
    result.wall_ms = std::max(result.wall_ms, options.timeout_seconds * 1000.0);
  } else if (WIFSIGNALED(status)) {
    result.exit_class = ExitClass::kCrash;
    result.signal = WTERMSIG(status);
    result.detail = "signal " + std::to_string(result.signal);
  } else {
    result.exit_code = WEXITSTATUS(status);
    result.detail = "exit " + std::to_string(result.exit_code);
    result.exit_class =
        IsCrashExitCode(result.exit_code) ? ExitClass::kCrash : ExitClass::kClean;
  }
  result.first_stderr_line = FirstLine(stderr_path);
  if (!options.stderr_path) {
    std::error_code ec;
    fs::remove(stderr_path, ec);
  }
  if (options.coverage_path && fs::exists(*options.coverage_path)) {
    result.coverage_path = options.coverage_path;
  }
  return result;
}

CoverageSet ParseCoverage(std::string_view text) {
  CoverageSet set;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const std::size_t comma = line.find(',');
    const auto bad = [&](const char* why) {
      return FormatError("coverage line " + std::to_string(line_no) + ": " + why);
    };
    if (comma == std::string_view::npos || comma == 0) throw bad("expected unit,block_id");
    std::string_view id = line.substr(comma + 1);
    if (id.empty() || id.size() > 20) throw bad("invalid block id");
    std::uint64_t value = 0;
    for (char c : id) {
      if (c < '0' || c > '9') throw bad("invalid block id");
      const std::uint64_t digit = static_cast<std::uint64_t>(c - '0');
      if (value > (UINT64_MAX - digit) / 10) throw bad("block id overflows");
      value = value * 10 + digit;
    }
    set.Insert(std::string(line.substr(0, comma)), value);
  }
  return set;
}

CoverageSet IngestCoverage(const fs::path& path) {
  return ParseCoverage(io::ReadFile(path));
}

std::string CampaignReport::ToJson() const {
  nlohmann::ordered_json j;
  j["format"] = "neurofuzz-campaign-report";
  j["version"] = 1;
  j["campaign_id"] = campaign_id;
  j["master_seed"] = master_seed;
  j["parallelism"] = parallelism;
  j["totals"] = {{"runs", runs},     {"clean", clean},   {"crashes", crashes},
                 {"hangs", hangs},   {"errors", errors}};
  nlohmann::ordered_json b = nlohmann::ordered_json::object();
  for (const auto& [key, count] : buckets) b[key] = count;
  j["crash_buckets"] = std::move(b);
  j["distinct_crash_buckets"] = buckets.size();
  j["coverage_blocks"] = coverage_blocks;
  j["elapsed_seconds"] = elapsed_seconds;
  j["runs_per_hour"] = runs_per_hour;
  return j.dump(2) + "\n";
}

CampaignReport CampaignReport::FromJson(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("campaign report is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "neurofuzz-campaign-report") {
    throw FormatError("not a campaign report");
  }
  if (j.value("version", 0) != 1) {
    throw UnsupportedVersionError("unsupported campaign report version");
  }
  try {
    CampaignReport r;
    r.campaign_id = j.at("campaign_id").get<std::string>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.parallelism = j.at("parallelism").get<int>();
    const auto& t = j.at("totals");
    r.runs = t.at("runs").get<std::size_t>();
    r.clean = t.at("clean").get<std::size_t>();
    r.crashes = t.at("crashes").get<std::size_t>();
    r.hangs = t.at("hangs").get<std::size_t>();
    r.errors = t.at("errors").get<std::size_t>();
    for (const auto& [key, count] : j.at("crash_buckets").items()) {
      r.buckets[key] = count.get<std::size_t>();
    }
    r.coverage_blocks = j.at("coverage_blocks").get<std::size_t>();
    r.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    r.runs_per_hour = j.at("runs_per_hour").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed campaign report: ") + e.what());
  }
}

std::string CampaignReport::ToText() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line),
                "campaign %s (seed %llu, parallelism %d)\n"
                "runs %zu: clean %zu, crashes %zu, hangs %zu, errors %zu\n"
                "distinct crash buckets %zu\ncoverage blocks %zu\n"
                "elapsed %.2f s, %.1f runs/hour\n",
                campaign_id.c_str(), static_cast<unsigned long long>(master_seed),
                parallelism, runs, clean, crashes, hangs, errors, buckets.size(),
                coverage_blocks, elapsed_seconds, runs_per_hour);
  out.append(line);
  for (const auto& [key, count] : buckets) {
    out.append("  ").append(std::to_string(count)).append("  ").append(key).append("\n");
  }
  return out;
}

std::string DatumId(std::string_view campaign_id, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "-%06zu", index);
  return std::string(campaign_id) + buf;
}

std::uint64_t DatumSeed(std::uint64_t master_seed, std::size_t index) {
  return DeriveSeed(DeriveSeed(master_seed, "datum"),
                    static_cast<std::uint64_t>(index));
}

CampaignReport RunCampaign(const CampaignConfig& config,
                           const Generator& generator,
                           std::vector<RunResult>* results_out) {
  if (config.n < 1) throw InvalidArgumentError("campaign needs n >= 1");
  if (config.parallelism < 1) throw InvalidArgumentError("parallelism must be >= 1");
  if (config.command.empty()) throw ConfigError("no target command given");
  CheckExecutable(config.command[0]);
  bool has_input = false;
  bool wants_coverage = false;
  for (const std::string& arg : config.command) {
    has_input |= arg.find("{input}") != std::string::npos;
    wants_coverage |= arg.find("{coverage}") != std::string::npos;
  }
  if (!has_input) throw ConfigError("target command lacks the {input} placeholder");

  const fs::path inputs = config.out_dir / "inputs";
  const fs::path crashes = config.out_dir / "crashes";
  const fs::path coverage_dir = config.out_dir / "coverage";
  fs::create_directories(inputs);
  fs::create_directories(crashes);
  fs::create_directories(coverage_dir);

  std::vector<RunResult> results(config.n);
  std::vector<CoverageSet> coverage(config.n);
  std::vector<char> coverage_error(config.n, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  const auto start = Clock::now();
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.n) return;
      {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (failure) return;
      }
      try {
        const std::string id = DatumId(config.campaign_id, i);
        const Generated g = generator(i, DatumSeed(config.master_seed, i));
        const fs::path input = inputs / (id + ".pdf");
        io::WriteFile(input, g.bytes);
        io::WriteFile(inputs / (id + ".json"), g.sidecar);
        RunOptions options;
        options.timeout_seconds = config.timeout_seconds;
        if (wants_coverage) options.coverage_path = coverage_dir / (id + ".cov");
        RunResult r = RunTarget(config.command, input, options);
        r.datum_id = id;
        if (r.exit_class == ExitClass::kCrash) {
          io::WriteFile(crashes / (id + ".pdf"), g.bytes);
          io::WriteFile(crashes / (id + ".json"), g.sidecar);
        }
        if (r.coverage_path) {
          try {
            coverage[i] = IngestCoverage(*r.coverage_path);
          } catch (const Error&) {
            coverage_error[i] = 1;
          }
        }
        results[i] = std::move(r);
      } catch (...) {
        // The first failure stops the pool and is rethrown on the caller.
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const int k = static_cast<int>(std::min<std::size_t>(config.parallelism, config.n));
  std::vector<std::thread> threads;
  for (int t = 1; t < k; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  CampaignReport report;
  report.campaign_id = config.campaign_id;
  report.master_seed = config.master_seed;
  report.parallelism = config.parallelism;
  report.elapsed_seconds =
      std::chrono::duration<double>(Clock::now() - start).count();
  CoverageSet total;
  std::string jsonl;
  for (std::size_t i = 0; i < config.n; ++i) {
    const RunResult& r = results[i];
    ++report.runs;
    switch (r.exit_class) {
      case ExitClass::kClean:
        ++report.clean;
        break;
      case ExitClass::kCrash:
        ++report.crashes;
        ++report.buckets[r.BucketKey()];
        break;
      case ExitClass::kHang:
        ++report.hangs;
        break;
    }
    if (coverage_error[i]) ++report.errors;
    total.Merge(coverage[i]);
    nlohmann::ordered_json line;
    line["datum_id"] = r.datum_id;
    line["exit_class"] = ExitClassName(r.exit_class);
    line["exit_code"] = r.exit_code;
    line["signal"] = r.signal;
    line["detail"] = r.detail;
    line["stderr"] = r.first_stderr_line;
    line["wall_ms"] = r.wall_ms;
    line["coverage"] = r.coverage_path ? r.coverage_path->filename().string() : "";
    jsonl.append(line.dump()).append("\n");
  }
  report.coverage_blocks = total.size();
  report.runs_per_hour = report.elapsed_seconds > 0.0
                             ? static_cast<double>(report.runs) * 3600.0 /
                                   report.elapsed_seconds
                             : 0.0;
  io::WriteFile(config.out_dir / "results.jsonl", jsonl);
  io::WriteFile(config.out_dir / "report.json", report.ToJson());
  if (results_out != nullptr) *results_out = std::move(results);
  return report;
}

Generator MakeNeuralGenerator(NeuralGeneratorConfig config) {
  if (!config.checkpoint || !config.corpus || !config.host) {
    throw InvalidArgumentError("neural generator needs a checkpoint, corpus and host");
  }
  const model::Checkpoint& ckpt = *config.checkpoint;
  if (!(ckpt.vocabulary == config.corpus->vocabulary)) {
    // The model may cover a superset of the corpus symbols; encoding with its
    // own vocabulary is what matters.
    for (char c : config.corpus->test) {
      if (!ckpt.vocabulary.contains(static_cast<std::uint8_t>(c))) {
        throw ConfigError("test split contains symbols unknown to the checkpoint");
      }
    }
  }
  auto test = std::make_shared<const std::vector<int>>(
      ckpt.vocabulary.Encode(config.corpus->test));
  if (test->size() < static_cast<std::size_t>(ckpt.spec.window)) {
    throw ConfigError("test split is shorter than the model window");
  }
  const std::string checkpoint_id = model::CheckpointId(ckpt);
  auto params = std::shared_ptr<const model::ModelParams<float>>(
      config.checkpoint, &config.checkpoint->params);

  return [config, test, params, checkpoint_id](std::size_t index,
                                               std::uint64_t seed) -> Generated {
    const assembly::HostDocument& host = *config.host;
    assembly::UpdatePlan plan;
    if (config.mode == assembly::UpdateMode::kSou) {
      plan = assembly::PlanSou(host);
    } else {
      Rng plan_rng(DeriveSeed(seed, "plan"));
      plan = assembly::PlanMou(host, config.fraction, plan_rng);
    }
    sampler::ModelPredictor predictor(params);
    std::vector<assembly::Replacement> replacements;
    nlohmann::ordered_json sidecar;
    sidecar["index"] = index;
    sidecar["seed"] = seed;
    sidecar["mode"] = config.mode == assembly::UpdateMode::kSou ? "SOU" : "MOU";
    nlohmann::ordered_json objects = nlohmann::ordered_json::array();
    for (std::uint64_t target : plan.targets) {
      const std::uint64_t object_seed = DeriveSeed(seed, target);
      Rng prefix_rng(DeriveSeed(object_seed, "prefix"));
      const std::size_t start =
          prefix_rng.Below(test->size() - config.checkpoint->spec.window + 1);
      std::span<const int> prefix(test->data() + start,
                                  static_cast<std::size_t>(config.checkpoint->spec.window));
      fuzz::FuzzSettings settings = config.settings;
      settings.seed = object_seed;
      fuzz::TestDatum datum =
          fuzz::NeuralFuzz(config.algorithm, predictor, prefix, settings,
                           config.checkpoint->vocabulary, &config.corpus->store);
      datum.provenance.checkpoint_id = checkpoint_id;
      datum.provenance.prefix_origin = "test:" + std::to_string(start);
      replacements.push_back({target, assembly::MakeObjectBody(datum.bytes, target)});
      nlohmann::ordered_json o = nlohmann::ordered_json::parse(fuzz::ProvenanceJson(datum));
      o["object_id"] = target;
      objects.push_back(std::move(o));
    }
    sidecar["objects"] = std::move(objects);
    return {assembly::IncrementalUpdate(host, replacements), sidecar.dump(2) + "\n"};
  };
}

}  // namespace neurofuzz::campaign
