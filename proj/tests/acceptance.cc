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

// Acceptance suite. Prints one [PASS] or [FAIL] line per criterion and exits
// nonzero if any criterion fails.
//
//   acceptance [--reuse-model DIR] [--log FILE] [ID...]
//
// With ID arguments only those criteria run. --reuse-model keeps the trained
// model (and its measured training time) in DIR across invocations, which is
// useful while iterating; ctest always trains from scratch. --log also writes
// the result lines to FILE.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cli_util.h"
#include "json.hpp"
#include "model_oracles.h"
#include "neurofuzz/assembly.h"
#include "neurofuzz/campaign.h"
#include "neurofuzz/checkpoint.h"
#include "neurofuzz/corpus.h"
#include "neurofuzz/fuzz.h"
#include "neurofuzz/io.h"
#include "neurofuzz/model.h"
#include "neurofuzz/oracle.h"
#include "neurofuzz/rng.h"
#include "neurofuzz/sampler.h"
#include "pdf_fixtures.h"
#include "test_util.h"

namespace neurofuzz::acceptance {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
  // Seconds to charge against the budget; negative means wall time.
  double charged_seconds = -1.0;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

// ---------------------------------------------------------------------------
// Shared trained model (criteria 4, 8 and 9).

constexpr int kPreset = 1;
constexpr int kEpochs = 20;
constexpr std::size_t kOracleObjects = 5000;
constexpr std::uint64_t kCorpusSeed = 1;
constexpr std::uint64_t kTrainSeed = 1;

struct TrainedModel {
  corpus::PreprocessedCorpus corpus;
  model::Checkpoint checkpoint;
  model::Metrics validation;  // every window, jump 1
  double train_seconds = 0.0;
  bool cached = false;
};

std::optional<fs::path> g_reuse_dir;

corpus::PreprocessedCorpus OracleCorpus() {
  const std::vector<std::string> objects = oracle::SynthCorpus({}, kOracleObjects, kCorpusSeed);
  corpus::PreprocessResult pre = corpus::PreprocessFiles(objects, corpus::kDefaultBinaryToken);
  corpus::PreprocessedCorpus c =
      corpus::BuildCorpus(std::move(pre.objects), corpus::kDefaultEndToken, {}, kCorpusSeed);
  c.store = std::move(pre.store);
  return c;
}

const TrainedModel& SharedModel() {
  static std::unique_ptr<TrainedModel> shared;
  if (shared) return *shared;
  auto m = std::make_unique<TrainedModel>();
  m->corpus = OracleCorpus();
  const corpus::Vocabulary& vocab = m->corpus.vocabulary;
  const model::ModelSpec spec = model::Preset(kPreset, vocab.size());
  const std::vector<int> validation = vocab.Encode(m->corpus.validation);

  const fs::path ckpt_path = g_reuse_dir ? *g_reuse_dir / "model.ckpt" : fs::path();
  const fs::path time_path = g_reuse_dir ? *g_reuse_dir / "train_seconds.txt" : fs::path();
  if (g_reuse_dir && fs::exists(ckpt_path) && fs::exists(time_path)) {
    m->checkpoint = model::LoadCheckpoint(ckpt_path);
    m->train_seconds = std::stod(io::ReadFile(time_path));
    m->cached = true;
  } else {
    const corpus::WindowedDataset train(vocab.Encode(m->corpus.train), spec.window,
                                        model::PresetJump(kPreset));
    const corpus::WindowedDataset monitor(validation, spec.window, model::PresetJump(kPreset));
    model::TrainOptions options;
    options.epochs = kEpochs;
    options.seed = kTrainSeed;
    options.on_epoch = [](const model::Checkpoint& c) {
      std::fprintf(stderr, "  epoch %d loss %.4f accuracy %.4f perplexity %.4f\n", c.epoch,
                   c.train_loss, c.metrics.accuracy, c.metrics.perplexity);
    };
    const auto start = Clock::now();
    std::vector<model::Checkpoint> history =
        model::Train(train, &monitor, spec, vocab, options);
    m->train_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    m->checkpoint = std::move(history.back());
    if (g_reuse_dir) {
      fs::create_directories(*g_reuse_dir);
      model::SaveCheckpoint(m->checkpoint, ckpt_path);
      io::WriteFile(time_path, Format("%.3f\n", m->train_seconds));
    }
  }
  m->validation = model::Evaluate(m->checkpoint.params,
                                  corpus::WindowedDataset(validation, spec.window, 1));
  shared = std::move(m);
  return *shared;
}

// Deterministic prefix for sample `i` of trial `seed`, drawn from the test split.
std::vector<int> TestPrefix(const TrainedModel& m, std::uint64_t seed, std::size_t i) {
  static std::vector<int> test;
  if (test.empty()) test = m.corpus.vocabulary.Encode(m.corpus.test);
  Rng rng(DeriveSeed(DeriveSeed(seed, "prefix"), i));
  return sampler::SelectPrefix(test, m.checkpoint.spec.window, rng);
}

bool OraclePasses(std::string_view bytes) {
  return oracle::ParseStrict(oracle::TrailingObject(bytes)).ok;
}

// ---------------------------------------------------------------------------
// 1. Perplexity ceiling.

Outcome PerplexityCeiling() {
  Outcome out{true, ""};
  for (int vocab : {64, 96}) {
    // Zero weights make every prediction exactly uniform.
    const model::ModelParams<double> params(
        model::ModelSpec{.layers = 1, .units = 4, .vocab_size = vocab, .window = 5});
    Rng rng(DeriveSeed(7, static_cast<std::uint64_t>(vocab)));
    std::vector<int> seq(1000);
    for (int& s : seq) s = static_cast<int>(rng.Below(vocab));
    const model::Metrics m = model::Evaluate(params, corpus::WindowedDataset(seq, 5, 1));
    const double rel = testing::RelativeError(m.perplexity, vocab);
    out.pass = out.pass && rel < 1e-9;
    out.detail += Format("V=%d perplexity %.12f (rel %.1e) ", vocab, m.perplexity, rel);
  }
  return out;
}

// ---------------------------------------------------------------------------
// 2. Base-2 and natural-log perplexity agree.

Outcome PerplexityBases() {
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> probs(1 + rng.Below(500));
    for (double& p : probs) p = 1e-9 + (1.0 - 1e-9) * rng.Uniform01();
    double ln_sum = 0.0;
    for (double p : probs) ln_sum += std::log(p);
    const double natural = std::exp(-ln_sum / static_cast<double>(probs.size()));
    worst = std::max(worst, testing::RelativeError(model::Perplexity(probs), natural));
  }
  return {worst < 1e-9, Format("100 sets, worst relative difference %.2e", worst)};
}

// ---------------------------------------------------------------------------
// 3. Gradients against central finite differences.

Outcome GradientCheck() {
  Rng rng(3);
  double worst = 0.0;
  std::size_t coordinates = 0;
  int models = 0;
  for (int trial = 0; trial < 24; ++trial) {
    model::ModelSpec spec;
    spec.vocab_size = static_cast<int>(rng.UniformInt(2, 6));
    spec.units = static_cast<int>(rng.UniformInt(1, 4));
    spec.window = static_cast<int>(rng.UniformInt(1, 3));
    spec.layers = static_cast<int>(rng.UniformInt(1, 2));
    spec.direction = trial % 2 == 0 ? model::Direction::kUnidirectional
                                    : model::Direction::kBidirectional;
    const testing::GradientCheckResult r =
        testing::CheckGradients(spec, DeriveSeed(3, static_cast<std::uint64_t>(trial)), 3);
    worst = std::max(worst, r.max_relative_error);
    coordinates += r.coordinates;
    ++models;
  }
  return {worst < 1e-4, Format("%d models, %zu coordinates, worst relative error %.2e", models,
                               coordinates, worst)};
}

// ---------------------------------------------------------------------------
// 4. Learnability.

Outcome Learnability() {
  const TrainedModel& m = SharedModel();
  const bool pass = m.validation.perplexity < 3.0 && m.validation.accuracy > 0.80;
  Outcome out{pass, Format("validation perplexity %.4f (ceiling %d), accuracy %.4f, "
                           "training %.1f s%s",
                           m.validation.perplexity, m.corpus.vocabulary.size(),
                           m.validation.accuracy, m.train_seconds,
                           m.cached ? " (cached model)" : "")};
  if (m.cached) out.charged_seconds = m.train_seconds;
  return out;
}

// ---------------------------------------------------------------------------
// Stub predictors for criteria 5 to 7.

const corpus::Vocabulary& StubVocab() {
  static const corpus::Vocabulary v =
      corpus::Vocabulary::FromText("abcdefghijklmnopqrstuvwxyz0123456789 <>/[]()");
  return v;
}

int StubSym(char c) { return StubVocab().index_of(static_cast<std::uint8_t>(c)); }

std::vector<int> StubPrefix(int d) { return std::vector<int>(d, StubSym(' ')); }

// Window-dependent pseudo-random distribution that never puts mass on the
// first end-token symbol, so sampling can never complete the end token.
model::Distribution EtSuppressing(std::span<const int> w) {
  const int v = StubVocab().size();
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (int s : w) h = Mix64(h ^ static_cast<std::uint64_t>(s));
  model::Distribution d;
  d.probs.resize(v);
  double total = 0.0;
  for (int k = 0; k < v; ++k) {
    h = Mix64(h + static_cast<std::uint64_t>(k));
    d.probs[k] = k == StubSym('e') ? 0.0 : 1.0 + static_cast<double>(h % 1000);
    total += d.probs[k];
  }
  for (double& p : d.probs) p /= total;
  return d;
}

Outcome Termination() {
  const int d = 4;
  testing::FunctionPredictor stub(StubVocab().size(), d, EtSuppressing);
  const std::vector<int> et = StubVocab().Encode(corpus::kDefaultEndToken);
  std::size_t halted = 0;
  std::size_t violations = 0;
  std::size_t at_cap = 0;
  for (fuzz::Algorithm algorithm : {fuzz::Algorithm::kData, fuzz::Algorithm::kMetadata}) {
    for (std::uint64_t run = 0; run < 1000; ++run) {
      fuzz::FuzzSettings s;
      s.min_len = 40;
      s.max_len = 160;
      s.fuzz_rate = 0.5;
      s.seed = DeriveSeed(5, run);
      const fuzz::TestDatum td =
          fuzz::NeuralFuzz(algorithm, stub, StubPrefix(d), s, StubVocab(), nullptr);
      ++halted;
      const std::size_t bound = static_cast<std::size_t>(td.provenance.max_len) + et.size();
      if (td.symbols.size() > bound || !sampler::EndsWith(td.symbols, et) ||
          !td.bytes.ends_with(corpus::kDefaultEndToken)) {
        ++violations;
      }
      at_cap += td.symbols.size() == bound;
    }
  }
  return {halted == 2000 && violations == 0,
          Format("%zu of 2000 runs halted, %zu bound or suffix violations, %zu stopped by the cap",
                 halted, violations, at_cap)};
}

// ---------------------------------------------------------------------------
// 6. Fuzz-rate calibration.

Outcome FuzzRate() {
  const int d = 4;
  const int v = StubVocab().size();
  const std::string tokens[] = {std::string(corpus::kDefaultBinaryToken),
                                std::string(corpus::kDefaultEndToken)};
  const std::set<std::uint8_t> protected_bytes = fuzz::CharsOf(tokens);
  // Data: uniform over the unprotected symbols, so every draw is below alpha.
  model::Distribution spread;
  spread.probs.assign(v, 0.0);
  int open = 0;
  for (int k = 0; k < v; ++k) open += !protected_bytes.contains(StubVocab().symbol(k));
  for (int k = 0; k < v; ++k) {
    if (!protected_bytes.contains(StubVocab().symbol(k))) spread.probs[k] = 1.0 / open;
  }
  // Metadata: certain about an unprotected symbol, so every draw is above beta.
  const model::Distribution certain = testing::OneHot(v, StubSym('x'));

  Outcome out{true, ""};
  for (fuzz::Algorithm algorithm : {fuzz::Algorithm::kData, fuzz::Algorithm::kMetadata}) {
    testing::FunctionPredictor stub(v, d, [&](std::span<const int>) {
      return algorithm == fuzz::Algorithm::kData ? spread : certain;
    });
    std::size_t steps = 0;
    std::size_t eligible = 0;
    std::size_t fuzzed = 0;
    for (std::uint64_t run = 0; steps < 50000; ++run) {
      fuzz::FuzzSettings s;
      s.min_len = 500;
      s.max_len = 500;
      s.seed = DeriveSeed(6, run);
      fuzz::NeuralFuzz(algorithm, stub, StubPrefix(d), s, StubVocab(), nullptr,
                       [&](const fuzz::StepRecord& r) {
                         ++steps;
                         eligible += r.eligible;
                         fuzzed += r.fuzzed;
                       });
    }
    const double rate = static_cast<double>(fuzzed) / static_cast<double>(steps);
    out.pass = out.pass && eligible == steps && rate >= 0.07 && rate <= 0.13;
    out.detail += Format("%s %.4f of %zu symbols (%zu eligible) ", fuzz::AlgorithmName(algorithm),
                         rate, steps, eligible);
  }
  return out;
}

// ---------------------------------------------------------------------------
// 7. Propagation asymmetry.

Outcome Propagation() {
  const int d = 4;
  const int v = StubVocab().size();
  const std::vector<int> et = StubVocab().Encode(corpus::kDefaultEndToken);
  // Peaked on the successor of the last symbol, so the window steers the output.
  auto successor = [v](double p) {
    return [v, p](std::span<const int> w) { return testing::Peaked(v, (w.back() + 1) % v, p); };
  };
  testing::FunctionPredictor meta_stub(v, d, successor(0.95));
  testing::FunctionPredictor data_stub(v, d, successor(0.6));

  std::size_t meta_ok = 0;
  std::size_t data_ok = 0;
  std::size_t meta_fuzzes = 0;
  for (std::uint64_t pair = 0; pair < 100; ++pair) {
    fuzz::FuzzSettings s;
    s.min_len = 300;
    s.max_len = 300;
    s.seed = DeriveSeed(7, pair);
    const sampler::SamplerConfig replay_config{s.diversity, s.seed, 300};

    // Metadata: every conditioning window equals the unfuzzed replay's.
    const std::vector<int> meta_replay =
        sampler::Generate(meta_stub, StubPrefix(d), replay_config, et);
    bool same = true;
    std::size_t step = 0;
    const fuzz::TestDatum meta = fuzz::MetadataNeuralFuzz(
        meta_stub, StubPrefix(d), s, StubVocab(), nullptr, [&](const fuzz::StepRecord& r) {
          const std::size_t end = d + step + 1;
          same = same && end <= meta_replay.size() &&
                 std::equal(r.window.begin(), r.window.end(), meta_replay.begin() + (end - d));
          ++step;
        });
    meta_fuzzes += meta.fuzz_trace.size();
    meta_ok += same && step > 0 && !meta.fuzz_trace.empty() &&
               meta.symbols.size() == meta_replay.size();

    // Data: identical up to the first fuzz, then the window carries the
    // replacement and the trajectory departs from the replay.
    const std::vector<int> data_replay =
        sampler::Generate(data_stub, StubPrefix(d), replay_config, et);
    std::optional<std::size_t> first;
    bool window_diverged = false;
    const fuzz::TestDatum data = fuzz::DataNeuralFuzz(
        data_stub, StubPrefix(d), s, StubVocab(), nullptr, [&](const fuzz::StepRecord& r) {
          if (r.fuzzed && !first) {
            first = r.position;
            window_diverged = r.window.back() == r.emitted && r.emitted != data_replay[r.position];
          }
        });
    if (!first || data.fuzz_trace.empty() || data.fuzz_trace.front().position != *first) continue;
    const bool agree_before =
        *first < data_replay.size() &&
        std::equal(data.symbols.begin(), data.symbols.begin() + *first, data_replay.begin());
    data_ok += agree_before && window_diverged;
  }
  return {meta_ok == 100 && data_ok == 100,
          Format("metadata replays matched %zu/100 (%zu fuzzes); data diverged at first fuzz "
                 "%zu/100",
                 meta_ok, meta_fuzzes, data_ok)};
}

// ---------------------------------------------------------------------------
// 8. Diversity behavior on the trained model.

constexpr std::size_t kSamples = 500;
constexpr std::uint64_t kTrialSeeds[] = {11, 12, 13};

Outcome DiversityBehavior() {
  const TrainedModel& m = SharedModel();
  const corpus::Vocabulary& vocab = m.corpus.vocabulary;
  sampler::ModelPredictor predictor(m.checkpoint.params);
  const std::vector<int> et = vocab.Encode(m.corpus.et);
  const int d = m.checkpoint.spec.window;

  const double diversities[] = {0.2, 1.0, 1.8};
  std::vector<double> pass_rates;
  std::vector<double> distinct_ratios;
  for (double diversity : diversities) {
    double rate_sum = 0.0;
    std::set<std::vector<int>> distinct;
    for (std::uint64_t seed : kTrialSeeds) {
      std::size_t passed = 0;
      for (std::size_t i = 0; i < kSamples; ++i) {
        const std::vector<int> prefix = TestPrefix(m, seed, i);
        const sampler::SamplerConfig config{diversity, DeriveSeed(seed, i), d + 500};
        const std::vector<int> symbols = sampler::Generate(predictor, prefix, config, et);
        distinct.emplace(symbols.begin() + d, symbols.end());
        Rng binary_rng(DeriveSeed(DeriveSeed(seed, i), "binary"));
        const std::string bytes = fuzz::AddBinaryParts(vocab.Decode(symbols), m.corpus.bt,
                                                       m.corpus.store, 0.0, binary_rng, nullptr);
        passed += OraclePasses(bytes);
      }
      rate_sum += static_cast<double>(passed) / kSamples;
    }
    pass_rates.push_back(rate_sum / std::size(kTrialSeeds));
    distinct_ratios.push_back(static_cast<double>(distinct.size()) /
                              (kSamples * std::size(kTrialSeeds)));
  }
  const bool ordered = pass_rates[0] >= pass_rates[1] && pass_rates[1] >= pass_rates[2];
  const bool diverse = distinct_ratios[0] <= distinct_ratios[1] &&
                       distinct_ratios[1] <= distinct_ratios[2];
  return {ordered && diverse,
          Format("pass rate D=0.2 %.4f, D=1.0 %.4f, D=1.8 %.4f; distinct %.4f, %.4f, %.4f",
                 pass_rates[0], pass_rates[1], pass_rates[2], distinct_ratios[0],
                 distinct_ratios[1], distinct_ratios[2])};
}

// ---------------------------------------------------------------------------
// 9. Stage targeting.

Outcome StageTargeting() {
  const TrainedModel& m = SharedModel();
  sampler::ModelPredictor predictor(m.checkpoint.params);
  double rates[2] = {0.0, 0.0};
  std::size_t fuzzes[2] = {0, 0};
  const fuzz::Algorithm algorithms[2] = {fuzz::Algorithm::kData, fuzz::Algorithm::kMetadata};
  for (int a = 0; a < 2; ++a) {
    for (std::uint64_t seed : kTrialSeeds) {
      std::size_t passed = 0;
      for (std::size_t i = 0; i < kSamples; ++i) {
        fuzz::FuzzSettings s;
        s.fuzz_rate = 0.5;
        s.seed = DeriveSeed(seed, i);
        const fuzz::TestDatum td = fuzz::NeuralFuzz(algorithms[a], predictor, TestPrefix(m, seed, i),
                                                    s, m.corpus.vocabulary, &m.corpus.store);
        passed += OraclePasses(td.bytes);
        fuzzes[a] += td.fuzz_trace.size();
      }
      rates[a] += static_cast<double>(passed) / kSamples / std::size(kTrialSeeds);
    }
  }
  return {rates[1] < rates[0],
          Format("pass rate data %.4f (%zu fuzzes), metadata %.4f (%zu fuzzes)", rates[0],
                 fuzzes[0], rates[1], fuzzes[1])};
}

// ---------------------------------------------------------------------------
// 10. Incremental update validity.

Outcome IncrementalUpdates() {
  const std::pair<const char*, std::string> hosts[] = {
      {"minimal", testing::MinimalHost()},
      {"flat", testing::FlatHost(15)},
      {"updated", testing::UpdatedHost()},
  };
  struct Mode {
    assembly::UpdateMode mode;
    assembly::Fraction fraction;
  };
  const Mode modes[] = {{assembly::UpdateMode::kSou, {1, 1}},
                        {assembly::UpdateMode::kMou, {1, 5}},
                        {assembly::UpdateMode::kMou, {1, 3}},
                        {assembly::UpdateMode::kMou, {1, 4}}};
  const std::vector<std::string> texts = oracle::SynthCorpus({}, 400, 10);
  std::size_t total = 0;
  std::size_t valid = 0;
  std::string first_failure;
  for (const auto& [name, bytes] : hosts) {
    const assembly::HostDocument host = assembly::ParseHost(bytes);
    for (const Mode& mode : modes) {
      for (std::uint64_t trial = 0; trial < 20; ++trial) {
        ++total;
        Rng rng(DeriveSeed(DeriveSeed(10, name), trial * 8 + mode.fraction.den));
        const assembly::UpdatePlan plan = mode.mode == assembly::UpdateMode::kSou
                                              ? assembly::PlanSou(host)
                                              : assembly::PlanMou(host, mode.fraction, rng);
        std::vector<assembly::Replacement> replacements;
        for (std::uint64_t id : plan.targets) {
          const std::string& text = texts[rng.Below(texts.size())];
          replacements.push_back({id, assembly::MakeObjectBody(text, id)});
        }
        const std::string out = assembly::IncrementalUpdate(host, replacements);
        std::string why;
        try {
          if (out.compare(0, bytes.size(), bytes) != 0) why = "host is not a prefix";
          const assembly::HostDocument reparsed = assembly::ParseHost(out);
          const auto chain = testing::ResolveXrefChain(out);
          for (std::uint64_t id : plan.targets) {
            const auto it = chain.find(id);
            const std::string header = std::to_string(id) + " 0 obj";
            if (it == chain.end() || it->second < bytes.size() ||
                out.compare(it->second, header.size(), header) != 0 ||
                reparsed.objects.at(id).offset != it->second) {
              why = "object " + std::to_string(id) + " does not resolve to the update";
            }
          }
          for (const auto& [id, loc] : host.objects) {
            if (!reparsed.objects.contains(id)) why = "lost object " + std::to_string(id);
          }
        } catch (const std::exception& e) {
          why = e.what();
        }
        if (why.empty()) {
          ++valid;
        } else if (first_failure.empty()) {
          first_failure = std::string(name) + ": " + why;
        }
      }
    }
  }
  return {valid == total, Format("%zu/%zu outputs valid%s%s", valid, total,
                                 first_failure.empty() ? "" : "; first failure: ",
                                 first_failure.c_str())};
}

// ---------------------------------------------------------------------------
// 11. Harness fidelity.

Outcome HarnessFidelity() {
  const fs::path dir = testing::TempDir("acceptance-harness");
  Outcome out{true, ""};

  // Planted inputs: random bytes with the magic sequence at a random offset.
  {
    campaign::CampaignConfig config;
    config.out_dir = dir / "planted";
    config.command = {NEUROFUZZ_STUB_TARGET, "--mode", "magic", "{input}"};
    config.n = 100;
    config.parallelism = 4;
    config.master_seed = 11;
    const campaign::CampaignReport report =
        campaign::RunCampaign(config, [](std::size_t, std::uint64_t seed) {
          Rng rng(seed);
          std::string bytes(16 + rng.Below(200), '\0');
          for (char& c : bytes) c = static_cast<char>(rng.Below(0xDE));  // never 0xDE
          bytes.insert(rng.Below(bytes.size() + 1), "\xDE\xAD\xBE\xEF");
          return campaign::Generated{bytes, ""};
        });
    out.pass = out.pass && report.crashes == 100 && report.runs == 100;
    out.detail += Format("planted crashes detected %zu/100; ", report.crashes);
  }

  // Random coverage files against a brute-force union of what was written.
  {
    Rng rng(111);
    std::set<std::pair<std::string, std::uint64_t>> expected;
    campaign::CoverageSet merged;
    for (int f = 0; f < 50; ++f) {
      std::string text;
      const std::size_t lines = rng.Below(300);
      for (std::size_t l = 0; l < lines; ++l) {
        const std::string unit = "unit" + std::to_string(rng.Below(6));
        const std::uint64_t block = rng.Below(500);
        expected.emplace(unit, block);
        text += unit + "," + std::to_string(block) + (rng.Below(10) == 0 ? "\r\n" : "\n");
      }
      const fs::path path = dir / ("cov-" + std::to_string(f) + ".txt");
      io::WriteFile(path, text);
      merged.Merge(campaign::IngestCoverage(path));
    }
    const bool equal = merged.blocks() == expected;
    out.pass = out.pass && equal;
    out.detail += Format("coverage union %zu blocks, brute force %zu%s; ", merged.size(),
                         expected.size(), equal ? " (identical)" : " (DIFFERENT)");
  }

  // The same union through a campaign: the stub reports one block per
  // distinct input byte.
  {
    campaign::CampaignConfig config;
    config.out_dir = dir / "coverage-campaign";
    config.command = {NEUROFUZZ_STUB_TARGET, "--coverage", "{coverage}", "{input}"};
    config.n = 50;
    config.parallelism = 4;
    config.master_seed = 12;
    std::set<std::uint8_t> bytes_seen;
    std::vector<std::string> inputs(config.n);
    const campaign::CampaignReport report =
        campaign::RunCampaign(config, [&](std::size_t i, std::uint64_t seed) {
          Rng rng(seed);
          std::string bytes(1 + rng.Below(20), '\0');
          for (char& c : bytes) c = static_cast<char>(rng.Below(256));
          inputs[i] = bytes;
          return campaign::Generated{bytes, ""};
        });
    for (const std::string& in : inputs) bytes_seen.insert(in.begin(), in.end());
    out.pass = out.pass && report.coverage_blocks == bytes_seen.size();
    out.detail += Format("campaign coverage %zu blocks, brute force %zu", report.coverage_blocks,
                         bytes_seen.size());
  }
  fs::remove_all(dir);
  return out;
}

// ---------------------------------------------------------------------------
// 12. CLI determinism.

Outcome CliDeterminism() {
  const fs::path dir = testing::TempDir("acceptance-cli");
  std::vector<std::string> mismatched;
  std::size_t checked = 0;
  std::string failure;

  auto run = [&](const std::vector<std::string>& args) {
    const testing::CliResult r = testing::RunCli(dir, args);
    if (r.exit_code != 0 && failure.empty()) {
      failure = args[0] + " exited " + std::to_string(r.exit_code) + ": " + r.err;
    }
    return r;
  };
  // Runs `args` twice, with `{out}` replaced by two directories, and compares.
  auto twice = [&](const std::string& name, std::vector<std::string> args,
                   const std::string& compare_subdir = "", bool compare_stdout = true) {
    std::map<std::string, std::string> trees[2];
    std::string stdouts[2];
    for (int k = 0; k < 2; ++k) {
      const std::string out = name + (k == 0 ? "-a" : "-b");
      std::vector<std::string> concrete = args;
      for (std::string& a : concrete) {
        if (a == "{out}") a = out;
      }
      stdouts[k] = run(concrete).out;
      // Progress messages name the output directory.
      for (std::size_t at; (at = stdouts[k].find(out)) != std::string::npos;) {
        stdouts[k].replace(at, out.size(), "{out}");
      }
      trees[k] = testing::ReadTree(dir / out / compare_subdir);
    }
    ++checked;
    const bool produced = !trees[0].empty() || !stdouts[0].empty();
    if (!produced || trees[0] != trees[1] || (compare_stdout && stdouts[0] != stdouts[1])) {
      mismatched.push_back(name);
    }
  };

  const std::string seed = "--seed=21";
  const std::string small = "--min-len=60";
  const std::string small_max = "--max-len=90";
  twice("synth-oracle", {"synth-oracle", "--out", "{out}", "--objects", "300", "--host-objects",
                         "8", seed});
  twice("preprocess", {"preprocess", "--input", "synth-oracle-a/seeds", "--out", "{out}", seed});
  twice("train", {"train", "--corpus", "preprocess-a", "--out", "{out}", "--model-preset", "1",
                  "--epochs", "2", "--window", "20", seed});
  const std::string ckpt = "train-a/final.ckpt";
  twice("eval", {"eval", "--checkpoint", ckpt, "--split", "test", "--out", "{out}", seed});
  twice("generate", {"generate", "--checkpoint", ckpt, "--out", "{out}", "--n", "10", "--cap",
                     "90", seed});
  twice("fuzz-data", {"fuzz-data", "--checkpoint", ckpt, "--out", "{out}", "--n", "10", small,
                      small_max, seed});
  twice("fuzz-meta", {"fuzz-meta", "--checkpoint", ckpt, "--out", "{out}", "--n", "10",
                      "--host", "synth-oracle-a/host.pdf", small, small_max, seed});
  twice("assemble", {"assemble", "--host", "synth-oracle-a/host.pdf", "--inputs", "fuzz-data-a",
                     "--mode", "mou", "--fraction", "1/4", "--out", "{out}", seed});
  const std::string target = std::string(NEUROFUZZ_STUB_TARGET) + " {input}";
  const std::vector<std::string> campaign = {
      "campaign", "--checkpoint", ckpt, "--host", "synth-oracle-a/host.pdf", "--target", target,
      "--n", "16", small, small_max, seed, "--out"};
  for (const char* parallelism : {"1", "8"}) {
    std::vector<std::string> args = campaign;
    args.push_back(std::string("campaign-p") + parallelism);
    args.push_back("--parallelism");
    args.push_back(parallelism);
    run(args);
  }
  ++checked;
  const auto p1 = testing::ReadTree(dir / "campaign-p1" / "inputs");
  const auto p8 = testing::ReadTree(dir / "campaign-p8" / "inputs");
  if (p1.empty() || p1 != p8) mismatched.push_back("campaign parallelism 1 vs 8");
  twice("campaign", [&] {
    std::vector<std::string> args = campaign;
    args.push_back("{out}");
    return args;
  }(), "inputs", /*compare_stdout=*/false);
  twice("report", {"report", "--campaign", "campaign-p1", "--format", "structured"});

  std::string names;
  for (const std::string& n : mismatched) names += (names.empty() ? "" : ", ") + n;
  fs::remove_all(dir);
  if (!failure.empty()) return {false, "command failed: " + failure.substr(0, 300)};
  return {mismatched.empty(),
          Format("%zu comparisons, %zu mismatched%s%s", checked, mismatched.size(),
                 names.empty() ? "" : ": ", names.c_str())};
}

// ---------------------------------------------------------------------------

int Main(int argc, char** argv) {
  std::set<int> only;
  std::FILE* log = nullptr;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--reuse-model" && i + 1 < argc) {
      g_reuse_dir = fs::path(argv[++i]);
    } else if (arg == "--log" && i + 1 < argc) {
      log = std::fopen(argv[++i], "w");
      if (log == nullptr) {
        std::fprintf(stderr, "cannot open %s\n", argv[i]);
        return 2;
      }
    } else {
      try {
        only.insert(std::stoi(arg));
      } catch (const std::exception&) {
        std::fprintf(stderr, "usage: acceptance [--reuse-model DIR] [--log FILE] [ID...]\n");
        return 2;
      }
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "perplexity ceiling", 1, PerplexityCeiling},
      {2, "perplexity base identity", 5, PerplexityBases},
      {3, "gradient correctness", 60, GradientCheck},
      {4, "learnability", 15 * 60, Learnability},
      {5, "termination", 30, Termination},
      {6, "fuzz-rate calibration", 30, FuzzRate},
      {7, "propagation asymmetry", 30, Propagation},
      {8, "diversity behavior", 10 * 60, DiversityBehavior},
      {9, "stage targeting", 10 * 60, StageTargeting},
      {10, "incremental update validity", 30, IncrementalUpdates},
      {11, "harness fidelity", 60, HarnessFidelity},
      {12, "determinism", 10 * 60, CliDeterminism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    // Criteria that share the trained model are timed without the training.
    if ((c.id == 8 || c.id == 9) && !only.contains(4)) {
      try {
        SharedModel();
      } catch (const std::exception&) {
      }
    }
    const auto start = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (out.charged_seconds >= 0) seconds = out.charged_seconds;
    const bool in_budget = seconds < c.budget_seconds;
    const bool pass = out.pass && in_budget;
    failures += !pass;
    for (std::FILE* f : {stdout, log}) {
      if (f == nullptr) continue;
      std::fprintf(f, "[%s] %d %s: %s (%.1f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL",
                   c.id, c.name, out.detail.c_str(), seconds, c.budget_seconds,
                   in_budget ? "" : ", over budget");
      std::fflush(f);
    }
  }
  if (log != nullptr) std::fclose(log);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace neurofuzz::acceptance

int main(int argc, char** argv) { return neurofuzz::acceptance::Main(argc, argv); }
