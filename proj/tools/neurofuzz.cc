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

// Command-line entry point. Every option can also be set through an
// environment variable NEUROFUZZ_<OPTION> (upper case, dashes as
// underscores); flags win over the environment. Exit codes: 0 success,
// 1 domain error, 2 usage error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "neurofuzz/assembly.h"
#include "neurofuzz/campaign.h"
#include "neurofuzz/checkpoint.h"
#include "neurofuzz/corpus.h"
#include "neurofuzz/errors.h"
#include "neurofuzz/fuzz.h"
#include "neurofuzz/io.h"
#include "neurofuzz/model.h"
#include "neurofuzz/oracle.h"
#include "neurofuzz/rng.h"
#include "neurofuzz/sampler.h"

namespace {

namespace fs = std::filesystem;
using namespace neurofuzz;

constexpr char kTrainConfig[] = "train_config.json";

struct Options {
  std::uint64_t seed = 0;
  std::string out;
  std::string input;
  std::string corpus;
  std::string checkpoint;
  std::string host;
  std::string et{corpus::kDefaultEndToken};
  std::string bt{corpus::kDefaultBinaryToken};
  double train_ratio = 0.8;
  double validation_ratio = 0.1;
  double test_ratio = 0.1;
  // Model and training.
  int preset = 2;
  int epochs = 50;
  double learning_rate = 1e-3;
  int batch_size = 128;
  int window = 50;
  int jump = 0;  // 0: the preset's jump step
  std::string split = "validation";
  // Generation and fuzzing.
  std::size_t n = 10;
  double diversity = 1.0;
  int cap = 600;
  fuzz::FuzzSettings fuzz;
  bool raw_probability = false;
  std::string mode = "sou";
  std::string fraction = "1/3";
  std::vector<std::string> inputs;
  // Campaign.
  std::string target;
  std::string algorithm = "meta";
  int parallelism = 1;
  double timeout = campaign::kDefaultTimeoutSeconds;
  std::string campaign_id = "campaign";
  std::string format = "text";
  // Synthetic oracle.
  std::size_t objects = 5000;
  std::size_t host_objects = 9;
};

std::string EnvName(const std::string& long_name) {
  std::string out = "NEUROFUZZ_";
  for (char c : long_name) out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(c)));
  return out;
}

// Attaches environment overrides to every named option of `app`.
void AddEnvOverrides(CLI::App* app) {
  for (CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    opt->envname(EnvName(name));
  }
}

void PrintConfig(const CLI::App* sub) {
  nlohmann::ordered_json j;
  j["command"] = sub->get_name();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    std::vector<std::string> values = opt->results();
    if (values.empty() && !opt->get_default_str().empty()) {
      values.push_back(opt->get_default_str());
    }
    if (opt->get_expected_max() > 1) {
      j[name] = values;
    } else if (!values.empty()) {
      j[name] = values.front();
    } else {
      j[name] = nullptr;
    }
  }
  std::cerr << "config " << j.dump() << "\n";
}

assembly::Fraction ParseFraction(const std::string& text) {
  const std::size_t slash = text.find('/');
  try {
    assembly::Fraction f;
    if (slash == std::string::npos) {
      f.num = std::stoull(text);
      f.den = 1;
    } else {
      f.num = std::stoull(text.substr(0, slash));
      f.den = std::stoull(text.substr(slash + 1));
    }
    if (f.den == 0 || f.num == 0 || f.num > f.den) throw std::invalid_argument("range");
    return f;
  } catch (const std::exception&) {
    throw InvalidArgumentError("fraction must look like 1/3 and lie in (0, 1]");
  }
}

assembly::UpdateMode ParseMode(const std::string& mode) {
  if (mode == "sou") return assembly::UpdateMode::kSou;
  if (mode == "mou") return assembly::UpdateMode::kMou;
  throw InvalidArgumentError("mode must be sou or mou");
}

fs::path CorpusFor(const Options& o) {
  if (!o.corpus.empty()) return o.corpus;
  const fs::path config = fs::path(o.checkpoint).parent_path() / kTrainConfig;
  if (fs::exists(config)) {
    const auto j = nlohmann::json::parse(io::ReadFile(config));
    if (j.contains("corpus")) return j["corpus"].get<std::string>();
  }
  throw ConfigError("no --corpus given and none recorded next to the checkpoint");
}

// Writes `files` (relative name -> bytes) under `out`.
void WriteAll(const fs::path& out,
              const std::vector<std::pair<std::string, std::string>>& files) {
  for (const auto& [name, bytes] : files) io::WriteFile(out / name, bytes);
}

int Preprocess(const Options& o) {
  corpus::PreprocessResult pre = corpus::PreprocessDirectory(o.input, o.bt);
  if (pre.objects.size() < 3) {
    throw InvalidArgumentError("need at least 3 usable objects, found " +
                               std::to_string(pre.objects.size()));
  }
  corpus::PreprocessedCorpus c = corpus::BuildCorpus(
      pre.objects, o.et, {o.train_ratio, o.validation_ratio, o.test_ratio}, o.seed);
  c.bt = o.bt;
  c.store = std::move(pre.store);
  corpus::WriteBundle(c, o.out, &pre.stats);
  std::printf("files %zu, objects %zu kept %zu (unterminated stream %zu, non-text %zu), "
              "binary parts %zu, splits %zu/%zu/%zu, vocabulary %d\n",
              pre.stats.files, pre.stats.objects_found, pre.stats.objects_kept,
              pre.stats.rejected_unterminated_stream, pre.stats.rejected_non_text,
              c.store.size(), c.train_objects, c.validation_objects, c.test_objects,
              c.vocabulary.size());
  return 0;
}

int SynthOracle(const Options& o) {
  const oracle::MiniFormatSpec spec;
  const std::vector<std::string> objects = oracle::SynthCorpus(spec, o.objects, o.seed);
  std::string seed_file;
  for (const std::string& obj : objects) seed_file.append(obj).append("\n");
  const fs::path out = o.out;
  io::WriteFile(out / "seeds" / "objects.txt", seed_file);
  io::WriteFile(out / "host.pdf",
                oracle::SynthHost(spec, o.host_objects, DeriveSeed(o.seed, "host")));
  corpus::PreprocessResult pre = corpus::PreprocessFiles(std::vector<std::string>{seed_file}, o.bt);
  corpus::PreprocessedCorpus c = corpus::BuildCorpus(
      pre.objects, o.et, {o.train_ratio, o.validation_ratio, o.test_ratio}, o.seed);
  c.bt = o.bt;
  c.store = std::move(pre.store);
  corpus::WriteBundle(c, out / "bundle", &pre.stats);
  std::printf("wrote %zu objects, host with %zu objects, bundle with vocabulary %d\n",
              objects.size(), o.host_objects, c.vocabulary.size());
  return 0;
}

int Train(const Options& o) {
  const corpus::PreprocessedCorpus c = corpus::ReadBundle(o.corpus);
  const model::ModelSpec spec = model::Preset(o.preset, c.vocabulary.size(), o.window);
  const int jump = o.jump > 0 ? o.jump : model::PresetJump(o.preset);
  const corpus::WindowedDataset train(c.vocabulary.Encode(c.train), spec.window, jump);
  const corpus::WindowedDataset validation(c.vocabulary.Encode(c.validation), spec.window, jump);
  if (train.empty()) throw InvalidArgumentError("training split is shorter than the window");

  const fs::path out = o.out;
  nlohmann::ordered_json config;
  config["corpus"] = fs::absolute(o.corpus).lexically_normal().string();
  config["preset"] = o.preset;
  config["jump"] = jump;
  config["window"] = spec.window;
  io::WriteFile(out / kTrainConfig, config.dump(2) + "\n");

  model::TrainOptions options;
  options.epochs = o.epochs;
  options.learning_rate = o.learning_rate;
  options.batch_size = o.batch_size;
  options.seed = o.seed;
  std::string log;
  options.on_epoch = [&](const model::Checkpoint& ckpt) {
    char name[32];
    std::snprintf(name, sizeof(name), "epoch-%03d.ckpt", ckpt.epoch);
    model::SaveCheckpoint(ckpt, out / name);
    model::SaveCheckpoint(ckpt, out / "final.ckpt");
    std::printf("epoch %d loss %.6f accuracy %.6f error %.6f perplexity %.6f\n",
                ckpt.epoch, ckpt.train_loss, ckpt.metrics.accuracy,
                ckpt.metrics.error, ckpt.metrics.perplexity);
    std::fflush(stdout);
    nlohmann::ordered_json line;
    line["epoch"] = ckpt.epoch;
    line["loss"] = ckpt.train_loss;
    line["accuracy"] = ckpt.metrics.accuracy;
    line["error"] = ckpt.metrics.error;
    line["perplexity"] = ckpt.metrics.perplexity;
    log.append(line.dump()).append("\n");
    io::WriteFile(out / "train_log.jsonl", log);
  };
  const auto checkpoints = model::Train(
      train, validation.empty() ? nullptr : &validation, spec, c.vocabulary, options);
  if (static_cast<int>(checkpoints.size()) < o.epochs) {
    std::fprintf(stderr, "training stopped after %zu epochs: non-finite loss\n",
                 checkpoints.size());
    return 1;
  }
  return 0;
}

int Eval(const Options& o) {
  const model::Checkpoint ckpt = model::LoadCheckpoint(o.checkpoint);
  const corpus::PreprocessedCorpus c = corpus::ReadBundle(CorpusFor(o));
  const std::string* text = nullptr;
  if (o.split == "train") text = &c.train;
  if (o.split == "validation") text = &c.validation;
  if (o.split == "test") text = &c.test;
  if (text == nullptr) throw InvalidArgumentError("split must be train, validation or test");
  const int jump = o.jump > 0 ? o.jump : 1;
  const corpus::WindowedDataset data(ckpt.vocabulary.Encode(*text), ckpt.spec.window, jump);
  const model::Metrics m = model::Evaluate(ckpt.params, data);
  nlohmann::ordered_json j;
  j["split"] = o.split;
  j["examples"] = m.examples;
  j["accuracy"] = m.accuracy;
  j["error"] = m.error;
  j["perplexity"] = m.perplexity;
  const std::string dump = j.dump(2) + "\n";
  std::fputs(dump.c_str(), stdout);
  if (!o.out.empty()) io::WriteFile(fs::path(o.out) / "metrics.json", dump);
  return 0;
}

struct Loaded {
  std::shared_ptr<const model::Checkpoint> ckpt;
  std::shared_ptr<const corpus::PreprocessedCorpus> corpus;
  std::vector<int> test;
};

Loaded Load(const Options& o) {
  Loaded l;
  l.ckpt = std::make_shared<const model::Checkpoint>(model::LoadCheckpoint(o.checkpoint));
  l.corpus = std::make_shared<const corpus::PreprocessedCorpus>(corpus::ReadBundle(CorpusFor(o)));
  l.test = l.ckpt->vocabulary.Encode(l.corpus->test);
  return l;
}

int Generate(const Options& o) {
  const Loaded l = Load(o);
  sampler::ModelPredictor predictor(
      std::shared_ptr<const model::ModelParams<float>>(l.ckpt, &l.ckpt->params));
  const std::vector<int> et = l.ckpt->vocabulary.Encode(o.et);
  const std::string ckpt_id = model::CheckpointId(*l.ckpt);
  for (std::size_t i = 0; i < o.n; ++i) {
    const std::uint64_t seed = campaign::DatumSeed(o.seed, i);
    Rng prefix_rng(DeriveSeed(seed, "prefix"));
    const std::vector<int> prefix = sampler::SelectPrefix(l.test, l.ckpt->spec.window, prefix_rng);
    const std::vector<int> out = sampler::Generate(
        predictor, prefix, {o.diversity, seed, o.cap}, et);
    const std::string text = l.ckpt->vocabulary.Decode(out);
    Rng binary_rng(DeriveSeed(seed, "binary"));
    std::vector<fuzz::BinaryInsertion> insertions;
    const std::string bytes = fuzz::AddBinaryParts(text, o.bt, l.corpus->store,
                                                   o.fuzz.binary_ratio, binary_rng, &insertions);
    nlohmann::ordered_json side;
    side["algorithm"] = "generate";
    side["checkpoint_id"] = ckpt_id;
    side["seed"] = seed;
    side["diversity"] = o.diversity;
    side["binary_insertions"] = insertions.size();
    const std::string id = campaign::DatumId("gen", i);
    WriteAll(o.out, {{id + ".pdf", bytes}, {id + ".json", side.dump(2) + "\n"}});
  }
  std::printf("generated %zu files\n", o.n);
  return 0;
}

int Fuzz(const Options& o, fuzz::Algorithm algorithm) {
  const Loaded l = Load(o);
  fuzz::FuzzSettings settings = o.fuzz;
  settings.raw_probability = o.raw_probability;
  settings.et = o.et;
  settings.bt = o.bt;
  std::shared_ptr<const assembly::HostDocument> host;
  if (!o.host.empty()) {
    host = std::make_shared<const assembly::HostDocument>(assembly::ParseHost(io::ReadFile(o.host)));
  }
  if (host) {
    campaign::NeuralGeneratorConfig g;
    g.checkpoint = l.ckpt;
    g.corpus = l.corpus;
    g.host = host;
    g.algorithm = algorithm;
    g.settings = settings;
    g.mode = ParseMode(o.mode);
    g.fraction = ParseFraction(o.fraction);
    const campaign::Generator gen = campaign::MakeNeuralGenerator(g);
    for (std::size_t i = 0; i < o.n; ++i) {
      const campaign::Generated out = gen(i, campaign::DatumSeed(o.seed, i));
      const std::string id = campaign::DatumId(o.campaign_id, i);
      WriteAll(o.out, {{id + ".pdf", out.bytes}, {id + ".json", out.sidecar}});
    }
  } else {
    sampler::ModelPredictor predictor(
        std::shared_ptr<const model::ModelParams<float>>(l.ckpt, &l.ckpt->params));
    const std::string ckpt_id = model::CheckpointId(*l.ckpt);
    for (std::size_t i = 0; i < o.n; ++i) {
      settings.seed = campaign::DatumSeed(o.seed, i);
      Rng prefix_rng(DeriveSeed(settings.seed, "prefix"));
      const std::size_t d = static_cast<std::size_t>(l.ckpt->spec.window);
      if (l.test.size() < d) throw ConfigError("test split is shorter than the model window");
      const std::size_t start = prefix_rng.Below(l.test.size() - d + 1);
      fuzz::TestDatum datum = fuzz::NeuralFuzz(
          algorithm, predictor, std::span<const int>(l.test).subspan(start, d), settings,
          l.ckpt->vocabulary, &l.corpus->store);
      datum.provenance.checkpoint_id = ckpt_id;
      datum.provenance.prefix_origin = "test:" + std::to_string(start);
      const std::string id = campaign::DatumId(o.campaign_id, i);
      WriteAll(o.out, {{id + ".pdf", datum.bytes}, {id + ".json", fuzz::ProvenanceJson(datum)}});
    }
  }
  std::printf("wrote %zu test files to %s\n", o.n, o.out.c_str());
  return 0;
}

int Assemble(const Options& o) {
  const assembly::HostDocument host = assembly::ParseHost(io::ReadFile(o.host));
  std::vector<fs::path> inputs;
  for (const std::string& in : o.inputs) {
    if (fs::is_directory(in)) {
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().extension() != ".json") {
          inputs.push_back(entry.path());
        }
      }
    } else {
      inputs.push_back(in);
    }
  }
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) throw InvalidArgumentError("no input files to assemble");
  std::vector<std::string> bodies;
  for (const fs::path& p : inputs) bodies.push_back(io::ReadFile(p));
  const assembly::UpdateMode mode = ParseMode(o.mode);
  const assembly::Fraction fraction = ParseFraction(o.fraction);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Rng rng(DeriveSeed(DeriveSeed(o.seed, "assemble"), static_cast<std::uint64_t>(i)));
    const assembly::UpdatePlan plan = mode == assembly::UpdateMode::kSou
                                          ? assembly::PlanSou(host)
                                          : assembly::PlanMou(host, fraction, rng);
    std::vector<assembly::Replacement> replacements;
    for (std::size_t t = 0; t < plan.targets.size(); ++t) {
      const std::string& text = bodies[(i + t) % bodies.size()];
      replacements.push_back({plan.targets[t], assembly::MakeObjectBody(text, plan.targets[t])});
    }
    io::WriteFile(fs::path(o.out) / (inputs[i].stem().string() + ".pdf"),
                  assembly::IncrementalUpdate(host, replacements));
  }
  std::printf("assembled %zu files against a host with %zu objects\n", inputs.size(),
              host.object_count());
  return 0;
}

int Campaign(const Options& o) {
  const Loaded l = Load(o);
  campaign::NeuralGeneratorConfig g;
  g.checkpoint = l.ckpt;
  g.corpus = l.corpus;
  g.host = std::make_shared<const assembly::HostDocument>(assembly::ParseHost(io::ReadFile(o.host)));
  if (o.algorithm == "data") {
    g.algorithm = fuzz::Algorithm::kData;
  } else if (o.algorithm == "meta") {
    g.algorithm = fuzz::Algorithm::kMetadata;
  } else {
    throw InvalidArgumentError("algorithm must be data or meta");
  }
  g.settings = o.fuzz;
  g.settings.raw_probability = o.raw_probability;
  g.settings.et = o.et;
  g.settings.bt = o.bt;
  g.mode = ParseMode(o.mode);
  g.fraction = ParseFraction(o.fraction);
  campaign::CampaignConfig config;
  config.out_dir = o.out;
  config.command = campaign::SplitCommand(o.target);
  config.n = o.n;
  config.parallelism = o.parallelism;
  config.timeout_seconds = o.timeout;
  config.master_seed = o.seed;
  config.campaign_id = o.campaign_id;
  const campaign::CampaignReport report =
      campaign::RunCampaign(config, campaign::MakeNeuralGenerator(g));
  std::fputs(report.ToText().c_str(), stdout);
  return 0;
}

int Report(const Options& o) {
  fs::path path = o.input;
  if (fs::is_directory(path)) path /= "report.json";
  const campaign::CampaignReport report =
      campaign::CampaignReport::FromJson(io::ReadFile(path));
  const std::string text = o.format == "structured" ? report.ToJson() : report.ToText();
  if (o.format != "structured" && o.format != "text") {
    throw InvalidArgumentError("format must be text or structured");
  }
  std::fputs(text.c_str(), stdout);
  if (!o.out.empty()) {
    io::WriteFile(fs::path(o.out) / (o.format == "structured" ? "report.json" : "report.txt"), text);
  }
  return 0;
}

void AddSeed(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Master seed for all randomness");
}

void AddTokens(CLI::App* sub, Options& o) {
  sub->add_option("--et", o.et, "End token");
  sub->add_option("--bt", o.bt, "Binary token");
}

void AddSplit(CLI::App* sub, Options& o) {
  sub->add_option("--train-ratio", o.train_ratio, "Training share of objects");
  sub->add_option("--validation-ratio", o.validation_ratio, "Validation share");
  sub->add_option("--test-ratio", o.test_ratio, "Test share");
}

void AddFuzz(CLI::App* sub, Options& o) {
  sub->add_option("--diversity", o.fuzz.diversity, "Diversity D");
  sub->add_option("--fr", o.fuzz.fuzz_rate, "Fuzzing rate FR");
  sub->add_option("--alpha", o.fuzz.alpha, "Data fuzzing threshold");
  sub->add_option("--beta", o.fuzz.beta, "Metadata fuzzing threshold");
  sub->add_option("--min-len", o.fuzz.min_len, "Lower MaxLen bound a");
  sub->add_option("--max-len", o.fuzz.max_len, "Upper MaxLen bound b");
  sub->add_option("--binary-ratio", o.fuzz.binary_ratio, "Share of stream bytes mutated");
  sub->add_flag("--raw-probability", o.raw_probability,
                "Compare thresholds against the model probability before diversity");
  sub->add_option("--mode", o.mode, "Incremental update mode: sou or mou");
  sub->add_option("--fraction", o.fraction, "MOU fraction of host objects, e.g. 1/3");
  AddTokens(sub, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neurofuzz: neural file-format fuzzing toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.failure_message(CLI::FailureMessage::help);
  Options o;

  CLI::App* pre = app.add_subcommand("preprocess", "Build a corpus bundle from seed files");
  pre->add_option("--input", o.input, "Directory of seed files")->required()->check(CLI::ExistingDirectory);
  pre->add_option("--out", o.out, "Bundle directory")->required();
  AddTokens(pre, o);
  AddSplit(pre, o);
  AddSeed(pre, o);

  CLI::App* synth = app.add_subcommand("synth-oracle", "Write a synthetic corpus, bundle and host");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--objects", o.objects, "Number of objects")->check(CLI::PositiveNumber);
  synth->add_option("--host-objects", o.host_objects, "Objects in the host document")->check(CLI::PositiveNumber);
  AddTokens(synth, o);
  AddSplit(synth, o);
  AddSeed(synth, o);

  CLI::App* train = app.add_subcommand("train", "Train a model, one checkpoint per epoch");
  train->add_option("--corpus", o.corpus, "Corpus bundle")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", o.out, "Checkpoint directory")->required();
  train->add_option("--model-preset", o.preset, "Model preset 1-4")->check(CLI::Range(1, 4));
  train->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::PositiveNumber);
  train->add_option("--lr", o.learning_rate, "Adam learning rate");
  train->add_option("--batch-size", o.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  train->add_option("--window", o.window, "Input window d")->check(CLI::PositiveNumber);
  train->add_option("--jump", o.jump, "Jump step j (0: preset default)");
  AddSeed(train, o);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus split");
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--corpus", o.corpus, "Corpus bundle (default: the one used for training)");
  eval->add_option("--split", o.split, "train, validation or test");
  eval->add_option("--jump", o.jump, "Jump step (0: 1)");
  eval->add_option("--out", o.out, "Optional directory for metrics.json");
  AddSeed(eval, o);

  CLI::App* gen = app.add_subcommand("generate", "Generate test files without fuzzing");
  gen->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  gen->add_option("--corpus", o.corpus, "Corpus bundle (default: the one used for training)");
  gen->add_option("--out", o.out, "Output directory")->required();
  gen->add_option("--n", o.n, "Number of files")->check(CLI::PositiveNumber);
  gen->add_option("--diversity", o.diversity, "Diversity D");
  gen->add_option("--cap", o.cap, "Length cap in symbols");
  gen->add_option("--binary-ratio", o.fuzz.binary_ratio, "Share of stream bytes mutated");
  AddTokens(gen, o);
  AddSeed(gen, o);

  CLI::App* data = app.add_subcommand("fuzz-data", "Generate test files with data fuzzing");
  CLI::App* meta = app.add_subcommand("fuzz-meta", "Generate test files with metadata fuzzing");
  for (CLI::App* sub : {data, meta}) {
    sub->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
    sub->add_option("--corpus", o.corpus, "Corpus bundle (default: the one used for training)");
    sub->add_option("--host", o.host, "Host PDF; when given, outputs are incremental updates");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--n", o.n, "Number of files")->check(CLI::PositiveNumber);
    sub->add_option("--id", o.campaign_id, "File name prefix");
    AddFuzz(sub, o);
    AddSeed(sub, o);
  }

  CLI::App* asm_cmd = app.add_subcommand("assemble", "Wrap generated objects into incremental updates");
  asm_cmd->add_option("--host", o.host, "Host PDF")->required()->check(CLI::ExistingFile);
  asm_cmd->add_option("--inputs", o.inputs, "Generated files or directories")->required();
  asm_cmd->add_option("--out", o.out, "Output directory");
  asm_cmd->add_option("--mode", o.mode, "sou or mou");
  asm_cmd->add_option("--fraction", o.fraction, "MOU fraction, e.g. 1/3");
  AddSeed(asm_cmd, o);

  CLI::App* camp = app.add_subcommand("campaign", "Generate, run and monitor a fuzzing campaign");
  camp->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  camp->add_option("--corpus", o.corpus, "Corpus bundle (default: the one used for training)");
  camp->add_option("--host", o.host, "Host PDF")->required()->check(CLI::ExistingFile);
  camp->add_option("--target", o.target, "Target command with {input} and optional {coverage}")->required();
  camp->add_option("--out", o.out, "Campaign directory");
  camp->add_option("--n", o.n, "Number of test files")->check(CLI::PositiveNumber);
  camp->add_option("--parallelism", o.parallelism, "Concurrent target runs")->check(CLI::PositiveNumber);
  camp->add_option("--timeout", o.timeout, "Per-run timeout in seconds");
  camp->add_option("--algorithm", o.algorithm, "data or meta");
  camp->add_option("--id", o.campaign_id, "Campaign id");
  AddFuzz(camp, o);
  AddSeed(camp, o);

  CLI::App* report = app.add_subcommand("report", "Print a campaign report");
  report->add_option("--campaign", o.input, "Campaign directory or report.json")->required()->check(CLI::ExistingPath);
  report->add_option("--format", o.format, "text or structured");
  report->add_option("--out", o.out, "Optional directory for the rendered report");
  AddSeed(report, o);

  for (CLI::App* sub : app.get_subcommands({})) AddEnvOverrides(sub);

  // Commands whose --out is optional write to a fixed directory.
  for (CLI::App* sub : {data, meta, asm_cmd, camp}) {
    sub->get_option("--out")->default_str("neurofuzz-out");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (o.out.empty() && (sub == data || sub == meta || sub == asm_cmd || sub == camp)) {
    o.out = "neurofuzz-out";
  }
  PrintConfig(sub);
  try {
    if (sub == pre) return Preprocess(o);
    if (sub == synth) return SynthOracle(o);
    if (sub == train) return Train(o);
    if (sub == eval) return Eval(o);
    if (sub == gen) return Generate(o);
    if (sub == data) return Fuzz(o, fuzz::Algorithm::kData);
    if (sub == meta) return Fuzz(o, fuzz::Algorithm::kMetadata);
    if (sub == asm_cmd) return Assemble(o);
    if (sub == camp) return Campaign(o);
    if (sub == report) return Report(o);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
