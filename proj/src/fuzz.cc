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

#include "neurofuzz/fuzz.h"

#include <cmath>

#include "json.hpp"
#include "neurofuzz/errors.h"

namespace neurofuzz::fuzz {

void FuzzSettings::Validate(int prefix_length) const {
  if (!(diversity > 0.0)) throw InvalidArgumentError("diversity must be > 0");
  if (!(fuzz_rate > 0.0 && fuzz_rate <= 1.0)) {
    throw InvalidArgumentError("fuzzing rate must be in (0, 1]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgumentError("alpha must be in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgumentError("beta must be in (0, 1)");
  if (min_len > max_len) throw InvalidArgumentError("length bounds need a <= b");
  if (min_len < prefix_length) {
    throw InvalidArgumentError("lower length bound must be >= the prefix length");
  }
  if (et.empty()) throw InvalidArgumentError("end token must not be empty");
  if (bt.empty()) throw InvalidArgumentError("binary token must not be empty");
  if (!(binary_ratio >= 0.0 && binary_ratio <= 1.0)) {
    throw InvalidArgumentError("binary mutation ratio must be in [0, 1]");
  }
}

const char* AlgorithmName(Algorithm algorithm) {
  return algorithm == Algorithm::kData ? "data" : "metadata";
}

std::set<std::uint8_t> CharsOf(std::span<const std::string> tokens) {
  std::set<std::uint8_t> out;
  for (const std::string& token : tokens) {
    for (char c : token) out.insert(static_cast<std::uint8_t>(c));
  }
  return out;
}

std::string MutateBinaryPart(std::string_view bytes, double ratio, Rng& rng,
                             std::size_t* changed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw InvalidArgumentError("mutation ratio must be in [0, 1]");
  }
  std::string out(bytes);
  // The epsilon keeps exact products such as 0.01 * 10000 from rounding up.
  const double raw = ratio * static_cast<double>(bytes.size());
  const std::size_t k = std::min(
      bytes.size(), static_cast<std::size_t>(std::max(0.0, std::ceil(raw - 1e-9))));
  for (std::size_t pos : rng.SampleWithoutReplacement(bytes.size(), k)) {
    const auto original = static_cast<std::uint8_t>(out[pos]);
    out[pos] = static_cast<char>((original + 1 + rng.Below(255)) & 0xff);
  }
  if (changed != nullptr) *changed = k;
  return out;
}

std::string AddBinaryParts(std::string_view text, std::string_view bt,
                           const corpus::BinaryPartStore& store, double ratio,
                           Rng& rng, std::vector<BinaryInsertion>* insertions) {
  std::string out;
  std::size_t from = 0;
  while (true) {
    const std::size_t hit = text.find(bt, from);
    if (hit == std::string_view::npos) break;
    if (store.empty()) {
      throw InvalidArgumentError(
          "generated text contains the binary token but the part store is empty");
    }
    out.append(text.substr(from, hit - from));
    const corpus::BinaryPart& part = store.at(rng.Below(store.size()));
    BinaryInsertion ins;
    ins.position = out.size();
    ins.part_id = part.part_id;
    const std::string framed = corpus::FrameStream(
        MutateBinaryPart(part.bytes, ratio, rng, &ins.mutated), part.eol);
    ins.length = framed.size();
    out.append(framed);
    if (insertions != nullptr) insertions->push_back(ins);
    from = hit + bt.size();
  }
  out.append(text.substr(from));
  return out;
}

TestDatum NeuralFuzz(Algorithm algorithm, sampler::Predictor& predictor,
                     std::span<const int> prefix, const FuzzSettings& settings,
                     const corpus::Vocabulary& vocabulary,
                     const corpus::BinaryPartStore* store,
                     const StepObserver& observer) {
  const int d = predictor.window();
  if (prefix.size() != static_cast<std::size_t>(d)) {
    throw InvalidArgumentError("prefix length must equal the model window");
  }
  if (vocabulary.size() != predictor.vocab_size()) {
    throw InvalidArgumentError("vocabulary does not match the predictor");
  }
  settings.Validate(d);
  const std::vector<int> et = vocabulary.Encode(settings.et);
  const std::string tokens[] = {settings.bt, settings.et};
  std::vector<bool> protected_symbol(static_cast<std::size_t>(vocabulary.size()), false);
  for (std::uint8_t byte : CharsOf(tokens)) {
    const int index = vocabulary.index_of(byte);
    if (index >= 0) protected_symbol[static_cast<std::size_t>(index)] = true;
  }

  Rng len_rng(DeriveSeed(settings.seed, "maxlen"));
  Rng sample_rng(DeriveSeed(settings.seed, "sample"));
  Rng fuzz_rng(DeriveSeed(settings.seed, "fuzz"));
  const int max_len =
      static_cast<int>(len_rng.UniformInt(settings.min_len, settings.max_len));

  TestDatum datum;
  datum.provenance.algorithm = AlgorithmName(algorithm);
  datum.provenance.seed = settings.seed;
  datum.provenance.max_len = max_len;
  std::vector<int>& td = datum.symbols;
  td.assign(prefix.begin(), prefix.end());
  std::vector<int> window(prefix.begin(), prefix.end());

  while (true) {
    if (td.size() >= static_cast<std::size_t>(max_len)) {
      td.insert(td.end(), et.begin(), et.end());
      break;
    }
    const model::Distribution dist = predictor.Predict(window);
    const sampler::Sample s =
        sampler::SampleSymbol(dist, settings.diversity, sample_rng);
    const double p = settings.raw_probability ? s.raw_probability : s.probability;
    const double p_fuzz = fuzz_rng.Uniform01();

    bool eligible;
    if (algorithm == Algorithm::kData) {
      eligible = p < settings.alpha && !protected_symbol[static_cast<std::size_t>(s.symbol)];
    } else {
      eligible = p > settings.beta;
    }
    int emitted = s.symbol;
    if (eligible && p_fuzz < settings.fuzz_rate) emitted = dist.Argmin();
    const bool fuzzed = emitted != s.symbol;
    if (fuzzed) {
      datum.fuzz_trace.push_back({td.size(), vocabulary.symbol(s.symbol),
                                  vocabulary.symbol(emitted)});
    }
    td.push_back(emitted);
    ++datum.generated;
    window.erase(window.begin());
    window.push_back(algorithm == Algorithm::kData ? emitted : s.symbol);
    if (observer) {
      observer({td.size() - 1, s.symbol, emitted, p, eligible, fuzzed, window});
    }
    if (sampler::EndsWith(td, et)) break;
  }

  datum.text = vocabulary.Decode(td);
  if (datum.text.find(settings.bt) != std::string::npos) {
    Rng binary_rng(DeriveSeed(settings.seed, "binary"));
    static const corpus::BinaryPartStore kEmpty;
    datum.bytes = AddBinaryParts(datum.text, settings.bt,
                                 store != nullptr ? *store : kEmpty,
                                 settings.binary_ratio, binary_rng,
                                 &datum.binary_insertions);
  } else {
    datum.bytes = datum.text;
  }
  return datum;
}

std::string ProvenanceJson(const TestDatum& datum) {
  nlohmann::ordered_json j;
  j["algorithm"] = datum.provenance.algorithm;
  j["checkpoint_id"] = datum.provenance.checkpoint_id;
  j["prefix_origin"] = datum.provenance.prefix_origin;
  j["seed"] = datum.provenance.seed;
  j["max_len"] = datum.provenance.max_len;
  j["length"] = datum.bytes.size();
  j["generated_symbols"] = datum.generated;
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const FuzzEvent& e : datum.fuzz_trace) {
    trace.push_back({{"position", e.position},
                     {"original", e.original},
                     {"replacement", e.replacement}});
  }
  j["fuzz_trace"] = std::move(trace);
  nlohmann::ordered_json bins = nlohmann::ordered_json::array();
  for (const BinaryInsertion& b : datum.binary_insertions) {
    bins.push_back({{"position", b.position},
                    {"length", b.length},
                    {"part_id", b.part_id},
                    {"mutated", b.mutated}});
  }
  j["binary_insertions"] = std::move(bins);
  return j.dump(2) + "\n";
}

}  // namespace neurofuzz::fuzz
