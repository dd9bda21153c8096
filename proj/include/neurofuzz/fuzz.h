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

// Data and metadata neural fuzzing.
//
// Both algorithms sample the model symbol by symbol like the plain sampler,
// but may replace a sampled symbol c with the least likely symbol:
//
//   data:      p(c) < alpha, c outside Chars(BT, ET), p_fuzz < FR.
//              The replacement also enters the sliding window.
//   metadata:  p(c) > beta, p_fuzz < FR.
//              The window always receives the original c.
//
// Generation stops once the output ends with ET, or when it reaches MaxLen
// symbols (drawn uniformly from [a, b]), in which case ET is appended. Each
// BT occurrence in the result is then replaced by a mutated stored stream.
//
// Randomness comes from independent streams derived from settings.seed:
// "maxlen", "sample" (identical to the plain sampler), "fuzz" and "binary".

#ifndef NEUROFUZZ_FUZZ_H_
#define NEUROFUZZ_FUZZ_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neurofuzz/corpus.h"
#include "neurofuzz/rng.h"
#include "neurofuzz/sampler.h"

namespace neurofuzz::fuzz {

inline constexpr double kDefaultBinaryRatio = 0.01;

struct FuzzSettings {
  double diversity = 1.0;
  double fuzz_rate = 0.1;
  double alpha = 0.5;
  double beta = 0.9;
  int min_len = 450;  // a
  int max_len = 550;  // b
  std::string et{corpus::kDefaultEndToken};
  std::string bt{corpus::kDefaultBinaryToken};
  double binary_ratio = kDefaultBinaryRatio;
  std::uint64_t seed = 0;
  // Compare thresholds against the model's probability instead of the
  // diversity-reshaped one.
  bool raw_probability = false;

  // Throws InvalidArgumentError.
  void Validate(int prefix_length) const;
};

enum class Algorithm { kData, kMetadata };

const char* AlgorithmName(Algorithm algorithm);

struct FuzzEvent {
  std::size_t position = 0;  // in the symbol output, prefix included
  std::uint8_t original = 0;
  std::uint8_t replacement = 0;
};

struct BinaryInsertion {
  std::size_t position = 0;  // byte offset of the framed stream in `bytes`
  std::size_t length = 0;    // framed length in bytes
  std::uint64_t part_id = 0;
  std::size_t mutated = 0;   // bytes changed in the body
};

struct Provenance {
  std::string algorithm;
  std::string checkpoint_id;
  std::string prefix_origin;
  std::uint64_t seed = 0;
  int max_len = 0;
};

struct TestDatum {
  std::string bytes;  // final content, binary parts inserted
  std::string text;   // generated text before binary insertion
  std::vector<int> symbols;
  Provenance provenance;
  std::vector<FuzzEvent> fuzz_trace;
  std::vector<BinaryInsertion> binary_insertions;
  std::size_t generated = 0;  // symbols produced by the loop (ET padding excluded)
};

// Per-step view for tests and tracing. `window` is the sliding prefix after
// the step.
struct StepRecord {
  std::size_t position = 0;
  int sampled = 0;
  int emitted = 0;
  double probability = 0.0;
  bool eligible = false;  // threshold and protection tests passed
  bool fuzzed = false;    // eligible, gated in by FR and actually changed
  std::span<const int> window;
};
using StepObserver = std::function<void(const StepRecord&)>;

std::set<std::uint8_t> CharsOf(std::span<const std::string> tokens);

// Overwrites ceil(ratio * len) distinct positions with bytes that differ from
// the originals. Returns the number of changed bytes via `changed`.
std::string MutateBinaryPart(std::string_view bytes, double ratio, Rng& rng,
                             std::size_t* changed = nullptr);

// Replaces each BT occurrence, left to right, with a framed stream built from
// a uniformly drawn part whose body is mutated at `ratio`. Throws
// InvalidArgumentError if BT occurs and the store is empty.
std::string AddBinaryParts(std::string_view text, std::string_view bt,
                           const corpus::BinaryPartStore& store, double ratio,
                           Rng& rng, std::vector<BinaryInsertion>* insertions);

// `store` may be null when no BT can occur. The vocabulary maps symbols to
// bytes and must match the predictor.
TestDatum NeuralFuzz(Algorithm algorithm, sampler::Predictor& predictor,
                     std::span<const int> prefix, const FuzzSettings& settings,
                     const corpus::Vocabulary& vocabulary,
                     const corpus::BinaryPartStore* store,
                     const StepObserver& observer = {});

inline TestDatum DataNeuralFuzz(sampler::Predictor& predictor,
                                std::span<const int> prefix,
                                const FuzzSettings& settings,
                                const corpus::Vocabulary& vocabulary,
                                const corpus::BinaryPartStore* store,
                                const StepObserver& observer = {}) {
  return NeuralFuzz(Algorithm::kData, predictor, prefix, settings, vocabulary,
                    store, observer);
}

inline TestDatum MetadataNeuralFuzz(sampler::Predictor& predictor,
                                    std::span<const int> prefix,
                                    const FuzzSettings& settings,
                                    const corpus::Vocabulary& vocabulary,
                                    const corpus::BinaryPartStore* store,
                                    const StepObserver& observer = {}) {
  return NeuralFuzz(Algorithm::kMetadata, predictor, prefix, settings,
                    vocabulary, store, observer);
}

// JSON sidecar describing how a datum was produced.
std::string ProvenanceJson(const TestDatum& datum);

}  // namespace neurofuzz::fuzz

#endif  // NEUROFUZZ_FUZZ_H_
