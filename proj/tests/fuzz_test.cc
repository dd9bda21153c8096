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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "neurofuzz/errors.h"
#include "neurofuzz/sampler.h"
#include "test_util.h"

namespace neurofuzz::fuzz {
namespace {

using corpus::Vocabulary;
using model::Distribution;
using testing::FunctionPredictor;

// Letters, digits, space and the symbols the tokens need.
const Vocabulary& Vocab() {
  static const Vocabulary v = Vocabulary::FromText("abcdefghijklmnopqrstuvwxyz0123456789 <>/");
  return v;
}

int Sym(char c) { return Vocab().index_of(static_cast<std::uint8_t>(c)); }

std::vector<int> Prefix(int d) { return std::vector<int>(d, Sym(' ')); }

FuzzSettings Fixed(int len, std::uint64_t seed) {
  FuzzSettings s;
  s.min_len = len;
  s.max_len = len;
  s.seed = seed;
  return s;
}

TEST(CharsOfTest, Examples) {
  const std::vector<std::string> tokens = {"stream", "endobj"};
  const std::set<std::uint8_t> chars = CharsOf(tokens);
  EXPECT_EQ(chars.size(), 11u);
  EXPECT_EQ(chars, (std::set<std::uint8_t>{'s', 't', 'r', 'e', 'a', 'm', 'n', 'd', 'o', 'b', 'j'}));
  EXPECT_TRUE(CharsOf(std::vector<std::string>{}).empty());
  EXPECT_EQ(CharsOf(std::vector<std::string>{"aa"}), (std::set<std::uint8_t>{'a'}));
}

TEST(SettingsTest, DefaultsAndValidation) {
  const FuzzSettings s;
  EXPECT_EQ(s.diversity, 1.0);
  EXPECT_EQ(s.fuzz_rate, 0.1);
  EXPECT_EQ(s.alpha, 0.5);
  EXPECT_EQ(s.beta, 0.9);
  EXPECT_EQ(s.min_len, 450);
  EXPECT_EQ(s.max_len, 550);
  EXPECT_EQ(s.et, "endobj");
  EXPECT_EQ(s.bt, "stream");
  EXPECT_NO_THROW(s.Validate(50));
  EXPECT_THROW(s.Validate(451), InvalidArgumentError);
  FuzzSettings bad = s;
  bad.fuzz_rate = 0;
  EXPECT_THROW(bad.Validate(1), InvalidArgumentError);
  bad = s;
  bad.min_len = 600;
  EXPECT_THROW(bad.Validate(1), InvalidArgumentError);
  bad = s;
  bad.beta = 1.0;
  EXPECT_THROW(bad.Validate(1), InvalidArgumentError);
}

TEST(DataFuzzTest, ConfidentModelIsNeverFuzzed) {
  const int v = Vocab().size();
  // The only other symbol with mass is protected, so every unprotected
  // sample carries probability 0.96.
  Distribution dist;
  dist.probs.assign(v, 0.0);
  dist.probs[Sym('x')] = 0.96;
  dist.probs[Sym('e')] = 0.04;
  FunctionPredictor stub(v, 4, [&](std::span<const int>) { return dist; });
  FuzzSettings s = Fixed(300, 1);
  s.fuzz_rate = 1.0;
  std::size_t eligible = 0;
  const TestDatum td = DataNeuralFuzz(stub, Prefix(4), s, Vocab(), nullptr,
                                      [&](const StepRecord& r) {
                                        if (r.sampled == Sym('x')) EXPECT_EQ(r.probability, 0.96);
                                        eligible += r.eligible;
                                      });
  EXPECT_TRUE(td.fuzz_trace.empty());
  EXPECT_EQ(eligible, 0u);
  EXPECT_TRUE(td.text.ends_with("endobj"));
}

TEST(DataFuzzTest, LowProbabilitySymbolIsReplacedByArgmin) {
  const int v = Vocab().size();
  const int x = Sym('x');
  const int q = Sym('q');
  // 'x' carries 0.3, 'q' is the unique minimum, the rest share the remainder.
  Distribution dist;
  dist.probs.assign(v, (1.0 - 0.3 - 0.001) / (v - 2));
  dist.probs[x] = 0.3;
  dist.probs[q] = 0.001;
  FunctionPredictor stub(v, 4, [&](std::span<const int>) { return dist; });
  FuzzSettings s = Fixed(2000, 3);
  s.fuzz_rate = 1.0;
  std::size_t x_steps = 0;
  DataNeuralFuzz(stub, Prefix(4), s, Vocab(), nullptr, [&](const StepRecord& r) {
    if (r.sampled == x) {
      ++x_steps;
      EXPECT_EQ(r.emitted, q);
    }
  });
  EXPECT_GT(x_steps, 300u);
}

TEST(DataFuzzTest, ProtectedSymbolsAreNeverFuzzed) {
  const int v = Vocab().size();
  FunctionPredictor stub(v, 4, [&](std::span<const int>) { return Distribution::Uniform(v); });
  const std::set<std::uint8_t> guarded = CharsOf(std::vector<std::string>{"stream", "endobj"});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    FuzzSettings s = Fixed(500, seed);
    s.fuzz_rate = 1.0;
    corpus::BinaryPartStore store;
    store.Add({0, "payload", "\n", 0, 0});
    const TestDatum td = DataNeuralFuzz(stub, Prefix(4), s, Vocab(), &store);
    for (const FuzzEvent& e : td.fuzz_trace) {
      EXPECT_FALSE(guarded.contains(e.original));
      EXPECT_NE(e.original, e.replacement);
    }
  }
}

TEST(DataFuzzTest, NeverEndingModelStopsAtMaxLen) {
  const int v = Vocab().size();
  FunctionPredictor stub(v, 4, [&](std::span<const int>) { return testing::OneHot(v, Sym('z')); });
  const TestDatum td = DataNeuralFuzz(stub, Prefix(4), Fixed(500, 1), Vocab(), nullptr);
  EXPECT_EQ(td.symbols.size(), 506u);
  EXPECT_TRUE(td.text.ends_with("endobj"));
  EXPECT_EQ(td.provenance.max_len, 500);
  EXPECT_EQ(td.generated, 496u);
}

// Peaked on the successor of the last symbol, so trajectories matter.
Distribution Successor(std::span<const int> w, int v, double p) {
  return testing::Peaked(v, (w.back() + 1) % v, p);
}

TEST(MetadataFuzzTest, EmitsArgminYetFollowsTheUnfuzzedTrajectory) {
  const int v = Vocab().size();
  FunctionPredictor stub(v, 4, [&](std::span<const int> w) { return Successor(w, v, 0.95); });
  FuzzSettings s = Fixed(400, 17);
  s.fuzz_rate = 1.0;
  std::vector<int> sampled;
  std::size_t fuzzed = 0;
  const TestDatum td = MetadataNeuralFuzz(stub, Prefix(4), s, Vocab(), nullptr,
                                          [&](const StepRecord& r) {
                                            sampled.push_back(r.sampled);
                                            // Eligible means the peak was drawn; the
                                            // argmin is then the lowest other index.
                                            if (r.eligible) {
                                              ++fuzzed;
                                              EXPECT_EQ(r.emitted, r.sampled == 0 ? 1 : 0);
                                            } else {
                                              EXPECT_EQ(r.emitted, r.sampled);
                                            }
                                          });
  const std::vector<int> et = Vocab().Encode("endobj");
  const std::vector<int> replay = sampler::Generate(stub, Prefix(4), {1.0, 17, 400}, et);
  const std::size_t steps = std::min(sampled.size(), replay.size() - 4);
  for (std::size_t i = 0; i < steps; ++i) ASSERT_EQ(sampled[i], replay[4 + i]) << i;
  EXPECT_GT(fuzzed, sampled.size() * 9 / 10);
  EXPECT_TRUE(td.text.ends_with("endobj"));
}

TEST(MetadataFuzzTest, NearUniformModelIsNeverFuzzed) {
  const int v = Vocab().size();
  FunctionPredictor stub(v, 4, [&](std::span<const int> w) { return Successor(w, v, 0.3); });
  FuzzSettings s = Fixed(500, 2);
  s.beta = 0.99;
  s.fuzz_rate = 1.0;
  EXPECT_TRUE(MetadataNeuralFuzz(stub, Prefix(4), s, Vocab(), nullptr).fuzz_trace.empty());
}

TEST(FuzzTest, WithoutFiringBothMatchGenerate) {
  const int v = Vocab().size();
  FunctionPredictor stub(v, 4, [&](std::span<const int> w) { return Successor(w, v, 0.6); });
  const std::vector<int> et = Vocab().Encode("endobj");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    FuzzSettings s = Fixed(300, seed);
    s.fuzz_rate = 1e-300;
    const std::vector<int> replay = sampler::Generate(stub, Prefix(4), {1.0, seed, 300}, et);
    EXPECT_EQ(DataNeuralFuzz(stub, Prefix(4), s, Vocab(), nullptr).symbols, replay);
    EXPECT_EQ(MetadataNeuralFuzz(stub, Prefix(4), s, Vocab(), nullptr).symbols, replay);
  }
}

TEST(FuzzTest, DeterministicForSeed) {
  const int v = Vocab().size();
  FunctionPredictor stub(v, 4, [&](std::span<const int> w) { return Successor(w, v, 0.4); });
  const FuzzSettings s = Fixed(200, 5);
  const TestDatum a = DataNeuralFuzz(stub, Prefix(4), s, Vocab(), nullptr);
  const TestDatum b = DataNeuralFuzz(stub, Prefix(4), s, Vocab(), nullptr);
  EXPECT_EQ(a.bytes, b.bytes);
  EXPECT_EQ(ProvenanceJson(a), ProvenanceJson(b));
  const auto j = nlohmann::json::parse(ProvenanceJson(a));
  EXPECT_EQ(j["algorithm"], "data");
  EXPECT_EQ(j["fuzz_trace"].size(), a.fuzz_trace.size());
}

TEST(MutateBinaryPartTest, Ratios) {
  Rng rng(1);
  EXPECT_EQ(MutateBinaryPart("abcdefgh", 0.0, rng), "abcdefgh");
  const std::string all = MutateBinaryPart("abcdefgh", 1.0, rng);
  for (int i = 0; i < 8; ++i) EXPECT_NE(all[i], "abcdefgh"[i]);
  std::string big(10000, '\0');
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<char>(rng.Below(256));
  std::size_t changed = 0;
  const std::string mutated = MutateBinaryPart(big, 0.01, rng, &changed);
  std::size_t diff = 0;
  for (std::size_t i = 0; i < big.size(); ++i) diff += big[i] != mutated[i];
  EXPECT_EQ(diff, 100u);
  EXPECT_EQ(changed, 100u);
}

TEST(AddBinaryPartsTest, NoTokenIsUnchanged) {
  Rng rng(1);
  corpus::BinaryPartStore store;
  std::vector<BinaryInsertion> ins;
  EXPECT_EQ(AddBinaryParts("1 0 obj << >> endobj", "stream", store, 0.01, rng, &ins),
            "1 0 obj << >> endobj");
  EXPECT_TRUE(ins.empty());
}

TEST(AddBinaryPartsTest, TwoTokens) {
  Rng rng(2);
  corpus::BinaryPartStore store;
  store.Add({0, std::string("\x01\x02\x03\x04", 4), "\n", 0, 0});
  store.Add({0, "zzzzzz", "\r\n", 0, 0});
  std::vector<BinaryInsertion> ins;
  const std::string out = AddBinaryParts("a stream b stream c", "stream", store, 0.5, rng, &ins);
  ASSERT_EQ(ins.size(), 2u);
  // Outside the inserted frames no token remains.
  std::string rest;
  std::size_t p = 0;
  for (const BinaryInsertion& i : ins) {
    EXPECT_EQ(out.compare(i.position, 6, "stream"), 0);
    EXPECT_EQ(out.compare(i.position + i.length - 9, 9, "endstream"), 0);
    rest += out.substr(p, i.position - p);
    p = i.position + i.length;
  }
  rest += out.substr(p);
  EXPECT_EQ(rest, "a  b  c");
  EXPECT_THROW(AddBinaryParts("stream", "stream", corpus::BinaryPartStore{}, 0.0, rng, nullptr),
               InvalidArgumentError);
}

TEST(AddBinaryPartsTest, PartChoiceIsUniform) {
  corpus::BinaryPartStore store;
  for (int i = 0; i < 10; ++i) store.Add({0, "part" + std::to_string(i), "\n", 0, 0});
  Rng rng(3);
  std::vector<std::size_t> counts(10, 0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<BinaryInsertion> ins;
    AddBinaryParts("stream", "stream", store, 0.0, rng, &ins);
    ++counts[ins.at(0).part_id];
  }
  const double sigma = std::sqrt(1000 * 0.1 * 0.9);
  for (std::size_t c : counts) EXPECT_LT(std::abs(static_cast<double>(c) - 100.0), 3 * sigma);
}

TEST(FuzzTest, BinaryTokenInOutputIsExpanded) {
  const int v = Vocab().size();
  // Spells "stream" once, then the end token.
  const std::string script = "streamendobj";
  FunctionPredictor stub(v, 12, [&](std::span<const int> w) {
    std::size_t done = 0;
    for (std::size_t k = script.size(); k > 0; --k) {
      if (k > w.size()) continue;
      bool match = true;
      for (std::size_t i = 0; i < k; ++i) {
        match &= Vocab().symbol(w[w.size() - k + i]) == static_cast<std::uint8_t>(script[i]);
      }
      if (match) {
        done = k;
        break;
      }
    }
    return testing::OneHot(v, Sym(script[done]));
  });
  corpus::BinaryPartStore store;
  store.Add({0, "BODY", "\n", 0, 0});
  FuzzSettings settings = Fixed(100, 1);
  settings.binary_ratio = 0.0;
  const TestDatum td = DataNeuralFuzz(stub, Prefix(12), settings, Vocab(), &store);
  EXPECT_EQ(td.text, std::string(12, ' ') + "streamendobj");
  ASSERT_EQ(td.binary_insertions.size(), 1u);
  EXPECT_EQ(td.bytes.substr(12), "stream\nBODYendstreamendobj");
}

}  // namespace
}  // namespace neurofuzz::fuzz
