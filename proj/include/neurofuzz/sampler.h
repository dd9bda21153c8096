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

// Sequence generation from a next-symbol predictor.

#ifndef NEUROFUZZ_SAMPLER_H_
#define NEUROFUZZ_SAMPLER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "neurofuzz/model.h"
#include "neurofuzz/rng.h"

namespace neurofuzz::sampler {

// Anything that maps a window of symbol indices to a next-symbol
// distribution. Stub implementations drive the fuzzing tests.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual int vocab_size() const = 0;
  virtual int window() const = 0;
  virtual model::Distribution Predict(std::span<const int> window) = 0;
};

class ModelPredictor : public Predictor {
 public:
  explicit ModelPredictor(model::ModelParams<float> params)
      : params_(std::make_shared<const model::ModelParams<float>>(
            std::move(params))) {}
  explicit ModelPredictor(
      std::shared_ptr<const model::ModelParams<float>> params)
      : params_(std::move(params)) {}

  int vocab_size() const override { return params_->spec().vocab_size; }
  int window() const override { return params_->spec().window; }
  model::Distribution Predict(std::span<const int> window) override {
    return model::Predict(*params_, window);
  }

 private:
  std::shared_ptr<const model::ModelParams<float>> params_;
};

struct SamplerConfig {
  double diversity = 1.0;
  std::uint64_t seed = 0;
  int max_len = 600;  // symbols, prefix included
};

// Uniformly random contiguous window of length d. Throws
// InvalidArgumentError if the sequence is shorter than d.
std::vector<int> SelectPrefix(std::span<const int> sequence, int d, Rng& rng);

// q_i proportional to max(p_i, floor)^(1/D). Throws InvalidArgumentError if
// D <= 0.
model::Distribution ApplyDiversity(const model::Distribution& dist,
                                   double diversity);

struct Sample {
  int symbol = 0;
  double probability = 0.0;      // after diversity
  double raw_probability = 0.0;  // as predicted
};

Sample SampleSymbol(const model::Distribution& dist, double diversity,
                    Rng& rng);

// Inverse-CDF draw from an already reshaped distribution.
int DrawIndex(const model::Distribution& dist, double u);

bool EndsWith(std::span<const int> seq, std::span<const int> suffix);

// Samples from the prefix onward, sliding the model window by one symbol per
// step, until the output ends with `et` or reaches config.max_len (then `et`
// is appended). The output starts with the prefix. The sampling stream is
// DeriveSeed(config.seed, "sample").
std::vector<int> Generate(Predictor& predictor, std::span<const int> prefix,
                          const SamplerConfig& config,
                          std::span<const int> et);

}  // namespace neurofuzz::sampler

#endif  // NEUROFUZZ_SAMPLER_H_
