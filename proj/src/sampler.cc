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

#include "neurofuzz/sampler.h"

#include <algorithm>
#include <cmath>

#include "neurofuzz/errors.h"

namespace neurofuzz::sampler {

std::vector<int> SelectPrefix(std::span<const int> sequence, int d, Rng& rng) {
  if (d < 1 || sequence.size() < static_cast<std::size_t>(d)) {
    throw InvalidArgumentError("sequence of length " +
                               std::to_string(sequence.size()) +
                               " is shorter than the prefix length " +
                               std::to_string(d));
  }
  const std::size_t start = rng.Below(sequence.size() - d + 1);
  return std::vector<int>(sequence.begin() + static_cast<std::ptrdiff_t>(start),
                          sequence.begin() + static_cast<std::ptrdiff_t>(start + d));
}

model::Distribution ApplyDiversity(const model::Distribution& dist,
                                   double diversity) {
  if (!(diversity > 0.0) || !std::isfinite(diversity)) {
    throw InvalidArgumentError("diversity must be a positive number");
  }
  if (dist.probs.empty()) throw InvalidArgumentError("empty distribution");
  model::Distribution out;
  out.probs.resize(dist.probs.size());
  double max_logit = -INFINITY;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    // Zero stays zero: p^(1/D) vanishes at p = 0 for every D.
    out.probs[i] = dist.probs[i] > 0.0 ? std::log(dist.probs[i]) / diversity
                                       : -INFINITY;
    max_logit = std::max(max_logit, out.probs[i]);
  }
  if (!std::isfinite(max_logit)) {
    throw InvalidArgumentError("distribution has no positive mass");
  }
  double sum = 0.0;
  for (double& v : out.probs) {
    v = std::exp(v - max_logit);
    sum += v;
  }
  for (double& v : out.probs) v /= sum;
  return out;
}

int DrawIndex(const model::Distribution& dist, double u) {
  double cumulative = 0.0;
  int last_positive = 0;
  for (int i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    cumulative += dist[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  return last_positive;
}

Sample SampleSymbol(const model::Distribution& dist, double diversity,
                    Rng& rng) {
  const model::Distribution reshaped = ApplyDiversity(dist, diversity);
  Sample s;
  s.symbol = DrawIndex(reshaped, rng.Uniform01());
  s.probability = reshaped[s.symbol];
  s.raw_probability = dist[s.symbol];
  return s;
}

bool EndsWith(std::span<const int> seq, std::span<const int> suffix) {
  return seq.size() >= suffix.size() &&
         std::equal(suffix.begin(), suffix.end(), seq.end() - suffix.size());
}

std::vector<int> Generate(Predictor& predictor, std::span<const int> prefix,
                          const SamplerConfig& config,
                          std::span<const int> et) {
  const int d = predictor.window();
  if (prefix.size() != static_cast<std::size_t>(d)) {
    throw InvalidArgumentError("prefix length must equal the model window");
  }
  Rng rng(DeriveSeed(config.seed, "sample"));
  std::vector<int> out(prefix.begin(), prefix.end());
  std::vector<int> window(prefix.begin(), prefix.end());
  while (true) {
    if (out.size() >= static_cast<std::size_t>(config.max_len)) {
      out.insert(out.end(), et.begin(), et.end());
      break;
    }
    const Sample s = SampleSymbol(predictor.Predict(window), config.diversity, rng);
    out.push_back(s.symbol);
    window.erase(window.begin());
    window.push_back(s.symbol);
    if (EndsWith(out, et)) break;
  }
  return out;
}

}  // namespace neurofuzz::sampler
