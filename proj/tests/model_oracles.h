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

// Independent reference computations for the recurrent model: a scalar
// re-implementation of the cell and a finite-difference gradient check.

#ifndef NEUROFUZZ_TESTS_MODEL_ORACLES_H_
#define NEUROFUZZ_TESTS_MODEL_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "neurofuzz/model.h"
#include "neurofuzz/rng.h"

namespace neurofuzz::testing {

// Scalar forward pass: plain loops, no matrix library, gate rows ordered
// input, forget, candidate, output. Returns the softmax output.
inline std::vector<double> ReferenceForward(const model::ModelParams<double>& p,
                                            std::span<const int> window) {
  const model::ModelSpec& spec = p.spec();
  const int u = spec.units;
  const int d = static_cast<int>(window.size());
  const int dirs = spec.directions();
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  // seq[t][k]: input features at position t; layer 0 uses one-hot symbols.
  std::vector<std::vector<double>> seq(d, std::vector<double>(spec.vocab_size, 0.0));
  for (int t = 0; t < d; ++t) seq[t][window[t]] = 1.0;

  std::vector<double> final_h(u, 0.0);
  for (int layer = 0; layer < spec.layers; ++layer) {
    std::vector<std::vector<double>> merged(d, std::vector<double>(u, 0.0));
    for (int dir = 0; dir < dirs; ++dir) {
      auto wx = p.input_weights(layer, dir);
      auto wh = p.recurrent_weights(layer, dir);
      auto b = p.gate_bias(layer, dir);
      std::vector<double> h(u, 0.0);
      std::vector<double> c(u, 0.0);
      for (int s = 0; s < d; ++s) {
        const int t = dir == 0 ? s : d - 1 - s;
        std::vector<double> z(4 * u);
        for (int r = 0; r < 4 * u; ++r) {
          double acc = b(r, 0);
          for (std::size_t k = 0; k < seq[t].size(); ++k) acc += wx(r, k) * seq[t][k];
          for (int k = 0; k < u; ++k) acc += wh(r, k) * h[k];
          z[r] = acc;
        }
        for (int k = 0; k < u; ++k) {
          const double i = sigmoid(z[k]);
          const double f = sigmoid(z[u + k]);
          const double g = std::tanh(z[2 * u + k]);
          const double o = sigmoid(z[3 * u + k]);
          c[k] = f * c[k] + i * g;
          h[k] = o * std::tanh(c[k]);
        }
        for (int k = 0; k < u; ++k) merged[t][k] += h[k];
        const int last = dir == 0 ? d - 1 : 0;
        if (layer == spec.layers - 1 && t == last) {
          for (int k = 0; k < u; ++k) final_h[k] += h[k];
        }
      }
    }
    seq = merged;
  }
  auto w = p.output_weights();
  auto bias = p.output_bias();
  std::vector<double> logits(spec.vocab_size);
  for (int v = 0; v < spec.vocab_size; ++v) {
    double acc = bias(v, 0);
    for (int k = 0; k < u; ++k) acc += w(v, k) * final_h[k];
    logits[v] = acc;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0;
  for (double& l : logits) total += (l = std::exp(l - mx));
  for (double& l : logits) l /= total;
  return logits;
}

// Mean cross-entropy of a batch, computed with the scalar reference pass.
inline double BatchLoss(const model::ModelParams<double>& p,
                        std::span<const int> windows, std::span<const int> labels) {
  const std::size_t d = static_cast<std::size_t>(p.spec().window);
  double loss = 0;
  for (std::size_t e = 0; e < labels.size(); ++e) {
    loss -= std::log(ReferenceForward(p, windows.subspan(e * d, d))[labels[e]]);
  }
  return loss / static_cast<double>(labels.size());
}

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
};

// Relative error with an absolute floor of 1e-6 in the denominator, so
// coordinates whose true gradient vanishes compare by absolute error.
inline double GradientRelativeError(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

// Compares every analytic gradient coordinate against central differences.
inline GradientCheckResult CheckGradients(const model::ModelSpec& spec,
                                          std::uint64_t seed, int batch = 2,
                                          double eps = 1e-5) {
  model::ModelParams<double> params = model::InitParams<double>(spec, seed);
  // Spread the weights a little beyond the default init range so that the
  // check exercises non-trivial curvature.
  Rng rng(DeriveSeed(seed, "gradcheck"));
  for (double& v : params.values()) v += (rng.Uniform01() - 0.5) * 0.6;
  std::vector<int> windows(static_cast<std::size_t>(batch) * spec.window);
  std::vector<int> labels(batch);
  for (int& s : windows) s = static_cast<int>(rng.Below(spec.vocab_size));
  for (int& s : labels) s = static_cast<int>(rng.Below(spec.vocab_size));

  model::ForwardCache<double> cache;
  model::ForwardBatch<double>(params, windows, batch, model::ForwardOptions{}, &cache);
  const model::ModelParams<double> grads = model::BackwardBatch(params, cache, labels);

  GradientCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double original = params.values()[i];
    params.values()[i] = original + eps;
    const double up = BatchLoss(params, windows, labels);
    params.values()[i] = original - eps;
    const double down = BatchLoss(params, windows, labels);
    params.values()[i] = original;
    const double numeric = (up - down) / (2 * eps);
    result.max_relative_error = std::max(
        result.max_relative_error, GradientRelativeError(grads.values()[i], numeric));
    ++result.coordinates;
  }
  return result;
}

}  // namespace neurofuzz::testing

#endif  // NEUROFUZZ_TESTS_MODEL_ORACLES_H_
