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

// Character-level LSTM language model, many-to-one: a window of symbols in,
// one next-symbol distribution out.
//
// Each layer is a stack of LSTM cells with gate rows ordered
// (input, forget, cell, output):
//
//   z_t = Wx x_t + Wh h_{t-1} + b
//   i, f, o = sigmoid(z_i), sigmoid(z_f), sigmoid(z_o);  g = tanh(z_g)
//   c_t = f * c_{t-1} + i * g;  h_t = o * tanh(c_t)
//
// The first layer reads one-hot symbols, so Wx x_t is a column lookup.
// Bidirectional layers run a second cell right-to-left and merge the two
// output sequences by element-wise sum; the final representation is the
// forward state after the last symbol plus the backward state after the
// first. A softmax projection maps it to the vocabulary.
//
// Everything is templated on the scalar: training runs in float, gradient
// verification in double.

#ifndef NEUROFUZZ_MODEL_H_
#define NEUROFUZZ_MODEL_H_

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "neurofuzz/corpus.h"

namespace neurofuzz::model {

inline constexpr double kProbabilityFloor = 1e-12;

enum class Direction : std::uint8_t {
  kUnidirectional = 0,
  kBidirectional = 1,
};

struct ModelSpec {
  int layers = 2;
  int units = 128;
  Direction direction = Direction::kUnidirectional;
  double dropout = 0.0;  // between stacked layers, training only
  int vocab_size = 0;
  int window = 50;

  int directions() const {
    return direction == Direction::kBidirectional ? 2 : 1;
  }
  // Throws InvalidArgumentError.
  void Validate() const;
  bool operator==(const ModelSpec&) const = default;
};

// Presets 1-4: (1 layer, 128), (2, 128), (2, 256, dropout 0.3),
// (2, 128, bidirectional).
ModelSpec Preset(int id, int vocab_size, int window = 50);
// Jump step used with each preset when windowing the training sequence.
int PresetJump(int id);

// Sum over cells of 4u(u + in + 1), plus (u + 1)V for the projection.
std::size_t ParameterCount(const ModelSpec& spec);

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using MatrixMap = Eigen::Map<Matrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const Matrix<T>>;

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  bool operator==(const TensorInfo&) const = default;
};

// All weights in one flat buffer with named column-major tensor views.
// Value type: copies are deep.
template <typename T>
class ModelParams {
 public:
  ModelParams() = default;
  // Zero-initialized.
  explicit ModelParams(const ModelSpec& spec);

  const ModelSpec& spec() const { return spec_; }
  std::size_t size() const { return data_.size(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }

  MatrixMap<T> input_weights(int layer, int dir) { return Tensor(layer, dir, 0); }
  MatrixMap<T> recurrent_weights(int layer, int dir) { return Tensor(layer, dir, 1); }
  MatrixMap<T> gate_bias(int layer, int dir) { return Tensor(layer, dir, 2); }
  MatrixMap<T> output_weights() { return At(tensors_.size() - 2); }
  MatrixMap<T> output_bias() { return At(tensors_.size() - 1); }
  ConstMatrixMap<T> input_weights(int layer, int dir) const { return Tensor(layer, dir, 0); }
  ConstMatrixMap<T> recurrent_weights(int layer, int dir) const { return Tensor(layer, dir, 1); }
  ConstMatrixMap<T> gate_bias(int layer, int dir) const { return Tensor(layer, dir, 2); }
  ConstMatrixMap<T> output_weights() const { return At(tensors_.size() - 2); }
  ConstMatrixMap<T> output_bias() const { return At(tensors_.size() - 1); }

  MatrixMap<T> At(std::size_t tensor);
  ConstMatrixMap<T> At(std::size_t tensor) const;

  template <typename U>
  ModelParams<U> Cast() const {
    ModelParams<U> out(spec_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      out.values()[i] = static_cast<U>(data_[i]);
    }
    return out;
  }

  bool AllFinite() const;
  bool operator==(const ModelParams&) const = default;

 private:
  MatrixMap<T> Tensor(int layer, int dir, int kind) {
    return At(TensorIndex(layer, dir, kind));
  }
  ConstMatrixMap<T> Tensor(int layer, int dir, int kind) const {
    return At(TensorIndex(layer, dir, kind));
  }
  std::size_t TensorIndex(int layer, int dir, int kind) const;

  ModelSpec spec_;
  std::vector<T> data_;
  std::vector<TensorInfo> tensors_;
};

// Gate weights uniform in +-1/sqrt(in + units), projection uniform in
// +-1/sqrt(units), biases zero except forget-gate biases at +1.
// Deterministic by seed and identical (up to rounding) for every scalar type.
template <typename T>
ModelParams<T> InitParams(const ModelSpec& spec, std::uint64_t seed);

struct Distribution {
  std::vector<double> probs;

  int size() const { return static_cast<int>(probs.size()); }
  double operator[](int i) const { return probs[static_cast<std::size_t>(i)]; }
  // Non-negative entries summing to 1 within `tolerance`.
  bool IsValid(double tolerance = 1e-6) const;
  // Ties resolve to the lowest index.
  int Argmax() const;
  int Argmin() const;
  static Distribution Uniform(int n);
};

// Cross-entropy -ln(max(p[label], kProbabilityFloor)).
double Loss(const Distribution& dist, int label);

// 2^(-(1/n) sum log2 p_i), with the same probability floor.
double Perplexity(std::span<const double> label_probs);

struct ForwardOptions {
  bool training = false;  // enables dropout
  std::uint64_t dropout_seed = 0;
};

// Activations of one direction of one layer, indexed by sequence position.
template <typename T>
struct DirectionTrace {
  std::vector<Matrix<T>> gates;      // 4u x B, post-activation
  std::vector<Matrix<T>> cell;       // u x B
  std::vector<Matrix<T>> cell_tanh;  // u x B
  std::vector<Matrix<T>> hidden;     // u x B
};

template <typename T>
struct ForwardCache {
  int batch = 0;
  std::vector<int> windows;  // batch x window, row-major
  std::vector<std::vector<DirectionTrace<T>>> layers;   // [layer][dir]
  std::vector<std::vector<Matrix<T>>> layer_inputs;     // [layer][t], layer >= 1
  std::vector<std::vector<Matrix<T>>> dropout_masks;    // [layer][t], empty if off
  Matrix<T> final_hidden;  // u x B
  Matrix<T> probs;         // V x B
};

// `windows` holds `batch` rows of spec().window symbols. Returns V x batch
// probabilities. Throws InvalidArgumentError on a length mismatch or an
// out-of-range symbol.
template <typename T>
Matrix<T> ForwardBatch(const ModelParams<T>& params,
                       std::span<const int> windows, int batch,
                       const ForwardOptions& options,
                       ForwardCache<T>* cache);

// Gradients of the mean batch loss, shaped like the parameters.
template <typename T>
ModelParams<T> BackwardBatch(const ModelParams<T>& params,
                             const ForwardCache<T>& cache,
                             std::span<const int> labels);

template <typename T>
struct ForwardResult {
  Distribution dist;
  ForwardCache<T> cache;
};

template <typename T>
ForwardResult<T> Forward(const ModelParams<T>& params,
                         std::span<const int> window,
                         const ForwardOptions& options = {});

template <typename T>
ModelParams<T> Backward(const ModelParams<T>& params,
                        const ForwardCache<T>& cache, int label);

template <typename T>
Distribution Predict(const ModelParams<T>& params, std::span<const int> window);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::int64_t step = 0;
};

// Bias-corrected Adam. A non-finite gradient throws NumericError and leaves
// both parameters and state untouched.
template <typename T>
void AdamStep(ModelParams<T>& params, const ModelParams<T>& grads,
              AdamState<T>& state, const AdamConfig& config);

struct Metrics {
  double accuracy = 0.0;
  double error = 0.0;  // mean natural-log cross-entropy
  double perplexity = 0.0;
  std::size_t examples = 0;
};

template <typename T>
Metrics Evaluate(const ModelParams<T>& params,
                 const corpus::WindowedDataset& dataset, int batch_size = 256);

// One optimizer with its parameters; the unit Train() iterates.
class Trainer {
 public:
  Trainer(const ModelSpec& spec, std::uint64_t seed, AdamConfig config);
  explicit Trainer(ModelParams<float> params, AdamConfig config);

  // One Adam step on a batch; returns the mean batch loss before the update.
  double Step(std::span<const int> windows, std::span<const int> labels,
              std::uint64_t dropout_seed);
  // Full step over dataset examples `indices`.
  double Step(const corpus::WindowedDataset& dataset,
              std::span<const std::size_t> indices, std::uint64_t dropout_seed);

  const ModelParams<float>& params() const { return params_; }
  std::int64_t steps() const { return state_.step; }

 private:
  ModelParams<float> params_;
  AdamState<float> state_;
  AdamConfig config_;
  std::vector<int> window_buffer_;
  std::vector<int> label_buffer_;
};

struct Checkpoint {
  ModelSpec spec;
  ModelParams<float> params;
  corpus::Vocabulary vocabulary;
  int epoch = 0;
  Metrics metrics;  // validation
  double train_loss = 0.0;
};

struct TrainOptions {
  int epochs = 50;
  double learning_rate = 1e-3;
  int batch_size = 128;
  std::uint64_t seed = 0;
  // Called after each epoch's checkpoint is built.
  std::function<void(const Checkpoint&)> on_epoch;
};

// Mini-batch training with a seeded per-epoch shuffle. Validation metrics
// come from `validation` when given, else from `train`. A non-finite loss
// stops training and returns the checkpoints gathered so far.
std::vector<Checkpoint> Train(const corpus::WindowedDataset& train,
                              const corpus::WindowedDataset* validation,
                              const ModelSpec& spec,
                              const corpus::Vocabulary& vocabulary,
                              const TrainOptions& options);

}  // namespace neurofuzz::model

#endif  // NEUROFUZZ_MODEL_H_
