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

#include "neurofuzz/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "neurofuzz/errors.h"
#include "neurofuzz/rng.h"

namespace neurofuzz::model {

namespace {

const char* DirName(int dir) { return dir == 0 ? "fwd" : "bwd"; }

int InputSize(const ModelSpec& spec, int layer) {
  return layer == 0 ? spec.vocab_size : spec.units;
}

template <typename T>
auto Sigmoid(const Eigen::ArrayBase<T>& x) {
  using S = typename T::Scalar;
  return S(1) / (S(1) + (-x).exp());
}

// Vectorized reductions peel by address alignment, which makes their
// rounding depend on where a buffer happens to live. The helpers below sum
// in a fixed order so that repeated runs are bit-identical.
template <typename Column>
auto OrderedSum(const Column& column) {
  typename Column::Scalar total(0);
  for (Eigen::Index i = 0; i < column.size(); ++i) total += column(i);
  return total;
}

template <typename T>
Matrix<T> SumColumns(const Matrix<T>& m) {
  Matrix<T> out = Matrix<T>::Zero(m.rows(), 1);
  for (Eigen::Index col = 0; col < m.cols(); ++col) out += m.col(col);
  return out;
}

template <typename T>
void SoftmaxColumns(Matrix<T>& logits) {
  for (Eigen::Index col = 0; col < logits.cols(); ++col) {
    auto column = logits.col(col);
    const T max = column.maxCoeff();
    column = (column.array() - max).exp();
    column /= OrderedSum(column);
  }
}

// One direction of one layer over the whole window.
template <typename T>
void RunDirection(const ModelParams<T>& params, int layer, int dir,
                  std::span<const int> symbols,
                  const std::vector<Matrix<T>>* inputs, int batch,
                  DirectionTrace<T>& trace) {
  const ModelSpec& spec = params.spec();
  const int u = spec.units;
  const int d = spec.window;
  const bool reverse = dir == 1;
  auto wx = params.input_weights(layer, dir);
  auto wh = params.recurrent_weights(layer, dir);
  auto bias = params.gate_bias(layer, dir);

  trace.gates.assign(d, Matrix<T>());
  trace.cell.assign(d, Matrix<T>());
  trace.cell_tanh.assign(d, Matrix<T>());
  trace.hidden.assign(d, Matrix<T>());

  Matrix<T> h = Matrix<T>::Zero(u, batch);
  Matrix<T> c = Matrix<T>::Zero(u, batch);
  Matrix<T> z(4 * u, batch);
  for (int s = 0; s < d; ++s) {
    const int t = reverse ? d - 1 - s : s;
    z.noalias() = wh * h;
    z.colwise() += bias.col(0);
    if (layer == 0) {
      for (int e = 0; e < batch; ++e) {
        z.col(e) += wx.col(symbols[static_cast<std::size_t>(e) * d + t]);
      }
    } else {
      z.noalias() += wx * (*inputs)[t];
    }
    Matrix<T>& gates = trace.gates[t];
    gates.resize(4 * u, batch);
    gates.topRows(u) = Sigmoid(z.topRows(u).array()).matrix();
    gates.middleRows(u, u) = Sigmoid(z.middleRows(u, u).array()).matrix();
    gates.middleRows(2 * u, u) = z.middleRows(2 * u, u).array().tanh().matrix();
    gates.bottomRows(u) = Sigmoid(z.bottomRows(u).array()).matrix();

    c = gates.middleRows(u, u).cwiseProduct(c) +
        gates.topRows(u).cwiseProduct(gates.middleRows(2 * u, u));
    trace.cell[t] = c;
    trace.cell_tanh[t] = c.array().tanh().matrix();
    h = gates.bottomRows(u).cwiseProduct(trace.cell_tanh[t]);
    trace.hidden[t] = h;
  }
}

// Backpropagation through time for one direction. `external(t)` returns the
// gradient flowing into the direction's output at position t, or nullptr.
template <typename T, typename External>
void BackpropDirection(const ModelParams<T>& params, ModelParams<T>& grads,
                       int layer, int dir, const DirectionTrace<T>& trace,
                       std::span<const int> symbols,
                       const std::vector<Matrix<T>>* inputs,
                       std::vector<Matrix<T>>* input_grads, int batch,
                       External external) {
  const ModelSpec& spec = params.spec();
  const int u = spec.units;
  const int d = spec.window;
  const bool reverse = dir == 1;
  auto wx = params.input_weights(layer, dir);
  auto wh = params.recurrent_weights(layer, dir);
  auto gwx = grads.input_weights(layer, dir);
  auto gwh = grads.recurrent_weights(layer, dir);
  auto gb = grads.gate_bias(layer, dir);

  Matrix<T> dh_next = Matrix<T>::Zero(u, batch);
  Matrix<T> dc_next = Matrix<T>::Zero(u, batch);
  Matrix<T> dz(4 * u, batch);
  Matrix<T> dh(u, batch);
  Matrix<T> dc(u, batch);
  for (int s = d - 1; s >= 0; --s) {
    const int t = reverse ? d - 1 - s : s;
    const int prev = reverse ? t + 1 : t - 1;
    const bool has_prev = s > 0;

    dh = dh_next;
    if (const Matrix<T>* ext = external(t)) dh += *ext;

    const Matrix<T>& gates = trace.gates[t];
    const auto i = gates.topRows(u).array();
    const auto f = gates.middleRows(u, u).array();
    const auto g = gates.middleRows(2 * u, u).array();
    const auto o = gates.bottomRows(u).array();
    const auto tc = trace.cell_tanh[t].array();

    dc = (dc_next.array() + dh.array() * o * (T(1) - tc * tc)).matrix();
    dz.topRows(u) = (dc.array() * g * i * (T(1) - i)).matrix();
    if (has_prev) {
      dz.middleRows(u, u) =
          (dc.array() * trace.cell[prev].array() * f * (T(1) - f)).matrix();
    } else {
      dz.middleRows(u, u).setZero();
    }
    dz.middleRows(2 * u, u) = (dc.array() * i * (T(1) - g * g)).matrix();
    dz.bottomRows(u) = (dh.array() * tc * o * (T(1) - o)).matrix();
    dc_next = (dc.array() * f).matrix();

    gb.col(0) += SumColumns<T>(dz);
    if (has_prev) {
      gwh.noalias() += dz * trace.hidden[prev].transpose();
      dh_next.noalias() = wh.transpose() * dz;
    } else {
      dh_next.setZero();
    }
    if (layer == 0) {
      for (int e = 0; e < batch; ++e) {
        gwx.col(symbols[static_cast<std::size_t>(e) * d + t]) += dz.col(e);
      }
    } else {
      gwx.noalias() += dz * (*inputs)[t].transpose();
      (*input_grads)[t].noalias() += wx.transpose() * dz;
    }
  }
}

template <typename T>
void CheckWindows(const ModelSpec& spec, std::span<const int> windows,
                  int batch) {
  if (batch < 1 ||
      windows.size() != static_cast<std::size_t>(batch) * spec.window) {
    throw InvalidArgumentError(
        "input window length does not match the model window of " +
        std::to_string(spec.window));
  }
  for (int s : windows) {
    if (s < 0 || s >= spec.vocab_size) {
      throw InvalidArgumentError("symbol index " + std::to_string(s) +
                                 " outside the vocabulary");
    }
  }
}

}  // namespace

void ModelSpec::Validate() const {
  if (layers < 1) throw InvalidArgumentError("model needs at least one layer");
  if (units < 1) throw InvalidArgumentError("model units must be >= 1");
  if (vocab_size < 1) throw InvalidArgumentError("vocabulary must not be empty");
  if (window < 1) throw InvalidArgumentError("window must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw InvalidArgumentError("dropout must be in [0, 1)");
  }
}

ModelSpec Preset(int id, int vocab_size, int window) {
  ModelSpec spec;
  spec.vocab_size = vocab_size;
  spec.window = window;
  switch (id) {
    case 1:
      spec.layers = 1;
      spec.units = 128;
      break;
    case 2:
      spec.layers = 2;
      spec.units = 128;
      break;
    case 3:
      spec.layers = 2;
      spec.units = 256;
      spec.dropout = 0.3;
      break;
    case 4:
      spec.layers = 2;
      spec.units = 128;
      spec.direction = Direction::kBidirectional;
      break;
    default:
      throw InvalidArgumentError("model preset must be 1-4, got " +
                                 std::to_string(id));
  }
  return spec;
}

int PresetJump(int id) {
  switch (id) {
    case 1:
    case 2:
      return 3;
    case 3:
    case 4:
      return 1;
    default:
      throw InvalidArgumentError("model preset must be 1-4, got " +
                                 std::to_string(id));
  }
}

std::size_t ParameterCount(const ModelSpec& spec) {
  spec.Validate();
  const std::size_t u = static_cast<std::size_t>(spec.units);
  std::size_t total = 0;
  for (int layer = 0; layer < spec.layers; ++layer) {
    const std::size_t in = static_cast<std::size_t>(InputSize(spec, layer));
    total += static_cast<std::size_t>(spec.directions()) * 4 * u * (u + in + 1);
  }
  return total + (u + 1) * static_cast<std::size_t>(spec.vocab_size);
}

template <typename T>
ModelParams<T>::ModelParams(const ModelSpec& spec) : spec_(spec) {
  spec_.Validate();
  std::size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    tensors_.push_back({std::move(name), rows, cols, offset});
    offset += static_cast<std::size_t>(rows) * cols;
  };
  const int u = spec_.units;
  for (int layer = 0; layer < spec_.layers; ++layer) {
    for (int dir = 0; dir < spec_.directions(); ++dir) {
      const std::string prefix =
          "layer" + std::to_string(layer) + "." + DirName(dir) + ".";
      add(prefix + "input_weights", 4 * u, InputSize(spec_, layer));
      add(prefix + "recurrent_weights", 4 * u, u);
      add(prefix + "bias", 4 * u, 1);
    }
  }
  add("output.weights", spec_.vocab_size, u);
  add("output.bias", spec_.vocab_size, 1);
  data_.assign(offset, T(0));
}

template <typename T>
std::size_t ModelParams<T>::TensorIndex(int layer, int dir, int kind) const {
  if (layer < 0 || layer >= spec_.layers || dir < 0 ||
      dir >= spec_.directions()) {
    throw InvalidArgumentError("tensor index out of range");
  }
  return static_cast<std::size_t>((layer * spec_.directions() + dir) * 3 + kind);
}

template <typename T>
MatrixMap<T> ModelParams<T>::At(std::size_t tensor) {
  const TensorInfo& info = tensors_.at(tensor);
  return MatrixMap<T>(data_.data() + info.offset, info.rows, info.cols);
}

template <typename T>
ConstMatrixMap<T> ModelParams<T>::At(std::size_t tensor) const {
  const TensorInfo& info = tensors_.at(tensor);
  return ConstMatrixMap<T>(data_.data() + info.offset, info.rows, info.cols);
}

template <typename T>
bool ModelParams<T>::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](T v) { return std::isfinite(v); });
}

template <typename T>
ModelParams<T> InitParams(const ModelSpec& spec, std::uint64_t seed) {
  ModelParams<T> params(spec);
  Rng rng(seed);
  const int u = spec.units;
  auto fill = [&](auto tensor, double bound) {
    for (Eigen::Index col = 0; col < tensor.cols(); ++col) {
      for (Eigen::Index row = 0; row < tensor.rows(); ++row) {
        tensor(row, col) = static_cast<T>((2.0 * rng.Uniform01() - 1.0) * bound);
      }
    }
  };
  for (int layer = 0; layer < spec.layers; ++layer) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(InputSize(spec, layer) + u));
    for (int dir = 0; dir < spec.directions(); ++dir) {
      fill(params.input_weights(layer, dir), bound);
      fill(params.recurrent_weights(layer, dir), bound);
      params.gate_bias(layer, dir).middleRows(u, u).setConstant(T(1));
    }
  }
  fill(params.output_weights(), 1.0 / std::sqrt(static_cast<double>(u)));
  return params;
}

bool Distribution::IsValid(double tolerance) const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    sum += p;
  }
  return !probs.empty() && std::abs(sum - 1.0) <= tolerance;
}

int Distribution::Argmax() const {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                          probs.begin());
}

int Distribution::Argmin() const {
  return static_cast<int>(std::min_element(probs.begin(), probs.end()) -
                          probs.begin());
}

Distribution Distribution::Uniform(int n) {
  if (n < 1) throw InvalidArgumentError("uniform distribution needs n >= 1");
  return Distribution{std::vector<double>(static_cast<std::size_t>(n), 1.0 / n)};
}

double Loss(const Distribution& dist, int label) {
  if (label < 0 || label >= dist.size()) {
    throw InvalidArgumentError("label outside the distribution");
  }
  return -std::log(std::max(dist[label], kProbabilityFloor));
}

double Perplexity(std::span<const double> label_probs) {
  if (label_probs.empty()) throw InvalidArgumentError("perplexity of nothing");
  double sum = 0.0;
  for (double p : label_probs) sum += std::log2(std::max(p, kProbabilityFloor));
  return std::exp2(-sum / static_cast<double>(label_probs.size()));
}

template <typename T>
Matrix<T> ForwardBatch(const ModelParams<T>& params,
                       std::span<const int> windows, int batch,
                       const ForwardOptions& options, ForwardCache<T>* cache) {
  const ModelSpec& spec = params.spec();
  CheckWindows<T>(spec, windows, batch);
  const int d = spec.window;
  const int dirs = spec.directions();
  const bool use_dropout = options.training && spec.dropout > 0.0;

  ForwardCache<T> local;
  ForwardCache<T>& c = cache != nullptr ? *cache : local;
  c.batch = batch;
  c.windows.assign(windows.begin(), windows.end());
  c.layers.assign(spec.layers, std::vector<DirectionTrace<T>>(dirs));
  c.layer_inputs.assign(spec.layers, {});
  c.dropout_masks.assign(spec.layers, {});

  for (int layer = 0; layer < spec.layers; ++layer) {
    if (layer > 0) {
      // Merged output of the layer below becomes this layer's input.
      std::vector<Matrix<T>>& inputs = c.layer_inputs[layer];
      inputs.resize(d);
      const auto& below = c.layers[layer - 1];
      for (int t = 0; t < d; ++t) {
        inputs[t] = below[0].hidden[t];
        if (dirs == 2) inputs[t] += below[1].hidden[t];
      }
      if (use_dropout) {
        Rng rng(DeriveSeed(options.dropout_seed, static_cast<std::uint64_t>(layer)));
        const T keep_scale = T(1.0 / (1.0 - spec.dropout));
        std::vector<Matrix<T>>& masks = c.dropout_masks[layer];
        masks.resize(d);
        for (int t = 0; t < d; ++t) {
          masks[t].resize(spec.units, batch);
          for (Eigen::Index k = 0; k < masks[t].size(); ++k) {
            masks[t].data()[k] = rng.Uniform01() < spec.dropout ? T(0) : keep_scale;
          }
          inputs[t] = inputs[t].cwiseProduct(masks[t]);
        }
      }
    }
    for (int dir = 0; dir < dirs; ++dir) {
      RunDirection(params, layer, dir, windows,
                   layer > 0 ? &c.layer_inputs[layer] : nullptr, batch,
                   c.layers[layer][dir]);
    }
  }

  const auto& top = c.layers[spec.layers - 1];
  c.final_hidden = top[0].hidden[d - 1];
  if (dirs == 2) c.final_hidden += top[1].hidden[0];
  Matrix<T> logits = params.output_weights() * c.final_hidden;
  logits.colwise() += params.output_bias().col(0);
  SoftmaxColumns(logits);
  c.probs = logits;
  return logits;
}

template <typename T>
ModelParams<T> BackwardBatch(const ModelParams<T>& params,
                             const ForwardCache<T>& cache,
                             std::span<const int> labels) {
  const ModelSpec& spec = params.spec();
  const int batch = cache.batch;
  const int d = spec.window;
  const int u = spec.units;
  const int dirs = spec.directions();
  if (labels.size() != static_cast<std::size_t>(batch)) {
    throw InvalidArgumentError("label count does not match the cached batch");
  }
  ModelParams<T> grads(spec);

  Matrix<T> dlogits = cache.probs;
  for (int e = 0; e < batch; ++e) {
    if (labels[e] < 0 || labels[e] >= spec.vocab_size) {
      throw InvalidArgumentError("label outside the vocabulary");
    }
    dlogits(labels[e], e) -= T(1);
  }
  dlogits /= static_cast<T>(batch);
  grads.output_weights().noalias() = dlogits * cache.final_hidden.transpose();
  grads.output_bias().col(0) = SumColumns<T>(dlogits);
  const Matrix<T> dfinal = params.output_weights().transpose() * dlogits;

  // Gradient w.r.t. the merged output sequence of the current layer.
  std::vector<Matrix<T>> dsequence;
  for (int layer = spec.layers - 1; layer >= 0; --layer) {
    std::vector<Matrix<T>> dinputs;
    if (layer > 0) dinputs.assign(d, Matrix<T>::Zero(u, batch));
    for (int dir = 0; dir < dirs; ++dir) {
      const int final_position = dir == 0 ? d - 1 : 0;
      auto external = [&](int t) -> const Matrix<T>* {
        if (layer == spec.layers - 1) {
          return t == final_position ? &dfinal : nullptr;
        }
        return &dsequence[t];
      };
      BackpropDirection(params, grads, layer, dir, cache.layers[layer][dir],
                        cache.windows,
                        layer > 0 ? &cache.layer_inputs[layer] : nullptr,
                        layer > 0 ? &dinputs : nullptr, batch, external);
    }
    if (layer > 0) {
      const auto& masks = cache.dropout_masks[layer];
      if (!masks.empty()) {
        for (int t = 0; t < d; ++t) dinputs[t] = dinputs[t].cwiseProduct(masks[t]);
      }
      dsequence = std::move(dinputs);
    }
  }
  return grads;
}

template <typename T>
ForwardResult<T> Forward(const ModelParams<T>& params,
                         std::span<const int> window,
                         const ForwardOptions& options) {
  ForwardResult<T> result;
  Matrix<T> probs = ForwardBatch(params, window, 1, options, &result.cache);
  result.dist.probs.resize(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    result.dist.probs[static_cast<std::size_t>(i)] = static_cast<double>(probs(i, 0));
  }
  return result;
}

template <typename T>
ModelParams<T> Backward(const ModelParams<T>& params,
                        const ForwardCache<T>& cache, int label) {
  const int labels[1] = {label};
  return BackwardBatch(params, cache, labels);
}

template <typename T>
Distribution Predict(const ModelParams<T>& params, std::span<const int> window) {
  Matrix<T> probs = ForwardBatch<T>(params, window, 1, {}, nullptr);
  Distribution dist;
  dist.probs.resize(static_cast<std::size_t>(probs.rows()));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    dist.probs[static_cast<std::size_t>(i)] = static_cast<double>(probs(i, 0));
    sum += dist.probs[static_cast<std::size_t>(i)];
  }
  // Renormalize in double so single-precision rounding stays within 1e-6.
  for (double& p : dist.probs) p /= sum;
  return dist;
}

template <typename T>
void AdamStep(ModelParams<T>& params, const ModelParams<T>& grads,
              AdamState<T>& state, const AdamConfig& config) {
  if (grads.size() != params.size()) {
    throw InvalidArgumentError("gradient shape does not match parameters");
  }
  if (!grads.AllFinite()) {
    throw NumericError("non-finite gradient; Adam step skipped");
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), T(0));
    state.v.assign(params.size(), T(0));
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(config.beta1);
  const T b2 = static_cast<T>(config.beta2);
  const T step_size = static_cast<T>(config.learning_rate / c1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(c2));
  const T eps = static_cast<T>(config.epsilon);
  std::span<T> w = params.values();
  std::span<const T> g = grads.values();
  for (std::size_t k = 0; k < w.size(); ++k) {
    state.m[k] = b1 * state.m[k] + (T(1) - b1) * g[k];
    state.v[k] = b2 * state.v[k] + (T(1) - b2) * g[k] * g[k];
    w[k] -= step_size * state.m[k] / (std::sqrt(state.v[k]) * inv_sqrt_c2 + eps);
  }
}

template <typename T>
Metrics Evaluate(const ModelParams<T>& params,
                 const corpus::WindowedDataset& dataset, int batch_size) {
  if (dataset.empty()) throw InvalidArgumentError("cannot evaluate an empty dataset");
  if (dataset.window() != params.spec().window) {
    throw InvalidArgumentError("dataset window differs from the model window");
  }
  const int d = dataset.window();
  std::vector<int> windows;
  std::vector<double> label_probs;
  label_probs.reserve(dataset.size());
  std::size_t correct = 0;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < dataset.size(); start += batch_size) {
    const int batch = static_cast<int>(
        std::min<std::size_t>(batch_size, dataset.size() - start));
    windows.resize(static_cast<std::size_t>(batch) * d);
    for (int e = 0; e < batch; ++e) {
      auto in = dataset.input(start + e);
      std::copy(in.begin(), in.end(), windows.begin() + static_cast<std::ptrdiff_t>(e) * d);
    }
    Matrix<T> probs = ForwardBatch<T>(params, windows, batch, {}, nullptr);
    for (int e = 0; e < batch; ++e) {
      const int label = dataset.label(start + e);
      Eigen::Index best = 0;
      probs.col(e).maxCoeff(&best);
      if (best == label) ++correct;
      const double p = static_cast<double>(probs(label, e));
      label_probs.push_back(p);
      loss_sum += -std::log(std::max(p, kProbabilityFloor));
    }
  }
  Metrics m;
  m.examples = dataset.size();
  m.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
  m.error = loss_sum / static_cast<double>(dataset.size());
  m.perplexity = Perplexity(label_probs);
  return m;
}

Trainer::Trainer(const ModelSpec& spec, std::uint64_t seed, AdamConfig config)
    : Trainer(InitParams<float>(spec, seed), config) {}

Trainer::Trainer(ModelParams<float> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {}

double Trainer::Step(std::span<const int> windows, std::span<const int> labels,
                     std::uint64_t dropout_seed) {
  const int batch = static_cast<int>(labels.size());
  ForwardCache<float> cache;
  ForwardOptions options{.training = true, .dropout_seed = dropout_seed};
  Matrix<float> probs = ForwardBatch(params_, windows, batch, options, &cache);
  double loss = 0.0;
  for (int e = 0; e < batch; ++e) {
    loss += -std::log(std::max(static_cast<double>(probs(labels[e], e)),
                               kProbabilityFloor));
  }
  loss /= batch;
  if (!std::isfinite(loss)) throw NumericError("training loss is not finite");
  ModelParams<float> grads = BackwardBatch(params_, cache, labels);
  AdamStep(params_, grads, state_, config_);
  return loss;
}

double Trainer::Step(const corpus::WindowedDataset& dataset,
                     std::span<const std::size_t> indices,
                     std::uint64_t dropout_seed) {
  const int d = dataset.window();
  window_buffer_.resize(indices.size() * static_cast<std::size_t>(d));
  label_buffer_.resize(indices.size());
  for (std::size_t e = 0; e < indices.size(); ++e) {
    auto in = dataset.input(indices[e]);
    std::copy(in.begin(), in.end(), window_buffer_.begin() + static_cast<std::ptrdiff_t>(e * d));
    label_buffer_[e] = dataset.label(indices[e]);
  }
  return Step(window_buffer_, label_buffer_, dropout_seed);
}

std::vector<Checkpoint> Train(const corpus::WindowedDataset& train,
                              const corpus::WindowedDataset* validation,
                              const ModelSpec& spec,
                              const corpus::Vocabulary& vocabulary,
                              const TrainOptions& options) {
  spec.Validate();
  if (train.empty()) throw InvalidArgumentError("training dataset is empty");
  if (train.window() != spec.window) {
    throw InvalidArgumentError("training window differs from the model window");
  }
  if (vocabulary.size() != spec.vocab_size) {
    throw InvalidArgumentError("vocabulary size differs from the model spec");
  }
  if (options.epochs < 1 || options.batch_size < 1) {
    throw InvalidArgumentError("epochs and batch size must be >= 1");
  }
  const corpus::WindowedDataset& eval_set =
      validation != nullptr && !validation->empty() ? *validation : train;

  Trainer trainer(spec, DeriveSeed(options.seed, "init"),
                  AdamConfig{.learning_rate = options.learning_rate});
  Rng order_rng(DeriveSeed(options.seed, "batch-order"));
  const std::uint64_t dropout_root = DeriveSeed(options.seed, "dropout");

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Checkpoint> checkpoints;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    order_rng.Shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    try {
      for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
        const std::size_t n = std::min<std::size_t>(options.batch_size, order.size() - start);
        loss_sum += trainer.Step(
            train, std::span<const std::size_t>(order).subspan(start, n),
            DeriveSeed(dropout_root, static_cast<std::uint64_t>(trainer.steps())));
        ++batches;
      }
    } catch (const NumericError&) {
      break;
    }
    Checkpoint ckpt;
    ckpt.spec = spec;
    ckpt.params = trainer.params();
    ckpt.vocabulary = vocabulary;
    ckpt.epoch = epoch;
    ckpt.train_loss = loss_sum / static_cast<double>(batches);
    ckpt.metrics = Evaluate(trainer.params(), eval_set);
    if (!std::isfinite(ckpt.metrics.error)) break;
    if (options.on_epoch) options.on_epoch(ckpt);
    checkpoints.push_back(std::move(ckpt));
  }
  return checkpoints;
}

#define NEUROFUZZ_INSTANTIATE(T)                                                \
  template class ModelParams<T>;                                                \
  template ModelParams<T> InitParams<T>(const ModelSpec&, std::uint64_t);       \
  template Matrix<T> ForwardBatch<T>(const ModelParams<T>&,                     \
                                     std::span<const int>, int,                 \
                                     const ForwardOptions&, ForwardCache<T>*);  \
  template ModelParams<T> BackwardBatch<T>(const ModelParams<T>&,               \
                                           const ForwardCache<T>&,              \
                                           std::span<const int>);               \
  template ForwardResult<T> Forward<T>(const ModelParams<T>&,                   \
                                       std::span<const int>,                    \
                                       const ForwardOptions&);                  \
  template ModelParams<T> Backward<T>(const ModelParams<T>&,                    \
                                      const ForwardCache<T>&, int);             \
  template Distribution Predict<T>(const ModelParams<T>&, std::span<const int>); \
  template void AdamStep<T>(ModelParams<T>&, const ModelParams<T>&,             \
                            AdamState<T>&, const AdamConfig&);                  \
  template Metrics Evaluate<T>(const ModelParams<T>&,                           \
                               const corpus::WindowedDataset&, int);

NEUROFUZZ_INSTANTIATE(float)
NEUROFUZZ_INSTANTIATE(double)

#undef NEUROFUZZ_INSTANTIATE

}  // namespace neurofuzz::model
