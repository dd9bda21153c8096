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

#include "neurofuzz/checkpoint.h"

#include <cstdio>
#include <vector>

#include "neurofuzz/errors.h"
#include "neurofuzz/io.h"
#include "neurofuzz/rng.h"

namespace neurofuzz::model {

namespace {

constexpr std::string_view kMagic("NFZCKPT\0", 8);
constexpr std::string_view kEndMagic("NFZEND\0\0", 8);

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  const ModelParams<float>& params = ckpt.params;
  if (!(params.spec() == ckpt.spec)) {
    throw InvalidArgumentError("checkpoint parameters do not match its spec");
  }
  io::ByteWriter w;
  w.Raw(kMagic);
  w.U32(kCheckpointVersion);
  w.U32(static_cast<std::uint32_t>(ckpt.spec.layers));
  w.U32(static_cast<std::uint32_t>(ckpt.spec.units));
  w.U8(static_cast<std::uint8_t>(ckpt.spec.direction));
  w.F64(ckpt.spec.dropout);
  w.U32(static_cast<std::uint32_t>(ckpt.spec.vocab_size));
  w.U32(static_cast<std::uint32_t>(ckpt.spec.window));
  const auto& symbols = ckpt.vocabulary.symbols();
  w.Blob(std::string_view(reinterpret_cast<const char*>(symbols.data()),
                          symbols.size()));
  w.U32(static_cast<std::uint32_t>(ckpt.epoch));
  w.F64(ckpt.metrics.accuracy);
  w.F64(ckpt.metrics.error);
  w.F64(ckpt.metrics.perplexity);
  w.U64(ckpt.metrics.examples);
  w.F64(ckpt.train_loss);
  w.U32(static_cast<std::uint32_t>(params.tensors().size()));
  for (std::size_t t = 0; t < params.tensors().size(); ++t) {
    const TensorInfo& info = params.tensors()[t];
    w.Blob(info.name);
    w.U32(static_cast<std::uint32_t>(info.rows));
    w.U32(static_cast<std::uint32_t>(info.cols));
    const float* data = params.values().data() + info.offset;
    for (std::size_t k = 0; k < static_cast<std::size_t>(info.rows) * info.cols; ++k) {
      w.F32(data[k]);
    }
  }
  w.Raw(kEndMagic);
  return w.Take();
}

Checkpoint DeserializeCheckpoint(std::string_view bytes) {
  io::ByteReader r(bytes);
  if (bytes.size() < kMagic.size() || r.Raw(kMagic.size()) != kMagic) {
    throw FormatError("not a checkpoint: bad magic");
  }
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw UnsupportedVersionError("checkpoint version " + std::to_string(version) +
                                  " is not supported (expected " +
                                  std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;
  ckpt.spec.layers = static_cast<int>(r.U32());
  ckpt.spec.units = static_cast<int>(r.U32());
  const std::uint8_t direction = r.U8();
  if (direction > 1) throw FormatError("checkpoint has an unknown direction");
  ckpt.spec.direction = static_cast<Direction>(direction);
  ckpt.spec.dropout = r.F64();
  ckpt.spec.vocab_size = static_cast<int>(r.U32());
  ckpt.spec.window = static_cast<int>(r.U32());
  try {
    ckpt.spec.Validate();
  } catch (const InvalidArgumentError& e) {
    throw FormatError(std::string("checkpoint spec is invalid: ") + e.what());
  }
  const std::string symbols = r.Blob();
  ckpt.vocabulary = corpus::Vocabulary::FromSymbols(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(symbols.data()), symbols.size()));
  if (ckpt.vocabulary.size() != ckpt.spec.vocab_size ||
      ckpt.vocabulary.size() != static_cast<int>(symbols.size())) {
    throw FormatError("checkpoint vocabulary does not match its spec");
  }
  ckpt.epoch = static_cast<int>(r.U32());
  ckpt.metrics.accuracy = r.F64();
  ckpt.metrics.error = r.F64();
  ckpt.metrics.perplexity = r.F64();
  ckpt.metrics.examples = r.U64();
  ckpt.train_loss = r.F64();

  ModelParams<float> params(ckpt.spec);
  const std::uint32_t count = r.U32();
  if (count != params.tensors().size()) {
    throw FormatError("checkpoint tensor count does not match its spec");
  }
  for (const TensorInfo& info : params.tensors()) {
    const std::string name = r.Blob();
    const int rows = static_cast<int>(r.U32());
    const int cols = static_cast<int>(r.U32());
    if (name != info.name || rows != info.rows || cols != info.cols) {
      throw FormatError("checkpoint tensor '" + name + "' has an unexpected shape");
    }
    float* data = params.values().data() + info.offset;
    for (std::size_t k = 0; k < static_cast<std::size_t>(rows) * cols; ++k) {
      data[k] = r.F32();
    }
  }
  if (r.remaining() != kEndMagic.size() || r.Raw(kEndMagic.size()) != kEndMagic) {
    throw FormatError("checkpoint is truncated or has trailing data");
  }
  ckpt.params = std::move(params);
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  io::WriteFile(path, SerializeCheckpoint(ckpt));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return DeserializeCheckpoint(io::ReadFile(path));
}

std::string CheckpointId(const Checkpoint& ckpt) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    Fingerprint64(SerializeCheckpoint(ckpt))));
  return buf;
}

}  // namespace neurofuzz::model
