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

// Binary checkpoint container. All integers little-endian:
//
//   "NFZCKPT\0"  u32 version
//   spec:        u32 layers, u32 units, u8 direction, f64 dropout,
//                u32 vocab_size, u32 window
//   vocabulary:  u32 n, n bytes
//   u32 epoch, f64 accuracy, f64 error, f64 perplexity, u64 examples,
//   f64 train_loss
//   u32 tensor count, then per tensor: Blob name, u32 rows, u32 cols,
//                rows*cols f32 (column-major)
//   "NFZEND\0\0"

#ifndef NEUROFUZZ_CHECKPOINT_H_
#define NEUROFUZZ_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "neurofuzz/model.h"

namespace neurofuzz::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string SerializeCheckpoint(const Checkpoint& ckpt);
// Throws FormatError on bad magic, truncation or inconsistent shapes and
// UnsupportedVersionError on a version other than kCheckpointVersion.
Checkpoint DeserializeCheckpoint(std::string_view bytes);

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Stable identifier derived from the serialized bytes.
std::string CheckpointId(const Checkpoint& ckpt);

}  // namespace neurofuzz::model

#endif  // NEUROFUZZ_CHECKPOINT_H_
