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

// Seed-file preprocessing: object extraction, binary-stream tokenization,
// corpus assembly and supervised windowing.

#ifndef NEUROFUZZ_CORPUS_H_
#define NEUROFUZZ_CORPUS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace neurofuzz::corpus {

inline constexpr std::string_view kDefaultEndToken = "endobj";
inline constexpr std::string_view kDefaultBinaryToken = "stream";

// Ordered set of byte symbols with a dense index in [0, size()).
class Vocabulary {
 public:
  Vocabulary();
  // Symbols are deduplicated and sorted by byte value.
  static Vocabulary FromText(std::string_view text);
  static Vocabulary FromSymbols(std::span<const std::uint8_t> symbols);

  int size() const { return static_cast<int>(symbols_.size()); }
  bool empty() const { return symbols_.empty(); }
  std::uint8_t symbol(int index) const { return symbols_.at(index); }
  const std::vector<std::uint8_t>& symbols() const { return symbols_; }

  // -1 if the byte is not in the vocabulary.
  int index_of(std::uint8_t byte) const { return index_[byte]; }
  bool contains(std::uint8_t byte) const { return index_[byte] >= 0; }

  // Throws InvalidArgumentError on a byte outside the vocabulary.
  std::vector<int> Encode(std::string_view text) const;
  std::string Decode(std::span<const int> indices) const;

  bool operator==(const Vocabulary& other) const {
    return symbols_ == other.symbols_;
  }

 private:
  std::vector<std::uint8_t> symbols_;
  std::array<int, 256> index_;
};

// Half-open byte range [offset, offset + length).
struct ByteSpan {
  std::size_t offset = 0;
  std::size_t length = 0;
  bool operator==(const ByteSpan&) const = default;
};

// Every `<int> <int> obj ... endobj` span, in file order, non-overlapping.
// Stream bodies are skipped while looking for the closing keyword.
std::vector<ByteSpan> ExtractObjects(std::string_view pdf_bytes);

struct BinaryPart {
  std::uint64_t part_id = 0;
  std::string bytes;          // stream body: after keyword+EOL, before endstream
  std::string eol;            // the end-of-line that followed `stream`
  std::uint64_t source_object = 0;
  std::uint64_t position = 0;  // offset of the token in the tokenized object
};

class BinaryPartStore {
 public:
  // Assigns the next part id. Empty parts are rejected.
  std::uint64_t Add(BinaryPart part);
  const std::vector<BinaryPart>& parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  bool empty() const { return parts_.empty(); }
  const BinaryPart& at(std::size_t i) const { return parts_.at(i); }

  // Length-prefixed archive; see README for the layout.
  std::string Serialize() const;
  static BinaryPartStore Deserialize(std::string_view bytes);

 private:
  std::vector<BinaryPart> parts_;
};

struct TokenizedObject {
  std::string text;
  // Recorded in text order; `position` is relative to `text`.
  std::vector<BinaryPart> parts;
};

// Replaces each `stream<EOL>body endstream` region with `bt`. The removed
// body is recorded so that ReassembleBinary restores the exact input.
// Throws ParseError on a `stream` keyword without a matching `endstream`.
TokenizedObject TokenizeBinary(std::string_view object_text,
                               std::string_view bt = kDefaultBinaryToken);

// Inverse of TokenizeBinary.
std::string ReassembleBinary(const TokenizedObject& tokenized,
                             std::string_view bt = kDefaultBinaryToken);

// Wraps a stream body in its keywords: `stream` EOL body `endstream`.
std::string FrameStream(std::string_view body, std::string_view eol);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct PreprocessedCorpus {
  std::string train;
  std::string validation;
  std::string test;
  std::string et{kDefaultEndToken};
  std::string bt{kDefaultBinaryToken};
  BinaryPartStore store;
  Vocabulary vocabulary;
  std::uint64_t split_seed = 0;
  SplitRatios ratios;
  std::size_t train_objects = 0;
  std::size_t validation_objects = 0;
  std::size_t test_objects = 0;
  // Objects that carried the end token somewhere other than at the end.
  std::size_t et_warnings = 0;
};

// Terminates each object with `et` (unless it already ends with it),
// shuffles deterministically by seed, partitions by ratio and concatenates
// each partition. The vocabulary covers all three splits plus the
// characters of both tokens.
PreprocessedCorpus BuildCorpus(std::vector<std::string> objects,
                               std::string_view et, const SplitRatios& ratios,
                               std::uint64_t seed);

struct PreprocessStats {
  std::size_t files = 0;
  std::size_t objects_found = 0;
  std::size_t objects_kept = 0;
  std::size_t rejected_unterminated_stream = 0;
  std::size_t rejected_non_text = 0;
  std::size_t binary_parts = 0;
};

struct PreprocessResult {
  std::vector<std::string> objects;  // tokenized, in file-path order
  BinaryPartStore store;
  PreprocessStats stats;
};

// Extracts and tokenizes every object of every regular file under `dir`,
// ordered by path. Objects whose remaining text is not printable ASCII or
// whitespace are dropped.
PreprocessResult PreprocessDirectory(const std::filesystem::path& dir,
                                     std::string_view bt);
// Same, for in-memory files (already ordered).
PreprocessResult PreprocessFiles(std::span<const std::string> files,
                                 std::string_view bt);

// Supervised examples over an encoded sequence: input i is
// seq[i*jump, i*jump + window), label i is seq[i*jump + window].
class WindowedDataset {
 public:
  WindowedDataset() = default;
  WindowedDataset(std::vector<int> sequence, int window, int jump);

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  int window() const { return window_; }
  int jump() const { return jump_; }
  std::span<const int> input(std::size_t i) const;
  int label(std::size_t i) const;
  const std::vector<int>& sequence() const { return sequence_; }

 private:
  std::vector<int> sequence_;
  int window_ = 1;
  int jump_ = 1;
  std::size_t count_ = 0;
};

// Throws InvalidArgumentError if window or jump < 1. A sequence shorter
// than window + 1 yields an empty dataset.
WindowedDataset Window(std::span<const int> sequence, int window, int jump);

// floor((n - 1 - window) / jump) + 1 when n >= window + 1, else 0.
std::size_t WindowCount(std::size_t n, int window, int jump);

// Corpus bundle directory: train.txt, validation.txt, test.txt,
// binary_parts.bin and manifest.json.
void WriteBundle(const PreprocessedCorpus& corpus,
                 const std::filesystem::path& dir,
                 const PreprocessStats* stats = nullptr);
PreprocessedCorpus ReadBundle(const std::filesystem::path& dir);

std::size_t CountOccurrences(std::string_view haystack, std::string_view needle);

}  // namespace neurofuzz::corpus

#endif  // NEUROFUZZ_CORPUS_H_
