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

#include "neurofuzz/corpus.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "neurofuzz/errors.h"
#include "neurofuzz/io.h"
#include "neurofuzz/pdf_lex.h"
#include "neurofuzz/rng.h"

namespace neurofuzz::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kEndObj = "endobj";
constexpr std::string_view kStream = "stream";
constexpr std::string_view kEndStream = "endstream";
constexpr std::string_view kPartsMagic = "NFZPARTS";
constexpr std::uint32_t kPartsVersion = 1;
constexpr int kBundleVersion = 1;

bool IsTextByte(unsigned char c) {
  return (c >= 0x20 && c <= 0x7e) || c == '\n' || c == '\r' || c == '\t';
}

// End offset (one past `endobj`) of the object whose header ends at `from`.
std::optional<std::size_t> FindObjectEnd(std::string_view bytes,
                                         std::size_t from) {
  std::size_t p = from;
  while (true) {
    std::size_t e = bytes.find(kEndObj, p);
    std::size_t s = pdf::FindStreamKeyword(bytes, p);
    if (s != std::string_view::npos && (e == std::string_view::npos || s < e)) {
      std::size_t es = bytes.find(kEndStream, s + kStream.size());
      p = es == std::string_view::npos ? s + kStream.size()
                                       : es + kEndStream.size();
      continue;
    }
    if (e == std::string_view::npos) return std::nullopt;
    return e + kEndObj.size();
  }
}

}  // namespace

Vocabulary::Vocabulary() { index_.fill(-1); }

Vocabulary Vocabulary::FromText(std::string_view text) {
  std::array<bool, 256> seen{};
  for (unsigned char c : text) seen[c] = true;
  std::vector<std::uint8_t> symbols;
  for (int b = 0; b < 256; ++b) {
    if (seen[b]) symbols.push_back(static_cast<std::uint8_t>(b));
  }
  return FromSymbols(symbols);
}

Vocabulary Vocabulary::FromSymbols(std::span<const std::uint8_t> symbols) {
  Vocabulary v;
  v.symbols_.assign(symbols.begin(), symbols.end());
  std::sort(v.symbols_.begin(), v.symbols_.end());
  v.symbols_.erase(std::unique(v.symbols_.begin(), v.symbols_.end()),
                   v.symbols_.end());
  for (std::size_t i = 0; i < v.symbols_.size(); ++i) {
    v.index_[v.symbols_[i]] = static_cast<int>(i);
  }
  return v;
}

std::vector<int> Vocabulary::Encode(std::string_view text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    int idx = index_[static_cast<unsigned char>(text[i])];
    if (idx < 0) {
      throw InvalidArgumentError("byte " +
                                 std::to_string(static_cast<unsigned char>(text[i])) +
                                 " at offset " + std::to_string(i) +
                                 " is outside the vocabulary");
    }
    out.push_back(idx);
  }
  return out;
}

std::string Vocabulary::Decode(std::span<const int> indices) const {
  std::string out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(static_cast<char>(symbols_.at(i)));
  return out;
}

std::vector<ByteSpan> ExtractObjects(std::string_view bytes) {
  std::vector<ByteSpan> spans;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto header = pdf::MatchObjectHeader(bytes, pos);
    if (!header) {
      ++pos;
      continue;
    }
    auto end = FindObjectEnd(bytes, header->end);
    if (!end) {
      pos = header->end;
      continue;
    }
    spans.push_back({pos, *end - pos});
    pos = *end;
  }
  return spans;
}

std::string FrameStream(std::string_view body, std::string_view eol) {
  std::string out;
  out.reserve(kStream.size() + eol.size() + body.size() + kEndStream.size());
  out.append(kStream).append(eol).append(body).append(kEndStream);
  return out;
}

TokenizedObject TokenizeBinary(std::string_view object, std::string_view bt) {
  if (bt.empty()) throw InvalidArgumentError("binary token must not be empty");
  TokenizedObject result;
  std::size_t p = 0;
  std::size_t search = 0;
  while (true) {
    std::size_t s = pdf::FindStreamKeyword(object, search);
    if (s == std::string_view::npos) break;
    std::size_t after = s + kStream.size();
    std::string_view eol;
    if (after < object.size() && object[after] == '\r') {
      eol = (after + 1 < object.size() && object[after + 1] == '\n')
                ? object.substr(after, 2)
                : object.substr(after, 1);
    } else if (after < object.size() && object[after] == '\n') {
      eol = object.substr(after, 1);
    } else {
      // `stream` not followed by an end-of-line is ordinary text.
      search = after;
      continue;
    }
    std::size_t body_start = after + eol.size();
    std::size_t es = object.find(kEndStream, body_start);
    if (es == std::string_view::npos) {
      throw ParseError("stream without endstream", s);
    }
    std::size_t stop = es + kEndStream.size();
    if (es == body_start) {
      // Nothing to store; an empty stream stays as literal text.
      search = stop;
      continue;
    }
    result.text.append(object.substr(p, s - p));
    BinaryPart part;
    part.position = result.text.size();
    part.bytes = std::string(object.substr(body_start, es - body_start));
    part.eol = std::string(eol);
    result.parts.push_back(std::move(part));
    result.text.append(bt);
    p = stop;
    search = stop;
  }
  result.text.append(object.substr(p));
  return result;
}

std::string ReassembleBinary(const TokenizedObject& tokenized,
                             std::string_view bt) {
  std::string out;
  std::size_t p = 0;
  for (const BinaryPart& part : tokenized.parts) {
    if (part.position < p ||
        tokenized.text.compare(part.position, bt.size(), bt) != 0) {
      throw FormatError("binary part position does not hold the token");
    }
    out.append(tokenized.text, p, part.position - p);
    out.append(FrameStream(part.bytes, part.eol));
    p = part.position + bt.size();
  }
  out.append(tokenized.text, p);
  return out;
}

std::uint64_t BinaryPartStore::Add(BinaryPart part) {
  if (part.bytes.empty()) {
    throw InvalidArgumentError("binary parts must be non-empty");
  }
  part.part_id = parts_.size();
  parts_.push_back(std::move(part));
  return parts_.back().part_id;
}

std::string BinaryPartStore::Serialize() const {
  io::ByteWriter w;
  w.Raw(kPartsMagic);
  w.U32(kPartsVersion);
  w.U64(parts_.size());
  for (const BinaryPart& part : parts_) {
    w.U64(part.part_id);
    w.U64(part.source_object);
    w.U64(part.position);
    w.Blob(part.eol);
    w.U64(part.bytes.size());
    w.Raw(part.bytes);
  }
  return w.Take();
}

BinaryPartStore BinaryPartStore::Deserialize(std::string_view bytes) {
  io::ByteReader r(bytes);
  if (r.Raw(kPartsMagic.size()) != kPartsMagic) {
    throw FormatError("binary part archive: bad magic");
  }
  std::uint32_t version = r.U32();
  if (version != kPartsVersion) {
    throw UnsupportedVersionError("binary part archive version " +
                                  std::to_string(version));
  }
  std::uint64_t count = r.U64();
  BinaryPartStore store;
  for (std::uint64_t i = 0; i < count; ++i) {
    BinaryPart part;
    part.part_id = r.U64();
    part.source_object = r.U64();
    part.position = r.U64();
    part.eol = r.Blob();
    std::uint64_t n = r.U64();
    part.bytes = std::string(r.Raw(n));
    if (part.part_id != i || part.bytes.empty()) {
      throw FormatError("binary part archive: bad part " + std::to_string(i));
    }
    store.parts_.push_back(std::move(part));
  }
  if (r.remaining() != 0) throw FormatError("binary part archive: trailing bytes");
  return store;
}

std::size_t CountOccurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t p = haystack.find(needle); p != std::string_view::npos;
       p = haystack.find(needle, p + needle.size())) {
    ++count;
  }
  return count;
}

PreprocessedCorpus BuildCorpus(std::vector<std::string> objects,
                               std::string_view et, const SplitRatios& ratios,
                               std::uint64_t seed) {
  if (et.empty()) throw InvalidArgumentError("end token must not be empty");
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw InvalidArgumentError("split ratios must be positive and sum to 1");
  }
  const std::size_t n = objects.size();
  if (n < 3) throw InvalidArgumentError("at least 3 objects are required");

  PreprocessedCorpus corpus;
  corpus.et = std::string(et);
  corpus.split_seed = seed;
  corpus.ratios = ratios;
  for (std::string& object : objects) {
    const bool terminated = object.ends_with(et);
    const std::size_t occurrences = CountOccurrences(object, et);
    if (occurrences > (terminated ? 1u : 0u)) ++corpus.et_warnings;
    if (!terminated) object.append(et);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.Shuffle(order);

  std::array<std::size_t, 3> counts = {
      static_cast<std::size_t>(std::floor(ratios.train * n + 1e-9)),
      static_cast<std::size_t>(std::floor(ratios.validation * n + 1e-9)), 0};
  counts[2] = n - counts[0] - counts[1];
  // Every split gets at least one object.
  for (std::size_t& c : counts) {
    if (c == 0) {
      auto largest = std::max_element(counts.begin(), counts.end());
      --*largest;
      c = 1;
    }
  }

  std::size_t cursor = 0;
  std::array<std::string*, 3> outputs = {&corpus.train, &corpus.validation,
                                         &corpus.test};
  for (int split = 0; split < 3; ++split) {
    for (std::size_t k = 0; k < counts[split]; ++k) {
      outputs[split]->append(objects[order[cursor++]]);
    }
  }
  corpus.train_objects = counts[0];
  corpus.validation_objects = counts[1];
  corpus.test_objects = counts[2];
  corpus.vocabulary = Vocabulary::FromText(corpus.train + corpus.validation +
                                           corpus.test + corpus.et + corpus.bt);
  return corpus;
}

PreprocessResult PreprocessFiles(std::span<const std::string> files,
                                 std::string_view bt) {
  PreprocessResult result;
  for (const std::string& file : files) {
    ++result.stats.files;
    for (const ByteSpan& span : ExtractObjects(file)) {
      ++result.stats.objects_found;
      std::string_view object = std::string_view(file).substr(span.offset, span.length);
      TokenizedObject tokenized;
      try {
        tokenized = TokenizeBinary(object, bt);
      } catch (const ParseError&) {
        ++result.stats.rejected_unterminated_stream;
        continue;
      }
      if (!std::all_of(tokenized.text.begin(), tokenized.text.end(),
                       [](char c) { return IsTextByte(static_cast<unsigned char>(c)); })) {
        ++result.stats.rejected_non_text;
        continue;
      }
      const std::uint64_t object_id = result.objects.size();
      for (BinaryPart& part : tokenized.parts) {
        part.source_object = object_id;
        result.store.Add(std::move(part));
      }
      result.objects.push_back(std::move(tokenized.text));
    }
  }
  result.stats.objects_kept = result.objects.size();
  result.stats.binary_parts = result.store.size();
  return result;
}

PreprocessResult PreprocessDirectory(const fs::path& dir, std::string_view bt) {
  if (!fs::is_directory(dir)) {
    throw ConfigError("not a directory: " + dir.string());
  }
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<std::string> files;
  files.reserve(paths.size());
  for (const fs::path& p : paths) files.push_back(io::ReadFile(p));
  return PreprocessFiles(files, bt);
}

std::size_t WindowCount(std::size_t n, int window, int jump) {
  if (window < 1 || jump < 1) {
    throw InvalidArgumentError("window and jump must be >= 1");
  }
  const std::size_t d = static_cast<std::size_t>(window);
  if (n < d + 1) return 0;
  return (n - 1 - d) / static_cast<std::size_t>(jump) + 1;
}

WindowedDataset::WindowedDataset(std::vector<int> sequence, int window, int jump)
    : sequence_(std::move(sequence)),
      window_(window),
      jump_(jump),
      count_(WindowCount(sequence_.size(), window, jump)) {}

std::span<const int> WindowedDataset::input(std::size_t i) const {
  if (i >= count_) throw InvalidArgumentError("window index out of range");
  return std::span<const int>(sequence_).subspan(i * jump_, window_);
}

int WindowedDataset::label(std::size_t i) const {
  if (i >= count_) throw InvalidArgumentError("window index out of range");
  return sequence_[i * jump_ + window_];
}

WindowedDataset Window(std::span<const int> sequence, int window, int jump) {
  return WindowedDataset(std::vector<int>(sequence.begin(), sequence.end()),
                         window, jump);
}

void WriteBundle(const PreprocessedCorpus& corpus, const fs::path& dir,
                 const PreprocessStats* stats) {
  fs::create_directories(dir);
  io::WriteFile(dir / "train.txt", corpus.train);
  io::WriteFile(dir / "validation.txt", corpus.validation);
  io::WriteFile(dir / "test.txt", corpus.test);
  io::WriteFile(dir / "binary_parts.bin", corpus.store.Serialize());

  json manifest;
  manifest["format"] = "neurofuzz-corpus";
  manifest["version"] = kBundleVersion;
  manifest["end_token"] = corpus.et;
  manifest["binary_token"] = corpus.bt;
  manifest["split_seed"] = corpus.split_seed;
  manifest["split_ratios"] = {corpus.ratios.train, corpus.ratios.validation,
                              corpus.ratios.test};
  manifest["objects"] = {{"train", corpus.train_objects},
                         {"validation", corpus.validation_objects},
                         {"test", corpus.test_objects}};
  manifest["symbols"] = {{"train", corpus.train.size()},
                         {"validation", corpus.validation.size()},
                         {"test", corpus.test.size()}};
  manifest["vocabulary"] = corpus.vocabulary.symbols();
  manifest["binary_parts"] = corpus.store.size();
  manifest["end_token_warnings"] = corpus.et_warnings;
  if (stats != nullptr) {
    manifest["preprocess"] = {
        {"files", stats->files},
        {"objects_found", stats->objects_found},
        {"objects_kept", stats->objects_kept},
        {"rejected_unterminated_stream", stats->rejected_unterminated_stream},
        {"rejected_non_text", stats->rejected_non_text}};
  }
  io::WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");
}

PreprocessedCorpus ReadBundle(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(io::ReadFile(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw FormatError("corpus manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "neurofuzz-corpus") {
    throw FormatError("not a corpus bundle: " + dir.string());
  }
  if (manifest.value("version", 0) != kBundleVersion) {
    throw UnsupportedVersionError("corpus bundle version " +
                                  manifest.value("version", json()).dump());
  }
  PreprocessedCorpus corpus;
  try {
    corpus.et = manifest.at("end_token").get<std::string>();
    corpus.bt = manifest.at("binary_token").get<std::string>();
    corpus.split_seed = manifest.at("split_seed").get<std::uint64_t>();
    auto ratios = manifest.at("split_ratios").get<std::vector<double>>();
    if (ratios.size() != 3) throw FormatError("corpus manifest: bad split_ratios");
    corpus.ratios = {ratios[0], ratios[1], ratios[2]};
    corpus.train_objects = manifest.at("objects").at("train").get<std::size_t>();
    corpus.validation_objects =
        manifest.at("objects").at("validation").get<std::size_t>();
    corpus.test_objects = manifest.at("objects").at("test").get<std::size_t>();
    corpus.et_warnings = manifest.value("end_token_warnings", std::size_t{0});
    corpus.vocabulary = Vocabulary::FromSymbols(
        manifest.at("vocabulary").get<std::vector<std::uint8_t>>());
  } catch (const json::exception& e) {
    throw FormatError("corpus manifest: " + std::string(e.what()));
  }
  corpus.train = io::ReadFile(dir / "train.txt");
  corpus.validation = io::ReadFile(dir / "validation.txt");
  corpus.test = io::ReadFile(dir / "test.txt");
  corpus.store = BinaryPartStore::Deserialize(io::ReadFile(dir / "binary_parts.bin"));
  for (const std::string* seq : {&corpus.train, &corpus.validation, &corpus.test}) {
    for (unsigned char c : *seq) {
      if (!corpus.vocabulary.contains(c)) {
        throw FormatError("corpus sequence holds a byte outside the vocabulary");
      }
    }
  }
  return corpus;
}

}  // namespace neurofuzz::corpus
