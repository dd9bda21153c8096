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

#include "neurofuzz/pdf_lex.h"

#include <limits>

namespace neurofuzz::pdf {

namespace {

// Parses a run of decimal digits at `pos`; fails on empty or overflowing runs.
bool ParseUnsigned(std::string_view bytes, std::size_t& pos,
                   std::uint64_t& value) {
  const std::size_t start = pos;
  value = 0;
  while (pos < bytes.size() && IsDigit(bytes[pos])) {
    const std::uint64_t digit = static_cast<std::uint64_t>(bytes[pos] - '0');
    if (value > (std::numeric_limits<std::uint64_t>::max() - digit) / 10) {
      return false;
    }
    value = value * 10 + digit;
    ++pos;
  }
  return pos > start;
}

bool SkipWhitespace(std::string_view bytes, std::size_t& pos) {
  const std::size_t start = pos;
  while (pos < bytes.size() && IsWhitespace(bytes[pos])) ++pos;
  return pos > start;
}

}  // namespace

std::optional<ObjectHeader> MatchObjectHeader(std::string_view bytes,
                                              std::size_t pos) {
  if (pos >= bytes.size() || !IsDigit(bytes[pos])) return std::nullopt;
  if (pos > 0 && IsDigit(bytes[pos - 1])) return std::nullopt;
  ObjectHeader header;
  std::size_t p = pos;
  if (!ParseUnsigned(bytes, p, header.id)) return std::nullopt;
  if (!SkipWhitespace(bytes, p)) return std::nullopt;
  if (!ParseUnsigned(bytes, p, header.generation)) return std::nullopt;
  if (!SkipWhitespace(bytes, p)) return std::nullopt;
  if (bytes.substr(p, 3) != "obj") return std::nullopt;
  p += 3;
  if (p < bytes.size() && IsRegular(bytes[p])) return std::nullopt;
  header.end = p;
  return header;
}

std::size_t FindStreamKeyword(std::string_view bytes, std::size_t from) {
  constexpr std::string_view kStream = "stream";
  std::size_t p = bytes.find(kStream, from);
  while (p != std::string_view::npos) {
    const bool tail_of_endstream = p >= 3 && bytes.substr(p - 3, 3) == "end";
    if (!tail_of_endstream) return p;
    p = bytes.find(kStream, p + kStream.size());
  }
  return std::string_view::npos;
}

std::size_t FindLastObjectHeader(std::string_view bytes) {
  std::size_t p = bytes.rfind("obj");
  while (p != std::string_view::npos) {
    // Walk back over `<int> <ws>+ <int> <ws>+` to the start of the header.
    std::size_t q = p;
    while (q > 0 && IsWhitespace(bytes[q - 1])) --q;
    while (q > 0 && IsDigit(bytes[q - 1])) --q;
    while (q > 0 && IsWhitespace(bytes[q - 1])) --q;
    while (q > 0 && IsDigit(bytes[q - 1])) --q;
    if (auto header = MatchObjectHeader(bytes, q); header && header->end == p + 3) {
      return q;
    }
    if (p == 0) break;
    p = bytes.rfind("obj", p - 1);
  }
  return std::string_view::npos;
}

}  // namespace neurofuzz::pdf
