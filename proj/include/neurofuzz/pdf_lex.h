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

// Lexical helpers shared by object extraction, host parsing and the oracle.

#ifndef NEUROFUZZ_PDF_LEX_H_
#define NEUROFUZZ_PDF_LEX_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace neurofuzz::pdf {

inline bool IsWhitespace(char c) {
  return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' ||
         c == '\0';
}

inline bool IsDelimiter(char c) {
  switch (c) {
    case '(': case ')': case '<': case '>': case '[': case ']':
    case '{': case '}': case '/': case '%':
      return true;
    default:
      return false;
  }
}

inline bool IsRegular(char c) { return !IsWhitespace(c) && !IsDelimiter(c); }
inline bool IsDigit(char c) { return c >= '0' && c <= '9'; }

struct ObjectHeader {
  std::uint64_t id = 0;
  std::uint64_t generation = 0;
  std::size_t end = 0;  // one past `obj`
};

// Matches `<int> <ws>+ <int> <ws>+ obj` starting exactly at `pos`. The
// header must not continue a longer digit run and `obj` must not be
// followed by a regular character.
std::optional<ObjectHeader> MatchObjectHeader(std::string_view bytes,
                                              std::size_t pos);

// First `stream` keyword at or after `from` that is not the tail of
// `endstream`. npos if none.
std::size_t FindStreamKeyword(std::string_view bytes, std::size_t from);

// Offset of the last object header in `bytes`, npos if none.
std::size_t FindLastObjectHeader(std::string_view bytes);

}  // namespace neurofuzz::pdf

#endif  // NEUROFUZZ_PDF_LEX_H_
