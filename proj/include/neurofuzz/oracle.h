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

// A small PDF-like object language with an exact reference parser.
//
//   object  = int " 0 obj\n" dict [ "\n" stream ] "\nendobj"
//   stream  = "stream" eol bytes "endstream"      eol = "\n" | "\r\n"
//   dict    = "<<" { " " key " " value } " >>"
//   value   = name | int | ref | string | array | dict
//   ref     = int " " int " R"
//   array   = "[" [ value { " " value } ] "]"
//   string  = "(" { printable except ( ) \ } ")"
//   name    = "/" alnum { alnum }
//   int     = "0" | [ "-" ] nonzero-digit { digit }
//
// Beyond syntax the parser requires: keys from the known key set, no
// repeated key within one dictionary, dictionary nesting depth <= 3, a
// /Type value (when present) from the known type set and a /Length key on
// any object that carries a stream.

#ifndef NEUROFUZZ_ORACLE_H_
#define NEUROFUZZ_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace neurofuzz::oracle {

struct MiniFormatSpec {
  int max_object_id = 24;
  double stream_fraction = 0.27;
  int min_stream_bytes = 6;
  int max_stream_bytes = 24;
  int max_depth = 3;
};

// n complete objects; stream bodies hold arbitrary bytes.
std::vector<std::string> SynthCorpus(const MiniFormatSpec& spec, std::size_t n,
                                     std::uint64_t seed);

// A classic-xref host document with `objects` synthetic objects.
std::string SynthHost(const MiniFormatSpec& spec, std::size_t objects,
                      std::uint64_t seed);

struct Verdict {
  bool ok = false;
  std::size_t position = 0;  // first offending byte when !ok
  std::string reason;
  std::vector<std::string> keys;  // every dictionary key, in order
};

// Never throws.
Verdict ParseStrict(std::string_view bytes);

// Fraction of the suite accepted by ParseStrict. Throws InvalidArgumentError
// on an empty suite.
double PassRate(std::span<const std::string> suite);

// The span from the last object header to the end; the whole input if there
// is no header.
std::string_view TrailingObject(std::string_view bytes);

}  // namespace neurofuzz::oracle

#endif  // NEUROFUZZ_ORACLE_H_
