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

// Host PDF parsing and incremental updates over classic xref tables.

#ifndef NEUROFUZZ_ASSEMBLY_H_
#define NEUROFUZZ_ASSEMBLY_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "neurofuzz/rng.h"

namespace neurofuzz::assembly {

struct ObjectLocation {
  std::uint64_t offset = 0;
  std::uint64_t generation = 0;
  bool operator==(const ObjectLocation&) const = default;
};

struct HostDocument {
  std::string bytes;
  // In-use objects resolved through the whole /Prev chain, newest wins.
  std::map<std::uint64_t, ObjectLocation> objects;
  std::uint64_t startxref = 0;
  // Newest trailer dictionary, top-level keys (without '/') to raw values,
  // in file order.
  std::vector<std::pair<std::string, std::string>> trailer;

  std::size_t object_count() const { return objects.size(); }
  // Raw trailer value, empty if absent.
  std::string TrailerValue(std::string_view key) const;
};

// Throws ParseError (with byte offset) on malformed input and
// UnsupportedHostError on xref streams, object streams or encryption.
HostDocument ParseHost(std::string bytes);

enum class UpdateMode { kSou, kMou };

struct Fraction {
  std::uint64_t num = 1;
  std::uint64_t den = 1;
};

struct UpdatePlan {
  UpdateMode mode = UpdateMode::kSou;
  std::vector<std::uint64_t> targets;
  Fraction fraction;
};

// Single target: the largest object id.
UpdatePlan PlanSou(const HostDocument& host);
// ceil(fraction * count) distinct ids, uniform without replacement, sorted.
UpdatePlan PlanMou(const HostDocument& host, Fraction fraction, Rng& rng);

struct Replacement {
  std::uint64_t id = 0;
  std::string body;  // `<id> 0 obj ... endobj`
};

// Host bytes, then the appended objects, one xref section with a
// subsection per contiguous id run, and a trailer chained by /Prev.
// Throws InvalidArgumentError on unknown ids or malformed bodies.
std::string IncrementalUpdate(const HostDocument& host,
                              std::span<const Replacement> replacements);

// Turns generated text into a replacement body for `id`: the span from the
// last object header (or the whole text if there is none) with its header
// rewritten to `<id> 0 obj`. A missing `endobj` is appended.
std::string MakeObjectBody(std::string_view text, std::uint64_t id);

// Minimal classic-xref PDF whose object i+1 has dictionary `bodies[i]` and
// whose /Root is object 1. Used for fixtures and the synthetic host.
std::string WriteClassicPdf(std::span<const std::string> bodies);

}  // namespace neurofuzz::assembly

#endif  // NEUROFUZZ_ASSEMBLY_H_
