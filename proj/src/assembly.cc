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

#include "neurofuzz/assembly.h"

#include <algorithm>
#include <cstdio>
#include <set>

#include "neurofuzz/errors.h"
#include "neurofuzz/pdf_lex.h"

namespace neurofuzz::assembly {

namespace {

using pdf::IsDelimiter;
using pdf::IsDigit;
using pdf::IsRegular;
using pdf::IsWhitespace;

class Cursor {
 public:
  Cursor(std::string_view bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ >= bytes_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < bytes_.size() ? bytes_[pos_ + ahead] : '\0';
  }
  bool StartsWith(std::string_view s) const {
    return bytes_.substr(std::min(pos_, bytes_.size()), s.size()) == s;
  }
  void Advance(std::size_t n) { pos_ = std::min(bytes_.size(), pos_ + n); }

  // Skips whitespace and comments.
  void SkipSpace() {
    while (!done()) {
      if (IsWhitespace(peek())) {
        ++pos_;
      } else if (peek() == '%') {
        while (!done() && peek() != '\n' && peek() != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint64_t Unsigned(const char* what) {
    if (!IsDigit(peek())) Fail(std::string("expected ") + what);
    std::uint64_t v = 0;
    while (IsDigit(peek())) {
      const std::uint64_t digit = static_cast<std::uint64_t>(peek() - '0');
      if (v > (UINT64_MAX - digit) / 10) Fail(std::string(what) + " overflows");
      v = v * 10 + digit;
      ++pos_;
    }
    return v;
  }

  void Expect(std::string_view s) {
    if (!StartsWith(s)) Fail("expected '" + std::string(s) + "'");
    pos_ += s.size();
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw ParseError(what, pos_);
  }

  // Skips one PDF value (recursively for arrays and dictionaries).
  void SkipValue() {
    SkipSpace();
    if (done()) Fail("unexpected end of data in value");
    if (StartsWith("<<")) {
      pos_ += 2;
      while (true) {
        SkipSpace();
        if (done()) Fail("unterminated dictionary");
        if (StartsWith(">>")) {
          pos_ += 2;
          return;
        }
        SkipValue();
      }
    }
    const char c = peek();
    if (c == '[') {
      ++pos_;
      while (true) {
        SkipSpace();
        if (done()) Fail("unterminated array");
        if (peek() == ']') {
          ++pos_;
          return;
        }
        SkipValue();
      }
    }
    if (c == '(') {
      int depth = 0;
      while (!done()) {
        const char s = peek();
        ++pos_;
        if (s == '\\') {
          ++pos_;
        } else if (s == '(') {
          ++depth;
        } else if (s == ')' && --depth == 0) {
          return;
        }
      }
      Fail("unterminated string");
    }
    if (c == '<') {
      const std::size_t close = bytes_.find('>', pos_);
      if (close == std::string_view::npos) Fail("unterminated hex string");
      pos_ = close + 1;
      return;
    }
    if (c == '/') ++pos_;
    const std::size_t start = pos_;
    while (!done() && IsRegular(peek())) ++pos_;
    if (pos_ == start && c != '/') Fail("unexpected delimiter");
  }

  // A top-level dictionary value; folds `<int> <int> R` into one value.
  std::string_view Value() {
    SkipSpace();
    const std::size_t start = pos_;
    SkipValue();
    std::size_t end = pos_;
    if (IsDigit(bytes_[start])) {
      Cursor look(bytes_, pos_);
      look.SkipSpace();
      if (IsDigit(look.peek())) {
        look.Unsigned("generation");
        look.SkipSpace();
        if (look.peek() == 'R' && !IsRegular(look.peek(1))) {
          end = look.pos() + 1;
          pos_ = end;
        }
      }
    }
    return bytes_.substr(start, end - start);
  }

 private:
  std::string_view bytes_;
  std::size_t pos_;
};

using Dict = std::vector<std::pair<std::string, std::string>>;

Dict ParseDict(Cursor& cur) {
  cur.SkipSpace();
  cur.Expect("<<");
  Dict dict;
  while (true) {
    cur.SkipSpace();
    if (cur.done()) cur.Fail("unterminated dictionary");
    if (cur.StartsWith(">>")) {
      cur.Advance(2);
      return dict;
    }
    if (cur.peek() != '/') cur.Fail("expected a name key");
    cur.Advance(1);
    std::string key;
    while (!cur.done() && IsRegular(cur.peek())) {
      key.push_back(cur.peek());
      cur.Advance(1);
    }
    dict.emplace_back(std::move(key), std::string(cur.Value()));
  }
}

const std::string* Find(const Dict& dict, std::string_view key) {
  for (const auto& [k, v] : dict) {
    if (k == key) return &v;
  }
  return nullptr;
}

struct Section {
  std::map<std::uint64_t, ObjectLocation> in_use;
  std::set<std::uint64_t> free;
  Dict trailer;
};

Section ParseSection(std::string_view bytes, std::uint64_t offset) {
  if (offset >= bytes.size()) {
    throw ParseError("xref offset " + std::to_string(offset) +
                         " is past the end of the file",
                     bytes.size());
  }
  Cursor cur(bytes, offset);
  cur.SkipSpace();
  if (pdf::MatchObjectHeader(bytes, cur.pos())) {
    throw UnsupportedHostError("cross-reference streams are not supported");
  }
  cur.Expect("xref");
  Section section;
  while (true) {
    cur.SkipSpace();
    if (cur.StartsWith("trailer")) break;
    if (cur.done()) cur.Fail("missing trailer");
    const std::uint64_t first = cur.Unsigned("subsection start");
    while (cur.peek() == ' ') cur.Advance(1);
    const std::uint64_t count = cur.Unsigned("subsection count");
    for (std::uint64_t k = 0; k < count; ++k) {
      cur.SkipSpace();
      const std::uint64_t entry_offset = cur.Unsigned("entry offset");
      while (cur.peek() == ' ') cur.Advance(1);
      const std::uint64_t generation = cur.Unsigned("entry generation");
      while (cur.peek() == ' ') cur.Advance(1);
      const char kind = cur.peek();
      if (kind != 'n' && kind != 'f') cur.Fail("expected entry type 'n' or 'f'");
      cur.Advance(1);
      const std::uint64_t id = first + k;
      if (kind == 'n') {
        section.in_use.emplace(id, ObjectLocation{entry_offset, generation});
      } else {
        section.free.insert(id);
      }
    }
  }
  cur.Expect("trailer");
  section.trailer = ParseDict(cur);
  return section;
}

}  // namespace

std::string HostDocument::TrailerValue(std::string_view key) const {
  for (const auto& [k, v] : trailer) {
    if (k == key) return v;
  }
  return "";
}

HostDocument ParseHost(std::string bytes) {
  if (bytes.empty()) throw ParseError("empty input", 0);
  HostDocument host;
  host.bytes = std::move(bytes);
  std::string_view view = host.bytes;
  if (view.find("/ObjStm") != std::string_view::npos) {
    throw UnsupportedHostError("object streams are not supported");
  }
  const std::size_t sx = view.rfind("startxref");
  if (sx == std::string_view::npos) {
    throw ParseError("startxref not found", view.size());
  }
  Cursor cur(view, sx + 9);
  cur.SkipSpace();
  host.startxref = cur.Unsigned("startxref offset");

  std::set<std::uint64_t> visited;
  std::set<std::uint64_t> shadowed;  // ids already resolved by a newer section
  std::uint64_t offset = host.startxref;
  bool newest = true;
  while (true) {
    if (!visited.insert(offset).second) {
      throw ParseError("cycle in the /Prev chain", offset);
    }
    Section section = ParseSection(view, offset);
    if (Find(section.trailer, "Encrypt") != nullptr) {
      throw UnsupportedHostError("encrypted documents are not supported");
    }
    if (Find(section.trailer, "XRefStm") != nullptr) {
      throw UnsupportedHostError("hybrid cross-reference streams are not supported");
    }
    for (const auto& [id, loc] : section.in_use) {
      if (shadowed.insert(id).second) host.objects.emplace(id, loc);
    }
    for (std::uint64_t id : section.free) shadowed.insert(id);
    if (newest) {
      host.trailer = section.trailer;
      newest = false;
    }
    const std::string* prev = Find(section.trailer, "Prev");
    if (prev == nullptr) break;
    Cursor pc(*prev, 0);
    offset = pc.Unsigned("/Prev offset");
  }
  host.objects.erase(0);
  if (host.TrailerValue("Root").empty()) {
    throw ParseError("trailer has no /Root", host.startxref);
  }
  for (const auto& [id, loc] : host.objects) {
    auto header = pdf::MatchObjectHeader(view, loc.offset);
    if (!header || header->id != id || header->generation != loc.generation) {
      throw ParseError("xref entry for object " + std::to_string(id) +
                           " does not point at its header",
                       loc.offset);
    }
  }
  return host;
}

UpdatePlan PlanSou(const HostDocument& host) {
  if (host.objects.empty()) {
    throw InvalidArgumentError("host has no objects to update");
  }
  UpdatePlan plan;
  plan.mode = UpdateMode::kSou;
  plan.targets.push_back(host.objects.rbegin()->first);
  return plan;
}

UpdatePlan PlanMou(const HostDocument& host, Fraction fraction, Rng& rng) {
  if (fraction.den == 0 || fraction.num == 0 || fraction.num > fraction.den) {
    throw InvalidArgumentError("MOU fraction must be in (0, 1]");
  }
  if (host.objects.empty()) {
    throw InvalidArgumentError("host has no objects to update");
  }
  std::vector<std::uint64_t> ids;
  ids.reserve(host.objects.size());
  for (const auto& entry : host.objects) ids.push_back(entry.first);
  const std::size_t k = static_cast<std::size_t>(
      (fraction.num * ids.size() + fraction.den - 1) / fraction.den);
  UpdatePlan plan;
  plan.mode = UpdateMode::kMou;
  plan.fraction = fraction;
  for (std::size_t i : rng.SampleWithoutReplacement(ids.size(), k)) {
    plan.targets.push_back(ids[i]);
  }
  std::sort(plan.targets.begin(), plan.targets.end());
  return plan;
}

std::string IncrementalUpdate(const HostDocument& host,
                              std::span<const Replacement> replacements) {
  if (replacements.empty()) return host.bytes;
  std::set<std::uint64_t> seen;
  for (const Replacement& r : replacements) {
    if (!host.objects.contains(r.id)) {
      throw InvalidArgumentError("object " + std::to_string(r.id) +
                                 " does not exist in the host");
    }
    if (!seen.insert(r.id).second) {
      throw InvalidArgumentError("object " + std::to_string(r.id) +
                                 " is replaced twice");
    }
    auto header = pdf::MatchObjectHeader(r.body, 0);
    if (!header || header->id != r.id || header->generation != 0) {
      throw InvalidArgumentError("replacement body for object " +
                                 std::to_string(r.id) +
                                 " must start with '" + std::to_string(r.id) +
                                 " 0 obj'");
    }
    std::string_view body = r.body;
    while (!body.empty() && IsWhitespace(body.back())) body.remove_suffix(1);
    if (!body.ends_with("endobj")) {
      throw InvalidArgumentError("replacement body for object " +
                                 std::to_string(r.id) + " lacks 'endobj'");
    }
  }

  std::string out = host.bytes;
  if (out.back() != '\n' && out.back() != '\r') out.push_back('\n');
  std::map<std::uint64_t, std::uint64_t> offsets;
  for (const Replacement& r : replacements) {
    offsets[r.id] = out.size();
    out.append(r.body);
    if (out.back() != '\n') out.push_back('\n');
  }

  const std::uint64_t xref_offset = out.size();
  out.append("xref\n");
  char line[64];
  for (auto it = offsets.begin(); it != offsets.end();) {
    auto run_end = it;
    std::uint64_t count = 0;
    while (run_end != offsets.end() && run_end->first == it->first + count) {
      ++run_end;
      ++count;
    }
    std::snprintf(line, sizeof(line), "%llu %llu\n",
                  static_cast<unsigned long long>(it->first),
                  static_cast<unsigned long long>(count));
    out.append(line);
    for (; it != run_end; ++it) {
      std::snprintf(line, sizeof(line), "%010llu %05d n\r\n",
                    static_cast<unsigned long long>(it->second), 0);
      out.append(line);
    }
  }
  out.append("trailer\n<<");
  for (const auto& [key, value] : host.trailer) {
    if (key == "Prev" || key == "XRefStm") continue;
    out.append(" /").append(key).append(" ").append(value);
  }
  out.append(" /Prev ").append(std::to_string(host.startxref));
  out.append(" >>\nstartxref\n").append(std::to_string(xref_offset));
  out.append("\n%%EOF\n");
  return out;
}

std::string MakeObjectBody(std::string_view text, std::uint64_t id) {
  std::string body = std::to_string(id) + " 0 obj";
  const std::size_t start = pdf::FindLastObjectHeader(text);
  if (start == std::string_view::npos) {
    body.push_back('\n');
    body.append(text);
  } else {
    body.append(text.substr(pdf::MatchObjectHeader(text, start)->end));
  }
  std::string_view trimmed = body;
  while (!trimmed.empty() && IsWhitespace(trimmed.back())) trimmed.remove_suffix(1);
  if (!trimmed.ends_with("endobj")) body.append("\nendobj");
  return body;
}

std::string WriteClassicPdf(std::span<const std::string> bodies) {
  std::string out = "%PDF-1.4\n%\xE2\xE3\xCF\xD3\n";
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    offsets.push_back(out.size());
    out.append(std::to_string(i + 1)).append(" 0 obj\n");
    out.append(bodies[i]).append("\nendobj\n");
  }
  const std::size_t xref = out.size();
  out.append("xref\n0 ").append(std::to_string(bodies.size() + 1)).append("\n");
  out.append("0000000000 65535 f\r\n");
  char line[32];
  for (std::size_t off : offsets) {
    std::snprintf(line, sizeof(line), "%010llu 00000 n\r\n",
                  static_cast<unsigned long long>(off));
    out.append(line);
  }
  out.append("trailer\n<< /Size ").append(std::to_string(bodies.size() + 1));
  out.append(" /Root 1 0 R >>\nstartxref\n").append(std::to_string(xref));
  out.append("\n%%EOF\n");
  return out;
}

}  // namespace neurofuzz::assembly
