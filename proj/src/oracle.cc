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

#include "neurofuzz/oracle.h"

#include <algorithm>
#include <array>
#include <functional>
#include <set>

#include "neurofuzz/assembly.h"
#include "neurofuzz/errors.h"
#include "neurofuzz/pdf_lex.h"
#include "neurofuzz/rng.h"

namespace neurofuzz::oracle {

namespace {

constexpr std::array<std::string_view, 6> kTypes = {
    "Catalog", "Pages", "Page", "Font", "Annot", "XObject"};

constexpr std::array<std::string_view, 40> kKeys = {
    "Type",     "Pages",     "Outlines", "PageMode",   "Lang",     "Names",
    "Metadata", "Kids",      "Count",    "Parent",     "Rotate",   "Contents",
    "Resources", "Font",     "F1",       "F2",         "XObject",  "MediaBox",
    "Subtype",  "BaseFont",  "Encoding", "FirstChar",  "LastChar", "Title",
    "Author",   "Producer",  "Creator",  "Rect",       "Border",   "F",
    "Length",   "Filter",    "DecodeParms", "Columns", "Width",    "Annots",
    "Widths",   "Subject",   "Height",   "Im1"};

using Emit = std::function<std::string(Rng&)>;

struct Field {
  std::string_view key;
  double probability;  // 1 for required keys
  Emit value;
};

struct Template {
  double weight;
  bool stream;
  std::vector<Field> fields;
};

Emit Const(std::string_view v) {
  return [v](Rng&) { return std::string(v); };
}

Emit OneOf(std::initializer_list<std::string_view> options) {
  std::vector<std::string_view> copy(options);
  return [copy](Rng& rng) { return std::string(copy[rng.Below(copy.size())]); };
}

Emit Ref(int max_id) {
  return [max_id](Rng& rng) {
    return std::to_string(rng.UniformInt(1, max_id)) + " 0 R";
  };
}

Emit Int(int lo, int hi) {
  return [lo, hi](Rng& rng) { return std::to_string(rng.UniformInt(lo, hi)); };
}

std::vector<Template> Templates(const MiniFormatSpec& spec) {
  const int m = spec.max_object_id;
  const double t = 1.0 - spec.stream_fraction;
  return {
      {t * 0.14, false,
       {{"Type", 1, Const("/Catalog")},
        {"Pages", 1, Ref(m)},
        {"Outlines", 0.2, Ref(m)},
        {"PageMode", 0.2, OneOf({"/UseNone", "/UseOutlines"})},
        {"Lang", 0.2, OneOf({"(en)", "(fr)"})},
        {"Names", 0.15, Ref(m)},
        {"Metadata", 0.1, Ref(m)}}},
      {t * 0.14, false,
       {{"Type", 1, Const("/Pages")},
        {"Kids", 1,
         [m](Rng& rng) {
           std::string out = "[" + Ref(m)(rng);
           if (rng.Below(2) == 0) out += " " + Ref(m)(rng);
           return out + "]";
         }},
        {"Count", 1, Int(1, 9)},
        {"Parent", 0.2, Ref(m)},
        {"Rotate", 0.15, OneOf({"0", "90"})}}},
      {t * 0.22, false,
       {{"Type", 1, Const("/Page")},
        {"Parent", 1, Ref(m)},
        {"Contents", 0.4, Ref(m)},
        {"Resources", 0.25,
         [m](Rng& rng) {
           std::string inner = "<< /F1 " + Ref(m)(rng);
           if (rng.Below(4) == 0) inner += " /F2 " + Ref(m)(rng);
           inner += " >>";
           std::string out = "<< /Font " + inner;
           if (rng.Below(5) == 0) out += " /XObject << /Im1 " + Ref(m)(rng) + " >>";
           return out + " >>";
         }},
        {"MediaBox", 0.2, Const("[0 0 612 792]")},
        {"Annots", 0.15, [m](Rng& rng) { return "[" + Ref(m)(rng) + "]"; }}}},
      {t * 0.18, false,
       {{"Type", 1, Const("/Font")},
        {"Subtype", 1, OneOf({"/Type1", "/TrueType"})},
        {"BaseFont", 1, OneOf({"/Helvetica", "/Courier", "/Times"})},
        {"Encoding", 0.2, Const("/WinAnsi")},
        {"FirstChar", 0.15, Const("32")},
        {"LastChar", 0.15, Const("126")},
        {"Widths", 0.1, Ref(m)}}},
      {t * 0.16, false,
       {{"Title", 1, OneOf({"(Report)", "(Draft)", "(Notes)"})},
        {"Author", 0.3, OneOf({"(Ann)", "(Bob)"})},
        {"Producer", 0.3, OneOf({"(pdfgen)", "(writer)"})},
        {"Creator", 0.2, OneOf({"(tool)", "(app)"})},
        {"Subject", 0.1, OneOf({"(memo)", "(spec)"})}}},
      {t * 0.16, false,
       {{"Type", 1, Const("/Annot")},
        {"Subtype", 1, OneOf({"/Link", "/Text"})},
        {"Rect", 1,
         [](Rng& rng) {
           return "[" + Int(0, 9)(rng) + " " + Int(0, 9)(rng) + " " +
                  Int(10, 99)(rng) + " " + Int(10, 99)(rng) + "]";
         }},
        {"Border", 0.2, Const("[0 0 1]")},
        {"F", 0.2, Const("4")},
        {"Contents", 0.1, OneOf({"(note)", "(link)"})}}},
      {spec.stream_fraction, true,
       {{"Type", 0.25, Const("/XObject")},
        {"Length", 1, Int(spec.min_stream_bytes, spec.max_stream_bytes)},
        {"Filter", 0.35, Const("/FlateDecode")},
        {"DecodeParms", 0.15,
         [](Rng& rng) { return "<< /Columns " + Int(1, 8)(rng) + " >>"; }},
        {"Width", 0.15, Int(1, 64)},
        {"Height", 0.1, Int(1, 64)}}},
  };
}

std::string SynthBody(const std::vector<Template>& templates,
                      const MiniFormatSpec& spec, Rng& rng) {
  double total = 0.0;
  for (const Template& t : templates) total += t.weight;
  double u = rng.Uniform01() * total;
  const Template* chosen = &templates.back();
  for (const Template& t : templates) {
    if (u < t.weight) {
      chosen = &t;
      break;
    }
    u -= t.weight;
  }
  std::string out = "<<";
  for (const Field& f : chosen->fields) {
    if (f.probability < 1.0 && rng.Uniform01() >= f.probability) continue;
    out.append(" /").append(f.key).append(" ").append(f.value(rng));
  }
  out.append(" >>");
  if (chosen->stream) {
    const auto len = static_cast<std::size_t>(
        rng.UniformInt(spec.min_stream_bytes, spec.max_stream_bytes));
    std::string body;
    for (std::size_t i = 0; i < len; ++i) {
      body.push_back(static_cast<char>(rng.Below(256)));
    }
    // Keep the terminator unambiguous.
    while (body.find("endstream") != std::string::npos) body[0] ^= 0x55;
    out.append("\nstream").append(rng.Below(2) == 0 ? "\n" : "\r\n");
    out.append(body).append("\nendstream");
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view bytes) : b_(bytes) {}

  Verdict Run() {
    Verdict v;
    if (!Object()) {
      v.ok = false;
      v.position = error_pos_;
      v.reason = error_;
      v.keys = std::move(keys_);
      return v;
    }
    v.ok = true;
    v.keys = std::move(keys_);
    return v;
  }

 private:
  bool Fail(std::string reason) {
    if (error_.empty()) {
      error_ = std::move(reason);
      error_pos_ = std::min(p_, b_.size());
    }
    return false;
  }

  bool Lit(std::string_view s) {
    if (b_.substr(p_, s.size()) != s) {
      return Fail("expected '" + std::string(s) + "'");
    }
    p_ += s.size();
    return true;
  }

  char Peek(std::size_t ahead = 0) const {
    return p_ + ahead < b_.size() ? b_[p_ + ahead] : '\0';
  }

  static bool IsAlnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9');
  }

  bool Int() {
    if (Peek() == '-') ++p_;
    if (!pdf::IsDigit(Peek())) return Fail("expected an integer");
    if (Peek() == '0' && pdf::IsDigit(Peek(1))) return Fail("leading zero");
    while (pdf::IsDigit(Peek())) ++p_;
    return true;
  }

  bool Name(std::string* out) {
    if (!Lit("/")) return false;
    const std::size_t start = p_;
    while (IsAlnum(Peek())) ++p_;
    if (p_ == start) return Fail("empty name");
    if (out != nullptr) *out = std::string(b_.substr(start, p_ - start));
    return true;
  }

  bool String() {
    if (!Lit("(")) return false;
    while (true) {
      const char c = Peek();
      if (p_ >= b_.size()) return Fail("unterminated string");
      if (c == ')') {
        ++p_;
        return true;
      }
      if (c == '(' || c == '\\' || static_cast<unsigned char>(c) < 0x20 ||
          static_cast<unsigned char>(c) > 0x7e) {
        return Fail("invalid string character");
      }
      ++p_;
    }
  }

  bool Array(int depth) {
    if (!Lit("[")) return false;
    if (Peek() == ']') {
      ++p_;
      return true;
    }
    while (true) {
      if (!Value(depth)) return false;
      if (Peek() == ']') {
        ++p_;
        return true;
      }
      if (!Lit(" ")) return false;
    }
  }

  // An integer, or a reference `int int R`.
  bool Number() {
    if (!Int()) return false;
    const std::size_t save = p_;
    if (Peek() == ' ' && pdf::IsDigit(Peek(1))) {
      ++p_;
      Int();
      if (error_.empty() && Peek() == ' ' && Peek(1) == 'R') {
        p_ += 2;
        return true;
      }
      error_.clear();
    }
    p_ = save;
    return true;
  }

  bool Value(int depth, std::string* name = nullptr) {
    const char c = Peek();
    if (c == '/') return Name(name);
    if (c == '(') return String();
    if (c == '[') return Array(depth);
    if (c == '<') return Dict(depth + 1);
    if (c == '-' || pdf::IsDigit(c)) return Number();
    return Fail("expected a value");
  }

  bool Dict(int depth) {
    if (depth > 3) return Fail("dictionary nested too deeply");
    if (!Lit("<<")) return false;
    std::set<std::string> seen;
    while (true) {
      if (b_.substr(p_, 3) == " >>") {
        p_ += 3;
        return true;
      }
      if (!Lit(" ")) return false;
      const std::size_t key_pos = p_;
      std::string key;
      if (!Name(&key)) return false;
      if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
        p_ = key_pos;
        return Fail("unknown key /" + key);
      }
      if (!seen.insert(key).second) {
        p_ = key_pos;
        return Fail("repeated key /" + key);
      }
      keys_.push_back(key);
      if (depth == 1) top_keys_.insert(key);
      if (!Lit(" ")) return false;
      const std::size_t value_pos = p_;
      std::string name;
      if (!Value(depth, &name)) return false;
      if (key == "Type" && depth == 1 &&
          std::find(kTypes.begin(), kTypes.end(), name) == kTypes.end()) {
        p_ = value_pos;
        return Fail("unknown /Type");
      }
    }
  }

  bool Object() {
    const std::size_t start = p_;
    if (!pdf::IsDigit(Peek()) || !Int() || p_ == start) {
      return Fail("expected an object header");
    }
    if (!Lit(" 0 obj\n")) return false;
    if (!Dict(1)) return false;
    if (!Lit("\n")) return false;
    if (b_.substr(p_, 6) == "stream") {
      if (!top_keys_.contains("Length")) return Fail("stream without /Length");
      p_ += 6;
      if (Peek() == '\r') ++p_;
      if (!Lit("\n")) return false;
      const std::size_t end = b_.find("endstream", p_);
      if (end == std::string_view::npos) return Fail("missing endstream");
      p_ = end + 9;
      if (!Lit("\n")) return false;
    }
    if (!Lit("endobj")) return false;
    if (p_ != b_.size()) return Fail("trailing bytes after endobj");
    return true;
  }

  std::string_view b_;
  std::size_t p_ = 0;
  std::string error_;
  std::size_t error_pos_ = 0;
  std::vector<std::string> keys_;
  std::set<std::string> top_keys_;
};

}  // namespace

std::vector<std::string> SynthCorpus(const MiniFormatSpec& spec, std::size_t n,
                                     std::uint64_t seed) {
  if (n < 1) throw InvalidArgumentError("corpus size must be >= 1");
  const std::vector<Template> templates = Templates(spec);
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string object =
        std::to_string(rng.UniformInt(1, spec.max_object_id)) + " 0 obj\n";
    object.append(SynthBody(templates, spec, rng)).append("\nendobj");
    out.push_back(std::move(object));
  }
  return out;
}

std::string SynthHost(const MiniFormatSpec& spec, std::size_t objects,
                      std::uint64_t seed) {
  if (objects < 1) throw InvalidArgumentError("host needs at least one object");
  const std::vector<Template> templates = Templates(spec);
  Rng rng(seed);
  std::vector<std::string> bodies;
  bodies.reserve(objects);
  for (std::size_t i = 0; i < objects; ++i) {
    bodies.push_back(SynthBody(templates, spec, rng));
  }
  return assembly::WriteClassicPdf(bodies);
}

Verdict ParseStrict(std::string_view bytes) { return Parser(bytes).Run(); }

double PassRate(std::span<const std::string> suite) {
  if (suite.empty()) throw InvalidArgumentError("pass rate of an empty suite");
  std::size_t ok = 0;
  for (const std::string& item : suite) {
    if (ParseStrict(item).ok) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(suite.size());
}

std::string_view TrailingObject(std::string_view bytes) {
  const std::size_t start = pdf::FindLastObjectHeader(bytes);
  return start == std::string_view::npos ? bytes : bytes.substr(start);
}

}  // namespace neurofuzz::oracle
