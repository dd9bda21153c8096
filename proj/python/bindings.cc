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

// Python bindings. Byte-oriented values cross the boundary as `bytes`.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "neurofuzz/assembly.h"
#include "neurofuzz/checkpoint.h"
#include "neurofuzz/corpus.h"
#include "neurofuzz/errors.h"
#include "neurofuzz/fuzz.h"
#include "neurofuzz/model.h"
#include "neurofuzz/oracle.h"
#include "neurofuzz/rng.h"
#include "neurofuzz/sampler.h"

namespace py = pybind11;

namespace neurofuzz {
namespace {

py::bytes Bytes(std::string_view s) { return py::bytes(s.data(), s.size()); }

std::vector<std::string> ToStrings(const std::vector<py::bytes>& items) {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const py::bytes& b : items) out.emplace_back(b);
  return out;
}

// A loaded checkpoint plus the predictor built from it.
struct LoadedModel {
  std::shared_ptr<const model::Checkpoint> checkpoint;
  std::shared_ptr<const model::ModelParams<float>> params;

  std::vector<int> PrefixSymbols(const std::string& prefix) const {
    const std::vector<int> symbols = checkpoint->vocabulary.Encode(prefix);
    if (symbols.size() != static_cast<std::size_t>(checkpoint->spec.window)) {
      throw InvalidArgumentError("prefix must have exactly " +
                                 std::to_string(checkpoint->spec.window) + " symbols");
    }
    return symbols;
  }
};

LoadedModel Load(const std::string& path) {
  auto ckpt = std::make_shared<const model::Checkpoint>(model::LoadCheckpoint(path));
  auto params = std::make_shared<const model::ModelParams<float>>(ckpt->params);
  return {std::move(ckpt), std::move(params)};
}

LoadedModel TrainOnObjects(const std::vector<py::bytes>& objects, const std::string& path,
                           int preset, int epochs, int window, std::uint64_t seed) {
  corpus::PreprocessResult pre =
      corpus::PreprocessFiles(ToStrings(objects), corpus::kDefaultBinaryToken);
  const corpus::PreprocessedCorpus c =
      corpus::BuildCorpus(std::move(pre.objects), corpus::kDefaultEndToken, {}, seed);
  const model::ModelSpec spec = model::Preset(preset, c.vocabulary.size(), window);
  const corpus::WindowedDataset train(c.vocabulary.Encode(c.train), window,
                                      model::PresetJump(preset));
  model::TrainOptions options;
  options.epochs = epochs;
  options.seed = seed;
  std::vector<model::Checkpoint> history = model::Train(train, nullptr, spec, c.vocabulary, options);
  model::SaveCheckpoint(history.back(), path);
  return Load(path);
}

py::bytes GenerateText(const LoadedModel& m, const std::string& prefix, double diversity,
                       std::uint64_t seed, int cap) {
  sampler::ModelPredictor predictor(m.params);
  const std::vector<int> et = m.checkpoint->vocabulary.Encode(corpus::kDefaultEndToken);
  const std::vector<int> out =
      sampler::Generate(predictor, m.PrefixSymbols(prefix), {diversity, seed, cap}, et);
  return Bytes(m.checkpoint->vocabulary.Decode(out));
}

py::dict Fuzz(const LoadedModel& m, const std::string& algorithm, const std::string& prefix,
              double fuzz_rate, double diversity, int min_len, int max_len, std::uint64_t seed) {
  fuzz::Algorithm alg;
  if (algorithm == "data") {
    alg = fuzz::Algorithm::kData;
  } else if (algorithm == "metadata" || algorithm == "meta") {
    alg = fuzz::Algorithm::kMetadata;
  } else {
    throw InvalidArgumentError("algorithm must be data or metadata");
  }
  fuzz::FuzzSettings s;
  s.fuzz_rate = fuzz_rate;
  s.diversity = diversity;
  s.min_len = min_len;
  s.max_len = max_len;
  s.seed = seed;
  sampler::ModelPredictor predictor(m.params);
  const fuzz::TestDatum td = fuzz::NeuralFuzz(alg, predictor, m.PrefixSymbols(prefix), s,
                                              m.checkpoint->vocabulary, nullptr);
  py::list trace;
  for (const fuzz::FuzzEvent& e : td.fuzz_trace) {
    trace.append(py::make_tuple(e.position, e.original, e.replacement));
  }
  py::dict out;
  out["bytes"] = Bytes(td.bytes);
  out["max_len"] = td.provenance.max_len;
  out["fuzz_trace"] = trace;
  return out;
}

}  // namespace
}  // namespace neurofuzz

PYBIND11_MODULE(_neurofuzz, m) {
  using namespace neurofuzz;
  m.doc() = "Neural file-format fuzzing toolkit.";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def("derive_seed", py::overload_cast<std::uint64_t, std::string_view>(&DeriveSeed),
        py::arg("parent"), py::arg("stream"));
  m.def("perplexity",
        [](const std::vector<double>& probs) { return model::Perplexity(probs); },
        py::arg("label_probs"), "Perplexity of the probabilities given to the true labels.");
  m.def("parameter_count",
        [](int preset, int vocab_size) {
          return model::ParameterCount(model::Preset(preset, vocab_size));
        },
        py::arg("preset"), py::arg("vocab_size"));

  py::class_<corpus::Vocabulary>(m, "Vocabulary")
      .def_static("from_text",
                  [](const py::bytes& text) { return corpus::Vocabulary::FromText(std::string(text)); })
      .def_property_readonly("size", &corpus::Vocabulary::size)
      .def("encode", [](const corpus::Vocabulary& v, const py::bytes& text) {
        return v.Encode(std::string(text));
      })
      .def("decode", [](const corpus::Vocabulary& v, const std::vector<int>& symbols) {
        return Bytes(v.Decode(symbols));
      });

  m.def("synth_corpus",
        [](std::size_t n, std::uint64_t seed) {
          std::vector<py::bytes> out;
          for (const std::string& s : oracle::SynthCorpus({}, n, seed)) out.push_back(Bytes(s));
          return out;
        },
        py::arg("n"), py::arg("seed") = 0);
  m.def("synth_host",
        [](std::size_t objects, std::uint64_t seed) {
          return Bytes(oracle::SynthHost({}, objects, seed));
        },
        py::arg("objects"), py::arg("seed") = 0);
  m.def("parse_strict",
        [](const py::bytes& data) {
          const oracle::Verdict v = oracle::ParseStrict(std::string(data));
          py::dict out;
          out["ok"] = v.ok;
          out["position"] = v.position;
          out["reason"] = v.reason;
          out["keys"] = v.keys;
          return out;
        },
        py::arg("data"));
  m.def("pass_rate",
        [](const std::vector<py::bytes>& suite) { return oracle::PassRate(ToStrings(suite)); },
        py::arg("suite"));
  m.def("trailing_object",
        [](const py::bytes& data) {
          const std::string s(data);
          return Bytes(oracle::TrailingObject(s));
        },
        py::arg("data"));

  m.def("parse_host",
        [](const py::bytes& data) {
          const assembly::HostDocument host = assembly::ParseHost(std::string(data));
          std::map<std::uint64_t, std::uint64_t> offsets;
          for (const auto& [id, loc] : host.objects) offsets[id] = loc.offset;
          return offsets;
        },
        py::arg("data"), "Object id to byte offset, newest definition first.");
  m.def("incremental_update",
        [](const py::bytes& host_bytes, const std::map<std::uint64_t, py::bytes>& objects) {
          const assembly::HostDocument host = assembly::ParseHost(std::string(host_bytes));
          std::vector<assembly::Replacement> replacements;
          for (const auto& [id, text] : objects) {
            replacements.push_back({id, assembly::MakeObjectBody(std::string(text), id)});
          }
          return Bytes(assembly::IncrementalUpdate(host, replacements));
        },
        py::arg("host"), py::arg("objects"));

  py::class_<LoadedModel>(m, "Model")
      .def_static("load", &Load, py::arg("path"))
      .def_static("train", &TrainOnObjects, py::arg("objects"), py::arg("path"),
                  py::arg("preset") = 2, py::arg("epochs") = 1, py::arg("window") = 50,
                  py::arg("seed") = 0, "Trains on raw objects and saves the final checkpoint.")
      .def_property_readonly("window", [](const LoadedModel& lm) { return lm.checkpoint->spec.window; })
      .def_property_readonly("vocabulary", [](const LoadedModel& lm) { return lm.checkpoint->vocabulary; })
      .def_property_readonly("epoch", [](const LoadedModel& lm) { return lm.checkpoint->epoch; })
      .def("generate", &GenerateText, py::arg("prefix"), py::arg("diversity") = 1.0,
           py::arg("seed") = 0, py::arg("cap") = 600)
      .def("fuzz", &Fuzz, py::arg("algorithm"), py::arg("prefix"), py::arg("fuzz_rate") = 0.1,
           py::arg("diversity") = 1.0, py::arg("min_len") = 450, py::arg("max_len") = 550,
           py::arg("seed") = 0);
}
