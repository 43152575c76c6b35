// Copyright 2026 The magprint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "magprint/cli.hpp"
#include "magprint/eval.hpp"
#include "magprint/features.hpp"
#include "magprint/model_io.hpp"
#include "magprint/pipeline.hpp"
#include "magprint/stimulus.hpp"

namespace py = pybind11;
using namespace magprint;

namespace {

FeatureMask mask_from(const std::optional<std::vector<int>>& indices) {
  return indices ? FeatureMask(*indices) : FeatureMask::all();
}

FeatureMatrix simulate(const std::string& waveform, std::uint64_t seed, int bursts, const std::string& session_id) {
  auto spec = waveform_preset(waveform);
  if (bursts > 0) spec.burst_repetitions = bursts;
  SessionOptions session;
  session.session_id = session_id.empty() ? waveform + "-day1" : session_id;
  return simulate_dataset(default_park_spec(seed), spec, session, seed).features;
}

}  // namespace

PYBIND11_MODULE(_magprint, m) {
  m.doc() = "Magnetometer fingerprinting core";

  static py::exception<Error> error(m, "MagprintError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error)(e.message());
      inst.attr("code") = std::string(errc_name(e.code()));
      inst.attr("module") = std::string(e.module());
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  py::class_<WaveformSpec>(m, "WaveformSpec")
      .def(py::init<>())
      .def_readwrite("id", &WaveformSpec::id)
      .def_readwrite("pulse_count_per_burst", &WaveformSpec::pulse_count_per_burst)
      .def_readwrite("pulse_width_ms", &WaveformSpec::pulse_width_ms)
      .def_readwrite("inter_pulse_gap_ms", &WaveformSpec::inter_pulse_gap_ms)
      .def_readwrite("burst_gap_ms", &WaveformSpec::burst_gap_ms)
      .def_readwrite("burst_repetitions", &WaveformSpec::burst_repetitions)
      .def_readwrite("amplitude", &WaveformSpec::amplitude)
      .def_property_readonly("total_duration_ms", &WaveformSpec::total_duration_ms);

  m.def("waveform_preset", [](const std::string& id) { return waveform_preset(id); }, py::arg("id"));
  m.def("build_waveform", &build_waveform, py::arg("spec"), py::arg("sample_rate_hz"));
  m.def("validate_waveform", &validate_waveform, py::arg("spec"), py::arg("strict") = false);

  m.def(
      "extract_features", [](const std::vector<double>& s) { return extract_features(s); }, py::arg("segment"),
      "18 features of one RMS-normalized segment.");
  m.def("dft", [](const std::vector<double>& s) { return dft(s); }, py::arg("signal"));

  py::class_<RocPoint>(m, "RocPoint")
      .def_readonly("threshold", &RocPoint::threshold)
      .def_readonly("fpr", &RocPoint::fpr)
      .def_readonly("fnr", &RocPoint::fnr);
  m.def(
      "roc_curve",
      [](const std::vector<double>& genuine, const std::vector<double>& impostor) {
        return roc_curve(genuine, impostor).points;
      },
      py::arg("genuine"), py::arg("impostor"));
  m.def(
      "eer",
      [](const std::vector<double>& genuine, const std::vector<double>& impostor) {
        return eer(roc_curve(genuine, impostor));
      },
      py::arg("genuine"), py::arg("impostor"));

  py::class_<FeatureVector>(m, "FeatureVector")
      .def_readonly("device_id", &FeatureVector::device_id)
      .def_readonly("session_id", &FeatureVector::session_id)
      .def_readonly("segment_index", &FeatureVector::segment_index)
      .def_property_readonly("values", [](const FeatureVector& v) { return v.values; });

  py::class_<FeatureMatrix>(m, "FeatureMatrix")
      .def_readonly("rows", &FeatureMatrix::rows)
      .def("__len__", &FeatureMatrix::size)
      .def("labels", &FeatureMatrix::labels)
      .def("class_labels", &FeatureMatrix::class_labels)
      .def("to_csv", [](const FeatureMatrix& fm) { return format_feature_matrix(fm); })
      .def_static("from_csv", [](const std::string& csv) { return parse_feature_matrix(csv); });

  m.def("simulate", &simulate, py::arg("waveform") = "A", py::arg("seed") = 42, py::arg("bursts") = 0,
        py::arg("session_id") = "", "Features of the default nine-device park for one session.");

  py::class_<OaoPrediction>(m, "Prediction")
      .def_readonly("label", &OaoPrediction::label)
      .def_readonly("votes", &OaoPrediction::votes);

  py::class_<Classifier>(m, "Classifier")
      .def("predict", [](const Classifier& c, const std::vector<double>& x) { return c.predict(x); })
      .def_property_readonly("mask", [](const Classifier& c) { return c.mask.indices(); })
      .def_property_readonly("labels", [](const Classifier& c) { return c.oao.class_labels; })
      .def("to_text", [](const Classifier& c) { return format_model(c); })
      .def_static("from_text", [](const std::string& text) { return parse_model(text); });

  m.def(
      "train_classifier",
      [](const FeatureMatrix& fm, std::optional<std::vector<int>> mask, double gamma, double c) {
        return train_classifier(fm, mask_from(mask), SvmHyperParams{gamma, c});
      },
      py::arg("matrix"), py::arg("mask") = py::none(), py::arg("gamma") = SvmHyperParams{}.gamma,
      py::arg("c") = SvmHyperParams{}.box_constraint);

  m.def(
      "run_command",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_command(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one CLI invocation; returns (exit_code, stdout, stderr).");
}
