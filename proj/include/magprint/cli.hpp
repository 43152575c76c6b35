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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "magprint/features.hpp"
#include "magprint/ingest.hpp"
#include "magprint/preprocess.hpp"
#include "magprint/svm.hpp"

namespace magprint {

/// Settings shared by all subcommands. Precedence: built-in defaults, then
/// the `--config` file, then command-line flags.
struct PipelineConfig {
  std::string waveform = "B";  // preset id (A, B, C) or waveform spec path
  std::string park;            // "default9" or park spec path (simulation mode)
  std::string manifest;        // session manifest path (ingest mode)
  Channel channel = Channel::Magnitude;
  VtConfig vt;
  std::optional<std::size_t> segment_length;
  FeatureOptions features;
  SvmHyperParams hyper;
  SmoOptions smo;
  std::size_t knn_k = 1;
  int gamma_exp_lo = -8;
  int gamma_exp_hi = 8;
  int c_exp_lo = -8;
  int c_exp_hi = 28;
  int folds = 10;
  std::uint64_t seed = 42;
  std::vector<double> snr_db{30.0, 20.0, 10.0, 0.0};
  int repetitions = 50;
  std::filesystem::path out_dir = ".";
};

/// Keys: waveform, park, manifest, channel, vt.window_len, vt.baseline_len,
/// vt.threshold_factor, segment_length, features.classical_moments,
/// features.log_floor, learn.gamma, learn.box_constraint, learn.tol,
/// learn.max_passes, learn.knn_k, learn.gamma_exponents (lo:hi),
/// learn.c_exponents (lo:hi), eval.folds, eval.snr_db (comma list),
/// eval.repetitions, seed, out.
PipelineConfig parse_pipeline_config(std::string_view text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Exactly one of park / manifest when `need_source`; referenced files exist.
void validate_pipeline_config(const PipelineConfig& cfg, bool need_source = false);

/// Group of a device for inter/intra pairing: the id up to its last '-'.
std::string default_device_group(std::string_view device_id);

/// Runs one subcommand (args exclude the program name). Returns 0 on
/// success, 2 on usage errors and 1 on domain errors; errors are reported on
/// `err` as a single `error: module=... code=... message=...` line.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace magprint
