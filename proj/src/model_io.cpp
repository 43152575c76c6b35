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

#include "magprint/model_io.hpp"

#include <cstdio>
#include <sstream>

#include "magprint/text_io.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "cli";

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(Errc::CorruptModel, std::string(kModule), what);
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class LineReader {
 public:
  explicit LineReader(std::vector<std::string_view> lines) : lines_(std::move(lines)) {}

  // Returns the remainder of the next line after `key `.
  std::string_view expect(std::string_view key) {
    if (pos_ >= lines_.size()) corrupt("unexpected end of model, wanted '" + std::string(key) + "'");
    std::string_view line = lines_[pos_];
    const std::size_t line_no = ++pos_;
    if (line.substr(0, key.size()) != key || (line.size() > key.size() && line[key.size()] != ' ')) {
      corrupt("line " + std::to_string(line_no) + ": expected '" + std::string(key) + "'");
    }
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string_view{};
  }

  std::vector<double> doubles(std::string_view key, std::size_t count) {
    const auto rest = expect(key);
    std::istringstream in{std::string(rest)};
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
      double v = 0.0;
      if (!try_parse_double(tok, v)) corrupt("bad number '" + tok + "' in '" + std::string(key) + "'");
      out.push_back(v);
    }
    if (out.size() != count) corrupt("'" + std::string(key) + "' has " + std::to_string(out.size()) + " values");
    return out;
  }

  double number(std::string_view key) { return doubles(key, 1).front(); }

  long long integer(std::string_view key) {
    long long v = 0;
    if (!try_parse_int(expect(key), v) || v < 0) corrupt("bad integer in '" + std::string(key) + "'");
    return v;
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

OaoPrediction Classifier::predict(std::span<const double> features) const {
  if (features.size() != static_cast<std::size_t>(kFeatureCount)) {
    throw Error(Errc::DimensionMismatch, std::string(kModule),
                "classifier expects 18 features, got " + std::to_string(features.size()));
  }
  std::vector<double> x;
  x.reserve(mask.size());
  for (auto c : mask.columns()) x.push_back(features[c]);
  stats.apply_in_place(x);
  return predict_oao(oao, x);
}

Classifier train_classifier(const FeatureMatrix& matrix, const FeatureMask& mask, const SvmHyperParams& hyper,
                            const SmoOptions& smo, Warnings* warnings) {
  if (mask.empty()) throw Error(Errc::InvalidSpec, std::string(kModule), "feature mask is empty");
  Classifier out;
  out.mask = mask;
  const Matrix x = matrix.project(mask);
  out.stats = Standardization::fit(x);
  out.oao = train_oao(out.stats.apply(x), matrix.labels(), hyper, smo, warnings);
  return out;
}

std::string format_model(const Classifier& model) {
  std::string body;
  auto line = [&](const std::string& s) {
    body += s;
    body += '\n';
  };
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (double d : v) s += " " + g17(d);
    return s;
  };
  line(std::string(kModelHeader));
  std::string mask = "mask";
  for (int i : model.mask.indices()) mask += " " + std::to_string(i);
  line(mask);
  line("mean" + join(model.stats.mean));
  line("stddev" + join(model.stats.stddev));
  line("classes " + std::to_string(model.oao.class_labels.size()));
  for (const auto& c : model.oao.class_labels) line("class " + c);
  line("machines " + std::to_string(model.oao.machines.size()));
  for (const auto& m : model.oao.machines) {
    line("positive " + m.positive_label);
    line("negative " + m.negative_label);
    line("gamma " + g17(m.hyper.gamma));
    line("box_constraint " + g17(m.hyper.box_constraint));
    line("bias " + g17(m.bias));
    line("support_vectors " + std::to_string(m.dual_coeffs.size()));
    for (std::size_t i = 0; i < m.dual_coeffs.size(); ++i) {
      const auto row = m.support_vectors.row(i);
      line("sv " + g17(m.dual_coeffs[i]) + join(std::vector<double>(row.begin(), row.end())));
    }
  }
  return body + "checksum " + hex64(fnv1a64(body)) + "\n";
}

Classifier parse_model(std::string_view text) {
  if (trim(text).empty()) corrupt("model file is empty");
  const auto first_end = text.find('\n');
  const std::string_view header = trim(text.substr(0, first_end));
  if (header != kModelHeader) {
    if (header.substr(0, 16) == "magprint-model v") {
      throw Error(Errc::FormatVersionMismatch, std::string(kModule),
                  "model format '" + std::string(header) + "' is not '" + std::string(kModelHeader) + "'");
    }
    corrupt("missing model header");
  }
  const auto cs = text.rfind("\nchecksum ");
  if (cs == std::string_view::npos) corrupt("missing checksum line");
  const std::string_view body = text.substr(0, cs + 1);
  const std::string_view stated = trim(text.substr(cs + 10));
  if (stated != hex64(fnv1a64(body))) corrupt("checksum mismatch");

  auto lines = split_lines(body);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  LineReader in(std::move(lines));
  in.expect(kModelHeader);

  Classifier model;
  std::vector<int> mask;
  {
    std::istringstream ms{std::string(in.expect("mask"))};
    int v = 0;
    while (ms >> v) mask.push_back(v);
  }
  try {
    model.mask = FeatureMask(mask);
  } catch (const Error& e) {
    corrupt(e.message());
  }
  const std::size_t d = model.mask.size();
  model.stats.mean = in.doubles("mean", d);
  model.stats.stddev = in.doubles("stddev", d);
  model.stats.constant.assign(d, false);

  const auto n_classes = static_cast<std::size_t>(in.integer("classes"));
  for (std::size_t i = 0; i < n_classes; ++i) model.oao.class_labels.emplace_back(in.expect("class"));
  const auto n_machines = static_cast<std::size_t>(in.integer("machines"));
  if (n_machines != n_classes * (n_classes - 1) / 2) corrupt("machine count does not match class count");
  for (std::size_t m = 0; m < n_machines; ++m) {
    SvmModel svm;
    svm.positive_label = std::string(in.expect("positive"));
    svm.negative_label = std::string(in.expect("negative"));
    svm.hyper.gamma = in.number("gamma");
    svm.hyper.box_constraint = in.number("box_constraint");
    svm.bias = in.number("bias");
    const auto n_sv = static_cast<std::size_t>(in.integer("support_vectors"));
    svm.support_vectors = Matrix(0, d);
    for (std::size_t i = 0; i < n_sv; ++i) {
      const auto v = in.doubles("sv", d + 1);
      svm.dual_coeffs.push_back(v[0]);
      svm.support_vectors.append_row(std::span<const double>(v).subspan(1));
    }
    model.oao.machines.push_back(std::move(svm));
  }
  return model;
}

void save_model(const Classifier& model, const std::filesystem::path& path) {
  write_text_file(path, format_model(model), kModule);
}

Classifier load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path, kModule)); }

}  // namespace magprint
