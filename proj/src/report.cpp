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

#include "magprint/report.hpp"

#include <cmath>
#include <cstdio>

#include "magprint/text_io.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "eval";

std::vector<std::vector<std::string_view>> csv_rows(std::string_view csv, std::size_t columns,
                                                    std::string_view header_first) {
  auto lines = split_lines(csv);
  std::vector<std::vector<std::string_view>> out;
  bool header = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto f = split_csv(lines[i]);
    if (header) {
      header = false;
      if (f.empty() || f[0] != header_first) {
        throw Error(Errc::ParseError, std::string(kModule),
                    "line " + std::to_string(i + 1) + ": expected header starting with '" + std::string(header_first) + "'");
      }
      continue;
    }
    if (f.size() != columns) {
      throw Error(Errc::ParseError, std::string(kModule),
                  "line " + std::to_string(i + 1) + ": expected " + std::to_string(columns) + " columns, got " +
                      std::to_string(f.size()));
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_confusion_csv(const ConfusionCounts& counts) {
  std::string out = "actual\\predicted";
  for (const auto& l : counts.class_labels) out += "," + l;
  out += '\n';
  for (std::size_t i = 0; i < counts.class_labels.size(); ++i) {
    out += counts.class_labels[i];
    for (auto v : counts.matrix[i]) out += "," + std::to_string(v);
    out += '\n';
  }
  return out;
}

ConfusionCounts parse_confusion_csv(std::string_view csv, Warnings* warnings) {
  auto lines = split_lines(csv);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw Error(Errc::EmptyCounts, std::string(kModule), "confusion CSV is empty");
  const auto header = split_csv(lines[first]);
  if (header.size() < 2) throw Error(Errc::ParseError, std::string(kModule), "confusion header needs labels");
  std::vector<std::string> labels;
  for (std::size_t i = 1; i < header.size(); ++i) labels.emplace_back(header[i]);
  ConfusionCounts counts = ConfusionCounts::zeros(labels);
  std::size_t row = 0;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::string where = "line " + std::to_string(li + 1);
    const auto f = split_csv(lines[li]);
    if (f.size() != header.size()) {
      throw Error(Errc::ParseError, std::string(kModule), where + ": expected " + std::to_string(header.size()) + " columns");
    }
    if (row >= labels.size()) throw Error(Errc::ParseError, std::string(kModule), where + ": more rows than labels");
    if (f[0] != labels[row]) {
      throw Error(Errc::ParseError, std::string(kModule),
                  where + ": row label '" + std::string(f[0]) + "' does not match column '" + labels[row] + "'");
    }
    for (std::size_t c = 1; c < f.size(); ++c) {
      if (f[c].empty()) {
        warn(warnings, where + ": blank cell for (" + labels[row] + ", " + labels[c - 1] + ") read as 0");
        continue;
      }
      const long long v = parse_int_field(f[c], kModule, where);
      if (v < 0) throw Error(Errc::ParseError, std::string(kModule), where + ": negative count");
      counts.matrix[row][c - 1] = v;
    }
    ++row;
  }
  if (row != labels.size()) {
    throw Error(Errc::ParseError, std::string(kModule),
                "confusion CSV has " + std::to_string(row) + " rows for " + std::to_string(labels.size()) + " labels");
  }
  return counts;
}

std::string format_roc_csv(const RocCurve& curve) {
  std::string out = "threshold,fpr,fnr\n";
  for (const auto& p : curve.points) {
    out += format_exact(p.threshold) + "," + format_exact(p.fpr) + "," + format_exact(p.fnr) + "\n";
  }
  return out;
}

RocCurve parse_roc_csv(std::string_view csv) {
  RocCurve curve;
  for (const auto& f : csv_rows(csv, 3, "threshold")) {
    curve.points.push_back({parse_double_field(f[0], kModule, "threshold"), parse_double_field(f[1], kModule, "fpr"),
                            parse_double_field(f[2], kModule, "fnr")});
  }
  return curve;
}

std::string format_eer_csv(const std::vector<PairEer>& rows) {
  std::string out = "group,device_a,device_b,eer\n";
  for (const auto& r : rows) out += r.group + "," + r.device_a + "," + r.device_b + "," + format_exact(r.eer) + "\n";
  return out;
}

std::vector<PairEer> parse_eer_csv(std::string_view csv) {
  std::vector<PairEer> out;
  for (const auto& f : csv_rows(csv, 4, "group")) {
    out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2]), parse_double_field(f[3], kModule, "eer")});
  }
  return out;
}

std::string format_group_means_csv(const std::map<std::string, double>& means) {
  std::string out = "group,mean_eer\n";
  for (const auto& [g, v] : means) out += g + "," + format_exact(v) + "\n";
  return out;
}

std::map<std::string, double> parse_group_means_csv(std::string_view csv) {
  std::map<std::string, double> out;
  for (const auto& f : csv_rows(csv, 2, "group")) out[std::string(f[0])] = parse_double_field(f[1], kModule, "mean_eer");
  return out;
}

std::string format_noise_csv(const std::vector<NoisePoint>& points) {
  std::string out = "snr_db,mean_eer,std_error,repetitions\n";
  for (const auto& p : points) {
    out += format_exact(p.snr_db) + "," + format_exact(p.mean_eer) + "," + format_exact(p.std_error) + "," +
           std::to_string(p.eers.size()) + "\n";
  }
  return out;
}

std::string format_waveform_csv(const std::vector<WaveformSummary>& rows) {
  std::string out = "waveform,inter_eer,intra_eer\n";
  for (const auto& r : rows) out += r.waveform_id + "," + format_exact(r.inter_eer) + "," + format_exact(r.intra_eer) + "\n";
  return out;
}

std::vector<WaveformSummary> parse_waveform_csv(std::string_view csv) {
  std::vector<WaveformSummary> out;
  for (const auto& f : csv_rows(csv, 3, "waveform")) {
    WaveformSummary s;
    s.waveform_id = std::string(f[0]);
    s.inter_eer = parse_double_field(f[1], kModule, "inter_eer");
    s.intra_eer = parse_double_field(f[2], kModule, "intra_eer");
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_grid_csv(const GridSearchResult& result) {
  std::string out = "gamma,box_constraint,accuracy\n";
  for (const auto& c : result.surface) {
    out += format_exact(c.gamma) + "," + format_exact(c.box_constraint) + "," + format_exact(c.accuracy) + "\n";
  }
  return out;
}

std::string format_fold_optima_csv(const GridSearchResult& result) {
  std::string out = "fold,gamma,box_constraint,accuracy\n";
  for (const auto& f : result.fold_optima) {
    out += std::to_string(f.fold) + "," + format_exact(f.hyper.gamma) + "," + format_exact(f.hyper.box_constraint) +
           "," + format_exact(f.accuracy) + "\n";
  }
  return out;
}

std::string format_selection_csv(const SelectionResult& result) {
  std::string out = "step,subset,metric\n";
  for (std::size_t i = 0; i < result.search_log.size(); ++i) {
    out += std::to_string(i) + "," + result.search_log[i].subset.to_string() + "," +
           format_exact(result.search_log[i].metric) + "\n";
  }
  return out;
}

std::string render_roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves, std::string_view title) {
  constexpr double kSize = 400.0, kMargin = 50.0;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  const double w = kSize + 2 * kMargin;
  auto px = [&](double fpr) { return svg_num(kMargin + fpr * kSize); };
  auto py = [&](double fnr) { return svg_num(kMargin + (1.0 - fnr) * kSize); };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(w) + "\" height=\"" + svg_num(w + 20) +
                    "\" viewBox=\"0 0 " + svg_num(w) + " " + svg_num(w + 20) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + svg_num(w / 2) + "\" y=\"25\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(title) +
         "</text>\n";
  out += "<rect x=\"" + svg_num(kMargin) + "\" y=\"" + svg_num(kMargin) + "\" width=\"" + svg_num(kSize) +
         "\" height=\"" + svg_num(kSize) + "\" fill=\"none\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + px(0) + "\" y1=\"" + py(0) + "\" x2=\"" + px(1) + "\" y2=\"" + py(1) +
         "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    out += "<text x=\"" + px(v) + "\" y=\"" + svg_num(kMargin + kSize + 15) + "\" text-anchor=\"middle\" font-size=\"10\">" +
           format_fixed(v, 2) + "</text>\n";
    out += "<text x=\"" + svg_num(kMargin - 5) + "\" y=\"" + py(v) + "\" text-anchor=\"end\" font-size=\"10\">" +
           format_fixed(v, 2) + "</text>\n";
  }
  out += "<text x=\"" + svg_num(w / 2) + "\" y=\"" + svg_num(kMargin + kSize + 32) +
         "\" text-anchor=\"middle\" font-size=\"12\">false positive rate</text>\n";
  out += "<text x=\"15\" y=\"" + svg_num(w / 2) + "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 " +
         svg_num(w / 2) + ")\">false negative rate</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    std::string pts;
    for (const auto& p : curves[i].second.points) pts += px(p.fpr) + "," + py(p.fnr) + " ";
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = kMargin + 15 + 15 * static_cast<double>(i);
    out += "<text x=\"" + svg_num(kMargin + kSize - 10) + "\" y=\"" + svg_num(ly) +
           "\" text-anchor=\"end\" font-size=\"11\" fill=\"" + color + "\">" + xml_escape(curves[i].first) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace magprint
