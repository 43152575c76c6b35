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

#include "magprint/cli.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "magprint/eval.hpp"
#include "magprint/experiments.hpp"
#include "magprint/model_io.hpp"
#include "magprint/pipeline.hpp"
#include "magprint/report.hpp"
#include "magprint/selection.hpp"
#include "magprint/simulator.hpp"
#include "magprint/stimulus.hpp"
#include "magprint/text_io.hpp"

namespace magprint {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kModule = "cli";

[[noreturn]] void usage(const std::string& msg) { throw Error(Errc::UsageError, std::string(kModule), msg); }

std::pair<int, int> parse_exponent_range(std::string_view text, std::string_view where) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(Errc::ParseError, std::string(kModule), std::string(where) + ": expected lo:hi, got '" + std::string(text) + "'");
  }
  const auto lo = parse_int_field(text.substr(0, colon), kModule, where);
  const auto hi = parse_int_field(text.substr(colon + 1), kModule, where);
  if (lo > hi) throw Error(Errc::InvalidSpec, std::string(kModule), std::string(where) + ": lo exceeds hi");
  return {static_cast<int>(lo), static_cast<int>(hi)};
}

std::vector<double> parse_double_list(std::string_view text, std::string_view where) {
  std::vector<double> out;
  for (auto f : split_csv(text)) {
    if (!f.empty()) out.push_back(parse_double_field(f, kModule, where));
  }
  return out;
}

std::vector<std::string> parse_string_list(std::string_view text) {
  std::vector<std::string> out;
  for (auto f : split_csv(text)) {
    if (!f.empty()) out.emplace_back(f);
  }
  return out;
}

bool parse_bool(std::string_view v, std::string_view where) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(Errc::ParseError, std::string(kModule), std::string(where) + ": expected a boolean, got '" + std::string(v) + "'");
}

bool is_preset(std::string_view id) { return id == "A" || id == "B" || id == "C"; }

WaveformSpec resolve_waveform(const std::string& w) {
  if (is_preset(w)) return waveform_preset(w);
  return load_waveform_spec(w);
}

ParkSpec resolve_park(const std::string& p, std::uint64_t seed) {
  if (p.empty() || p == "default9") return default_park_spec(seed);
  return load_park_spec(p);
}

std::string sanitize(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return out;
}

// Replaces the first "segments" in the file name with `to`, or names the
// output `<to>.csv`.
std::string derived_name(const fs::path& input, std::string_view from, std::string_view to) {
  std::string name = input.filename().string();
  const auto pos = name.find(from);
  if (pos == std::string::npos) return std::string(to) + ".csv";
  name.replace(pos, from.size(), to);
  return name;
}

// "features_A.csv" -> "A"
std::string label_from_path(const fs::path& p) {
  std::string stem = p.stem().string();
  const auto pos = stem.find('_');
  return pos == std::string::npos ? stem : stem.substr(pos + 1);
}

std::map<std::string, std::string> load_groups(const std::string& path, const std::vector<std::string>& devices) {
  std::map<std::string, std::string> groups;
  if (!path.empty()) {
    const auto text = read_text_file(path, kModule);
    const auto lines = split_lines(text);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      const auto f = split_csv(lines[i]);
      if (f.size() != 2) {
        throw Error(Errc::ParseError, std::string(kModule), path + ": line " + std::to_string(i + 1) + ": expected device_id,group");
      }
      groups[std::string(f[0])] = std::string(f[1]);
    }
  }
  for (const auto& d : devices) {
    if (!groups.count(d)) groups[d] = default_device_group(d);
  }
  return groups;
}

std::vector<DevicePair> parse_pairs(const std::string& text) {
  std::vector<DevicePair> out;
  for (const auto& item : parse_string_list(text)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
      usage("pair '" + item + "' is not of the form device_a:device_b");
    }
    out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
  }
  return out;
}

class Session {
 public:
  Session(PipelineConfig cfg, std::ostream& out, std::ostream& err, bool verbose)
      : cfg_(std::move(cfg)), out_(out), err_(err), verbose_(verbose) {}

  PipelineConfig& cfg() { return cfg_; }
  std::ostream& out() { return out_; }

  void warn_all(const Warnings& w) {
    for (const auto& m : w) err_ << "warning: " << m << '\n';
  }
  void info(const std::string& m) {
    if (verbose_) err_ << m << '\n';
  }
  void write(const std::string& name, std::string_view contents) {
    const fs::path p = cfg_.out_dir / name;
    write_text_file(p, contents, kModule);
    info("wrote " + p.generic_string());
  }
  VerifyOptions verify_options(const FeatureMask& mask) const {
    VerifyOptions v;
    v.folds = cfg_.folds;
    v.seed = cfg_.seed;
    v.hyper = cfg_.hyper;
    v.smo = cfg_.smo;
    v.mask = mask;
    return v;
  }
  PipelineOptions pipeline_options() const {
    PipelineOptions p;
    p.channel = cfg_.channel;
    p.vt = cfg_.vt;
    p.segment.segment_length = cfg_.segment_length;
    p.features = cfg_.features;
    return p;
  }

 private:
  PipelineConfig cfg_;
  std::ostream& out_;
  std::ostream& err_;
  bool verbose_;
};

FeatureMatrix load_features(const std::string& path) { return parse_feature_matrix(read_text_file(path, kModule)); }

FeatureMask mask_or_all(const std::string& text) { return text.empty() ? FeatureMask::all() : FeatureMask::parse(text); }

// --- subcommands ---------------------------------------------------------

struct SimulateArgs {
  std::string waveforms;
  int days = 1;
};

void cmd_simulate(Session& s, const SimulateArgs& a) {
  auto& cfg = s.cfg();
  if (!cfg.manifest.empty()) usage("simulate runs in park mode; drop the manifest setting");
  if (a.days < 1) usage("--days must be >= 1");
  const ParkSpec park_spec = resolve_park(cfg.park, cfg.seed);
  const auto park = make_park(park_spec);
  const auto waveform_ids = parse_string_list(a.waveforms.empty() ? cfg.waveform : a.waveforms);
  if (waveform_ids.empty()) usage("no waveform given");

  std::vector<SessionManifest> manifest;
  for (std::size_t wi = 0; wi < waveform_ids.size(); ++wi) {
    const WaveformSpec spec = resolve_waveform(waveform_ids[wi]);
    s.warn_all(validate_waveform(spec));
    for (int d = 1; d <= a.days; ++d) {
      const std::string day = "day" + std::to_string(d);
      SessionOptions opts;
      opts.session_id = sanitize(spec.id) + "-" + day;
      const auto traces = simulate_park(park, spec, opts, mix_seed(cfg.seed, wi * 1000 + static_cast<std::size_t>(d)));
      for (const auto& t : traces) {
        const std::string rel = "traces/" + sanitize(t.device_id) + "_" + sanitize(t.session_id) + ".csv";
        s.write(rel, format_trace(t));
        manifest.push_back({t.session_id, t.device_id, day, spec.id, cfg.out_dir / rel});
      }
    }
  }
  s.write("manifest.csv", format_manifest(manifest, cfg.out_dir));
  std::string groups = "device_id,group\n";
  for (const auto& d : park) groups += d.device_id + "," + d.model_id + "\n";
  s.write("devices.csv", groups);
  s.write("park.txt", format_park_spec(park_spec));
  s.out() << "simulated " << park.size() << " devices, " << manifest.size() << " sessions -> "
          << (cfg.out_dir / "manifest.csv").generic_string() << '\n';
}

void cmd_segment(Session& s) {
  auto& cfg = s.cfg();
  if (cfg.manifest.empty()) usage("segment needs --manifest");
  validate_pipeline_config(cfg, true);
  Warnings w;
  const auto entries = load_manifest(cfg.manifest, &w);
  s.warn_all(w);
  if (entries.empty()) usage("manifest lists no sessions");

  std::map<std::string, std::vector<const SessionManifest*>> by_waveform;
  for (const auto& e : entries) by_waveform[e.waveform_id].push_back(&e);

  for (const auto& [wid, group] : by_waveform) {
    WaveformSpec spec;
    if (is_preset(wid)) {
      spec = waveform_preset(wid);
    } else {
      if (is_preset(cfg.waveform)) {
        throw Error(Errc::InvalidSpec, std::string(kModule),
                    "waveform id '" + wid + "' is not a preset; pass its spec with --waveform");
      }
      spec = load_waveform_spec(cfg.waveform);
      if (spec.id != wid) {
        throw Error(Errc::InvalidSpec, std::string(kModule),
                    "manifest waveform '" + wid + "' does not match spec id '" + spec.id + "'");
      }
    }
    std::vector<Trace> traces;
    for (const auto* e : group) {
      Warnings tw;
      traces.push_back(load_trace(e->trace_path, e->device_id, e->session_id, &tw));
      s.warn_all(tw);
    }
    const auto seg = segment_traces(traces, &spec, s.pipeline_options());
    std::string report = "device_id,session_id,detections,expected,missed,unmatched,merged,segment_length\n";
    for (std::size_t i = 0; i < seg.reports.size(); ++i) {
      const auto& r = seg.reports[i];
      report += traces[i].device_id + "," + traces[i].session_id + "," + std::to_string(r.detections) + "," +
                (r.expected ? std::to_string(*r.expected) : std::string()) + "," + std::to_string(r.missed_bursts.size()) +
                "," + std::to_string(r.spurious_detections) + "," + std::to_string(r.merged_detections) + "," +
                std::to_string(r.segment_length) + "\n";
      for (const auto& m : r.warnings) s.warn_all({traces[i].device_id + "/" + traces[i].session_id + ": " + m});
    }
    const std::string tag = sanitize(wid);
    s.write("segments_" + tag + ".csv", format_segments(seg.segments));
    s.write("segmentation_" + tag + ".csv", report);
    s.out() << "waveform " << wid << ": " << seg.segments.size() << " segments of " << seg.segment_length
            << " samples from " << traces.size() << " traces\n";
  }
}

void cmd_features(Session& s, const std::vector<std::string>& inputs) {
  for (const auto& in : inputs) {
    auto segments = parse_segments(read_text_file(in, kModule));
    std::vector<DroppedRow> dropped;
    const auto m = featurize(std::move(segments), s.cfg().features, &dropped);
    for (const auto& d : dropped) {
      s.warn_all({"dropped " + d.device_id + "/" + d.session_id + "#" + std::to_string(d.segment_index) + ": " + d.reason});
    }
    const std::string name = derived_name(in, "segments", "features");
    s.write(name, format_feature_matrix(m));
    s.out() << name << ": " << m.size() << " rows, " << dropped.size() << " dropped\n";
  }
}

struct SelectArgs {
  std::string features;
  std::string method = "sfs";
  std::size_t subset_size = 6;
  std::string start;
  std::string pool;
};

void cmd_select(Session& s, const SelectArgs& a) {
  const auto m = load_features(a.features);
  const auto plan = kfold_split(m, s.cfg().folds, s.cfg().seed);
  const CvWorkspace cv(m, plan);
  const FeatureMask pool = mask_or_all(a.pool);
  SelectionResult r;
  if (a.method == "brute") {
    r = brute_force_select(cv, s.cfg().hyper, a.subset_size, pool, s.cfg().smo);
  } else if (a.method == "sfs") {
    r = sfs_select(cv, s.cfg().hyper, a.start.empty() ? FeatureMask{} : FeatureMask::parse(a.start), pool, s.cfg().smo);
  } else {
    usage("--method must be brute or sfs");
  }
  s.write("selection_" + a.method + ".csv", format_selection_csv(r));
  s.out() << "chosen " << r.chosen.to_string() << " accuracy " << format_fixed(r.metric_value, 4) << " ("
          << r.search_log.size() << " log entries";
  if (a.method == "brute") s.out() << ", " << r.tied.size() << " tied";
  s.out() << ")\n";
}

void cmd_tune(Session& s, const std::string& features, const std::string& mask) {
  auto& cfg = s.cfg();
  const auto m = load_features(features);
  const CvWorkspace cv(m, kfold_split(m, cfg.folds, cfg.seed));
  const auto r = grid_search(cv, mask_or_all(mask), power_grid(cfg.gamma_exp_lo, cfg.gamma_exp_hi),
                             power_grid(cfg.c_exp_lo, cfg.c_exp_hi), cfg.smo);
  s.write("grid.csv", format_grid_csv(r));
  s.write("fold_optima.csv", format_fold_optima_csv(r));
  s.out() << "best gamma " << format_exact(r.best.gamma) << " C " << format_exact(r.best.box_constraint)
          << " accuracy " << format_fixed(r.best_accuracy, 4) << '\n';
}

void cmd_train(Session& s, const std::string& features, const std::string& mask, const std::string& model_name) {
  const auto m = load_features(features);
  Warnings w;
  const auto model = train_classifier(m, mask_or_all(mask), s.cfg().hyper, s.cfg().smo, &w);
  s.warn_all(w);
  s.write(model_name, format_model(model));
  s.out() << "trained " << model.oao.machines.size() << " machines over " << model.oao.class_labels.size()
          << " classes\n";
}

struct ClassifyArgs {
  std::string features;
  std::string model;
  std::string mask;
  bool knn = false;
  bool cv = false;
};

void cmd_classify(Session& s, const ClassifyArgs& a) {
  auto& cfg = s.cfg();
  if (a.cv && !a.model.empty()) usage("--cv and --model are exclusive");
  if (a.knn && !a.model.empty()) usage("--knn cross-validates; drop --model");
  const auto m = load_features(a.features);
  if (!a.model.empty()) {
    const auto model = load_model(a.model);
    std::set<std::string> labels(model.oao.class_labels.begin(), model.oao.class_labels.end());
    for (const auto& r : m.rows) labels.insert(r.device_id);
    auto counts = ConfusionCounts::zeros({labels.begin(), labels.end()});
    std::string pred = "device_id,session_id,segment_index,predicted,votes\n";
    for (const auto& r : m.rows) {
      const auto p = model.predict(r.values);
      std::string votes;
      for (std::size_t i = 0; i < p.votes.size(); ++i) votes += (i ? " " : "") + std::to_string(p.votes[i]);
      pred += r.device_id + "," + r.session_id + "," + std::to_string(r.segment_index) + "," + p.label + "," + votes + "\n";
      counts.add(r.device_id, p.label);
    }
    s.write("predictions.csv", pred);
    s.write("confusion.csv", format_confusion_csv(counts));
    s.out() << "classified " << m.size() << " rows, accuracy " << format_fixed(accuracy(counts), 4) << '\n';
    return;
  }
  const auto plan = kfold_split(m, cfg.folds, cfg.seed);
  Warnings w;
  const auto counts = a.knn ? cross_validate_knn(m, plan, mask_or_all(a.mask), cfg.knn_k)
                            : cross_validate(m, plan, cfg.hyper, mask_or_all(a.mask), cfg.smo, &w);
  s.warn_all(w);
  s.write(a.knn ? "confusion_knn.csv" : "confusion_cv.csv", format_confusion_csv(counts));
  s.out() << (a.knn ? "knn" : "svm") << " " << cfg.folds << "-fold accuracy " << format_fixed(accuracy(counts), 4)
          << " (diagonal " << counts.diagonal_sum() << " of " << counts.total() << ")\n";
}

struct VerifyArgs {
  std::string features;
  std::string a, b;
  bool all = false;
  std::string groups;
  std::string mask;
};

void cmd_verify(Session& s, const VerifyArgs& a) {
  const auto m = load_features(a.features);
  const auto opts = s.verify_options(mask_or_all(a.mask));
  if (!a.all) {
    if (a.a.empty() || a.b.empty()) usage("verify needs --a and --b, or --all");
    const auto v = verify_pair(m, a.a, a.b, opts);
    const std::string tag = sanitize(a.a) + "_" + sanitize(a.b);
    s.write("roc_" + tag + ".csv", format_roc_csv(v.curve));
    s.write("roc_" + tag + ".svg", render_roc_svg({{a.a + " vs " + a.b, v.curve}}, "ROC " + a.a + " vs " + a.b));
    s.out() << a.a << " vs " << a.b << " EER " << format_fixed(v.eer, 4) << '\n';
    return;
  }
  const auto devices = m.class_labels();
  const auto groups = load_groups(a.groups, devices);
  std::vector<PairEer> rows;
  for (bool intra : {false, true}) {
    const auto pairs = device_pairs(devices, groups, intra);
    const auto results = verify_pairs(m, pairs, opts);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      rows.push_back({intra ? "intra" : "inter", pairs[i].first, pairs[i].second, results[i].eer});
    }
  }
  s.write("eer.csv", format_eer_csv(rows));
  for (const char* g : {"inter", "intra"}) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows) {
      if (r.group == g) {
        sum += r.eer;
        ++n;
      }
    }
    if (n) s.out() << g << "-group mean EER " << format_fixed(sum / n, 4) << " over " << n << " pairs\n";
  }
}

struct StabilityArgs {
  std::string features;
  std::string pairs;
  std::string groups;
  std::string mask;
};

void cmd_stability(Session& s, const StabilityArgs& a) {
  auto& cfg = s.cfg();
  if (cfg.manifest.empty()) usage("stability needs --manifest to map sessions to days");
  Warnings w;
  const auto entries = load_manifest(cfg.manifest, &w);
  s.warn_all(w);
  std::map<std::string, std::string> session_day;
  std::vector<std::string> days;
  for (const auto& e : entries) {
    session_day[e.session_id] = e.day_label;
    if (std::find(days.begin(), days.end(), e.day_label) == days.end()) days.push_back(e.day_label);
  }
  const auto m = load_features(a.features);
  std::map<std::string, FeatureMatrix> by_day;
  for (const auto& r : m.rows) {
    auto it = session_day.find(r.session_id);
    if (it == session_day.end()) {
      throw Error(Errc::UnknownLabel, std::string(kModule), "session '" + r.session_id + "' is not in the manifest");
    }
    by_day[it->second].rows.push_back(r);
  }
  const auto devices = m.class_labels();
  const auto groups = load_groups(a.groups, devices);
  const auto pairs = a.pairs.empty() ? device_pairs(devices, groups, false) : parse_pairs(a.pairs);
  const auto report = stability_report(by_day, days, pairs, s.verify_options(mask_or_all(a.mask)));
  s.write("stability_within_day.csv", format_eer_csv(report.within_day));
  s.write("stability_cross_day.csv", format_eer_csv(report.cross_day));
  s.write("stability_same_device.csv", format_eer_csv(report.same_device));
  const auto means = mean_by_group(report.same_device, groups);
  s.write("stability_group_means.csv", format_group_means_csv(means));
  for (const auto& [g, v] : means) s.out() << "same-device cross-day EER " << g << " " << format_fixed(v, 3) << '\n';
}

struct NoiseArgs {
  std::string segments;
  std::string a, b;
  std::string snr;
  std::string mask;
};

void cmd_noise(Session& s, const NoiseArgs& a) {
  auto& cfg = s.cfg();
  if (a.a.empty() || a.b.empty()) usage("noise-sweep needs --a and --b");
  const auto segments = parse_segments(read_text_file(a.segments, kModule));
  NoiseSweepOptions opts;
  opts.snr_db = a.snr.empty() ? cfg.snr_db : parse_double_list(a.snr, "--snr");
  opts.repetitions = cfg.repetitions;
  opts.seed = cfg.seed;
  opts.verify = s.verify_options(mask_or_all(a.mask));
  opts.features = cfg.features;
  const auto points = noise_sweep(segments, a.a, a.b, opts);
  s.write("noise.csv", format_noise_csv(points));
  for (const auto& p : points) {
    s.out() << "snr " << format_exact(p.snr_db) << " dB: EER " << format_fixed(p.mean_eer, 4) << " +/- "
            << format_fixed(p.std_error, 4) << '\n';
  }
}

void cmd_waveform_compare(Session& s, const std::vector<std::string>& inputs, const std::string& labels_text,
                          const std::string& groups_path, const std::string& mask) {
  const auto labels = parse_string_list(labels_text);
  if (!labels.empty() && labels.size() != inputs.size()) usage("--labels must name every --features file");
  std::vector<std::pair<std::string, FeatureMatrix>> per;
  std::set<std::string> devices;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    per.emplace_back(labels.empty() ? label_from_path(inputs[i]) : labels[i], load_features(inputs[i]));
    for (const auto& d : per.back().second.class_labels()) devices.insert(d);
  }
  const auto groups = load_groups(groups_path, {devices.begin(), devices.end()});
  const auto rows = waveform_comparison(per, groups, s.verify_options(mask_or_all(mask)));
  s.write("waveform_summary.csv", format_waveform_csv(rows));
  std::vector<PairEer> all;
  for (const auto& r : rows) {
    for (auto p : r.pairs) {
      p.group = r.waveform_id + ":" + p.group;
      all.push_back(std::move(p));
    }
  }
  s.write("waveform_pairs.csv", format_eer_csv(all));
  for (const auto& r : rows) {
    s.out() << "waveform " << r.waveform_id << ": inter " << format_fixed(r.inter_eer, 4) << " intra "
            << format_fixed(r.intra_eer, 4) << '\n';
  }
}

struct ReportArgs {
  std::string confusion;
  std::string compare;
  std::vector<std::string> roc;
  std::string waveform_summary;
  std::string eer;
  std::string svg;
};

void cmd_report(Session& s, const ReportArgs& a) {
  if (a.confusion.empty() && a.roc.empty() && a.waveform_summary.empty() && a.eer.empty()) {
    usage("report needs --confusion, --roc, --waveform-summary or --eer");
  }
  if (!a.confusion.empty()) {
    Warnings w;
    const auto c = parse_confusion_csv(read_text_file(a.confusion, kModule), &w);
    s.warn_all(w);
    s.out() << "classes " << c.class_labels.size() << " diagonal " << c.diagonal_sum() << " total " << c.total()
            << '\n';
    s.out() << "accuracy " << format_fixed(accuracy(c), 3) << '\n';
    if (!a.compare.empty()) {
      Warnings w2;
      const auto d = parse_confusion_csv(read_text_file(a.compare, kModule), &w2);
      s.warn_all(w2);
      if (d.diagonal_sum() == 0) throw Error(Errc::EmptyCounts, std::string(kModule), "comparison diagonal is zero");
      s.out() << "diagonal ratio " << format_fixed(static_cast<double>(c.diagonal_sum()) / d.diagonal_sum(), 3) << '\n';
    }
  }
  if (!a.roc.empty()) {
    std::vector<std::pair<std::string, RocCurve>> curves;
    for (const auto& p : a.roc) {
      curves.emplace_back(fs::path(p).stem().string(), parse_roc_csv(read_text_file(p, kModule)));
      s.out() << curves.back().first << " EER " << format_fixed(eer(curves.back().second), 4) << '\n';
    }
    if (!a.svg.empty()) s.write(a.svg, render_roc_svg(curves, "ROC"));
  }
  if (!a.waveform_summary.empty()) {
    for (const auto& r : parse_waveform_csv(read_text_file(a.waveform_summary, kModule))) {
      s.out() << "waveform " << r.waveform_id << ": inter " << format_exact(r.inter_eer) << " intra "
              << format_exact(r.intra_eer) << '\n';
    }
  }
  if (!a.eer.empty()) {
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& r : parse_eer_csv(read_text_file(a.eer, kModule))) {
      acc[r.group].first += r.eer;
      ++acc[r.group].second;
    }
    for (const auto& [g, v] : acc) s.out() << g << " mean EER " << format_fixed(v.first / v.second, 4) << " over " << v.second << '\n';
  }
}

struct ExportArgs {
  int pcm_rate = 44100;
  bool strict = false;
};

void cmd_export(Session& s, const ExportArgs& a) {
  const WaveformSpec spec = resolve_waveform(s.cfg().waveform);
  s.warn_all(validate_waveform(spec, a.strict));
  const auto signal = build_waveform(spec, a.pcm_rate);
  const std::string tag = sanitize(spec.id);
  const fs::path wav = s.cfg().out_dir / ("stimulus_" + tag + ".wav");
  write_binary_file(wav, export_pcm(signal, a.pcm_rate), kModule);
  s.info("wrote " + wav.generic_string());
  const auto schedule = pulse_onsets(spec);
  std::string csv = "pulse,onset_ms,width_ms\n";
  for (std::size_t i = 0; i < schedule.onsets_ms.size(); ++i) {
    csv += std::to_string(i) + "," + format_exact(schedule.onsets_ms[i]) + "," + format_exact(spec.pulse_width_ms) + "\n";
  }
  s.write("schedule_" + tag + ".csv", csv);
  s.out() << "waveform " << spec.id << ": " << schedule.onsets_ms.size() << " pulses, "
          << format_fixed(schedule.total_duration_ms / 1000.0, 2) << " s, " << signal.size() << " PCM samples\n";
}

std::optional<std::string> prescan_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

void report_error(std::ostream& err, const Error& e) {
  err << "error: module=" << e.module() << " code=" << errc_name(e.code()) << " message=" << e.message() << '\n';
}

}  // namespace

std::string default_device_group(std::string_view device_id) {
  const auto dash = device_id.rfind('-');
  return std::string(dash == std::string_view::npos || dash == 0 ? device_id : device_id.substr(0, dash));
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  PipelineConfig cfg;
  for (const auto& kv : parse_key_values(text, kModule)) {
    const std::string where = "config line " + std::to_string(kv.line);
    const auto& k = kv.key;
    const auto& v = kv.value;
    auto as_size = [&] {
      const auto n = parse_int_field(v, kModule, where);
      if (n < 0) throw Error(Errc::InvalidSpec, std::string(kModule), where + ": " + k + " must be >= 0");
      return static_cast<std::size_t>(n);
    };
    if (k == "waveform") cfg.waveform = v;
    else if (k == "park") cfg.park = v;
    else if (k == "manifest") cfg.manifest = v;
    else if (k == "channel") cfg.channel = parse_channel(v);
    else if (k == "vt.window_len") cfg.vt.window_len = as_size();
    else if (k == "vt.baseline_len") cfg.vt.baseline_len = as_size();
    else if (k == "vt.threshold_factor") cfg.vt.threshold_factor = parse_double_field(v, kModule, where);
    else if (k == "segment_length") cfg.segment_length = as_size();
    else if (k == "features.classical_moments") cfg.features.classical_moments = parse_bool(v, where);
    else if (k == "features.log_floor") cfg.features.log_floor = parse_double_field(v, kModule, where);
    else if (k == "learn.gamma") cfg.hyper.gamma = parse_double_field(v, kModule, where);
    else if (k == "learn.box_constraint") cfg.hyper.box_constraint = parse_double_field(v, kModule, where);
    else if (k == "learn.tol") cfg.smo.tol = parse_double_field(v, kModule, where);
    else if (k == "learn.max_passes") cfg.smo.max_passes = static_cast<int>(parse_int_field(v, kModule, where));
    else if (k == "learn.knn_k") cfg.knn_k = as_size();
    else if (k == "learn.gamma_exponents") std::tie(cfg.gamma_exp_lo, cfg.gamma_exp_hi) = parse_exponent_range(v, where);
    else if (k == "learn.c_exponents") std::tie(cfg.c_exp_lo, cfg.c_exp_hi) = parse_exponent_range(v, where);
    else if (k == "eval.folds") cfg.folds = static_cast<int>(parse_int_field(v, kModule, where));
    else if (k == "eval.snr_db") cfg.snr_db = parse_double_list(v, where);
    else if (k == "eval.repetitions") cfg.repetitions = static_cast<int>(parse_int_field(v, kModule, where));
    else if (k == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int_field(v, kModule, where));
    else if (k == "out") cfg.out_dir = v;
    else throw Error(Errc::ParseError, std::string(kModule), where + ": unknown key '" + k + "'");
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  auto cfg = parse_pipeline_config(read_text_file(path, kModule));
  // Relative paths inside a config file are relative to the file.
  const fs::path base = path.parent_path();
  auto rebase = [&](std::string& p) {
    if (!p.empty() && !is_preset(p) && p != "default9" && fs::path(p).is_relative()) p = (base / p).string();
  };
  rebase(cfg.waveform);
  rebase(cfg.park);
  rebase(cfg.manifest);
  return cfg;
}

void validate_pipeline_config(const PipelineConfig& cfg, bool need_source) {
  auto fail = [](const std::string& m) { throw Error(Errc::InvalidSpec, std::string(kModule), m); };
  if (!cfg.park.empty() && !cfg.manifest.empty()) fail("set either park (simulation) or manifest (ingest), not both");
  if (need_source && cfg.park.empty() && cfg.manifest.empty()) fail("set park (simulation) or manifest (ingest)");
  auto exists = [&](const std::string& p, const char* what) {
    if (!p.empty() && !fs::exists(p)) throw Error(Errc::IoError, std::string(kModule), std::string(what) + " '" + p + "' not found");
  };
  if (!is_preset(cfg.waveform)) exists(cfg.waveform, "waveform spec");
  if (cfg.park != "default9") exists(cfg.park, "park spec");
  exists(cfg.manifest, "manifest");
  validate_vt_config(cfg.vt);
  validate_hyper(cfg.hyper);
  if (cfg.folds < 2) fail("eval.folds must be >= 2");
  if (cfg.repetitions < 1) fail("eval.repetitions must be >= 1");
  if (cfg.knn_k < 1) fail("learn.knn_k must be >= 1");
  if (!(cfg.smo.tol > 0)) fail("learn.tol must be > 0");
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg;
  try {
    if (auto path = prescan_config(args)) cfg = load_pipeline_config(*path);
  } catch (const Error& e) {
    report_error(err, e);
    return 1;
  }

  CLI::App app{"Magnetometer fingerprinting toolkit", "magprint"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  std::string config_path, out_dir = cfg.out_dir.string(), channel;
  std::uint64_t seed = cfg.seed;
  bool verbose = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Pipeline config file (key = value)");
    sub->add_option("--seed", seed, "Seed for every stochastic stage");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_flag("--verbose", verbose, "Report progress and written files");
  };
  auto learn_flags = [&](CLI::App* sub) {
    sub->add_option("--gamma", cfg.hyper.gamma, "RBF scaling factor");
    sub->add_option("--c", cfg.hyper.box_constraint, "Box constraint");
    sub->add_option("--folds", cfg.folds, "Cross-validation folds");
  };

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Simulate a device park responding to waveforms");
  common(sim);
  sim->add_option("--park", cfg.park, "'default9' or park spec file");
  sim->add_option("--waveform", sim_args.waveforms, "Preset id or spec file, comma-separated for several");
  sim->add_option("--days", sim_args.days, "Sessions (days) per device and waveform");

  auto* seg = app.add_subcommand("segment", "Cut traces of a manifest into response segments");
  common(seg);
  seg->add_option("--manifest", cfg.manifest, "Session manifest CSV");
  seg->add_option("--waveform", cfg.waveform, "Spec file for non-preset waveform ids");
  seg->add_option("--channel", channel, "magnitude, x, y or z");
  seg->add_option("--window", cfg.vt.window_len, "Variance window length");
  seg->add_option("--baseline", cfg.vt.baseline_len, "Baseline block length");
  seg->add_option("--threshold", cfg.vt.threshold_factor, "Threshold factor over baseline variance");
  std::size_t seg_len = 0;
  seg->add_option("--segment-length", seg_len, "Common segment length in samples");

  std::vector<std::string> feat_inputs;
  auto* feat = app.add_subcommand("features", "Normalize segments and extract the 18 features");
  common(feat);
  feat->add_option("--segments", feat_inputs, "Segment CSV file(s)")->required();
  feat->add_flag("--classical-moments", cfg.features.classical_moments, "Standardized skewness and kurtosis");
  feat->add_option("--log-floor", cfg.features.log_floor, "Floor inside the logarithms");

  SelectArgs sel_args;
  auto* sel = app.add_subcommand("select", "Feature subset selection");
  common(sel);
  learn_flags(sel);
  sel->add_option("--features", sel_args.features, "Feature CSV")->required();
  sel->add_option("--method", sel_args.method, "brute or sfs")->check(CLI::IsMember({"brute", "sfs"}));
  sel->add_option("--subset-size", sel_args.subset_size, "Subset size for brute force");
  sel->add_option("--start", sel_args.start, "SFS start subset, e.g. \"1 2 3\"");
  sel->add_option("--pool", sel_args.pool, "Candidate features (default all 18)");

  std::string tune_features, tune_mask, gamma_exp, c_exp;
  auto* tune = app.add_subcommand("tune", "Grid search over gamma and C");
  common(tune);
  tune->add_option("--features", tune_features, "Feature CSV")->required();
  tune->add_option("--mask", tune_mask, "Feature subset");
  tune->add_option("--gamma-exponents", gamma_exp, "lo:hi powers of two");
  tune->add_option("--c-exponents", c_exp, "lo:hi powers of two");
  tune->add_option("--folds", cfg.folds, "Cross-validation folds");

  std::string train_features, train_mask, model_name = "model.txt";
  auto* train = app.add_subcommand("train", "Train and save a one-against-one SVM classifier");
  common(train);
  learn_flags(train);
  train->add_option("--features", train_features, "Feature CSV")->required();
  train->add_option("--mask", train_mask, "Feature subset");
  train->add_option("--model-name", model_name, "Model file name inside --out");

  ClassifyArgs cls_args;
  auto* cls = app.add_subcommand("classify", "Classify with a saved model, or cross-validate");
  common(cls);
  learn_flags(cls);
  cls->add_option("--features", cls_args.features, "Feature CSV")->required();
  cls->add_option("--model", cls_args.model, "Saved model; omit to cross-validate");
  cls->add_option("--mask", cls_args.mask, "Feature subset for cross-validation");
  cls->add_flag("--cv", cls_args.cv, "Cross-validate (the default without --model)");
  cls->add_flag("--knn", cls_args.knn, "Cross-validate k-nearest neighbours instead of SVM");
  cls->add_option("--k", cfg.knn_k, "Neighbours for --knn");

  VerifyArgs ver_args;
  auto* ver = app.add_subcommand("verify", "Pairwise verification ROC and EER");
  common(ver);
  learn_flags(ver);
  ver->add_option("--features", ver_args.features, "Feature CSV")->required();
  ver->add_option("--a", ver_args.a, "Genuine device");
  ver->add_option("--b", ver_args.b, "Impostor device");
  ver->add_flag("--all", ver_args.all, "Every device pair, grouped inter/intra");
  ver->add_option("--groups", ver_args.groups, "CSV device_id,group (default: id up to last '-')");
  ver->add_option("--mask", ver_args.mask, "Feature subset");

  StabilityArgs stab_args;
  auto* stab = app.add_subcommand("stability", "Multi-day verification stability");
  common(stab);
  learn_flags(stab);
  stab->add_option("--features", stab_args.features, "Feature CSV covering several days")->required();
  stab->add_option("--manifest", cfg.manifest, "Manifest mapping sessions to days");
  stab->add_option("--pairs", stab_args.pairs, "a:b,... (default all inter-group pairs)");
  stab->add_option("--groups", stab_args.groups, "CSV device_id,group");
  stab->add_option("--mask", stab_args.mask, "Feature subset");

  NoiseArgs noise_args;
  auto* noise = app.add_subcommand("noise-sweep", "Verification EER under added white noise");
  common(noise);
  learn_flags(noise);
  noise->add_option("--segments", noise_args.segments, "Raw segment CSV")->required();
  noise->add_option("--a", noise_args.a, "Genuine device");
  noise->add_option("--b", noise_args.b, "Impostor device");
  noise->add_option("--snr", noise_args.snr, "Comma-separated SNRs in dB (inf allowed)");
  noise->add_option("--repetitions", cfg.repetitions, "Noise draws per SNR");
  noise->add_option("--mask", noise_args.mask, "Feature subset");

  std::vector<std::string> wf_inputs;
  std::string wf_labels, wf_groups, wf_mask;
  auto* wfc = app.add_subcommand("waveform-compare", "Average inter/intra-group EER per waveform");
  common(wfc);
  learn_flags(wfc);
  wfc->add_option("--features", wf_inputs, "Feature CSV per waveform")->required();
  wfc->add_option("--labels", wf_labels, "Waveform labels (default from file names)");
  wfc->add_option("--groups", wf_groups, "CSV device_id,group");
  wfc->add_option("--mask", wf_mask, "Feature subset");

  ReportArgs rep_args;
  auto* rep = app.add_subcommand("report", "Summarize confusion matrices, ROC and EER tables");
  common(rep);
  rep->add_option("--confusion", rep_args.confusion, "Confusion matrix CSV");
  rep->add_option("--compare", rep_args.compare, "Second confusion matrix for a diagonal ratio");
  rep->add_option("--roc", rep_args.roc, "ROC CSV file(s)");
  rep->add_option("--svg", rep_args.svg, "Write the ROC curves as SVG");
  rep->add_option("--waveform-summary", rep_args.waveform_summary, "Waveform summary CSV");
  rep->add_option("--eer", rep_args.eer, "EER table CSV");

  ExportArgs exp_args;
  auto* exp = app.add_subcommand("export-stimulus", "Write a waveform as 16-bit PCM WAV plus its schedule");
  common(exp);
  exp->add_option("--waveform", cfg.waveform, "Preset id or spec file");
  exp->add_option("--pcm-rate", exp_args.pcm_rate, "PCM sample rate in Hz");
  exp->add_flag("--strict", exp_args.strict, "Reject gaps below the hysteresis guard");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: module=cli code=UsageError message=" << e.what() << '\n';
    CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return 2;
  }

  try {
    cfg.seed = seed;
    cfg.out_dir = out_dir;
    if (!channel.empty()) cfg.channel = parse_channel(channel);
    if (seg_len > 0) cfg.segment_length = seg_len;
    if (!gamma_exp.empty()) std::tie(cfg.gamma_exp_lo, cfg.gamma_exp_hi) = parse_exponent_range(gamma_exp, "--gamma-exponents");
    if (!c_exp.empty()) std::tie(cfg.c_exp_lo, cfg.c_exp_hi) = parse_exponent_range(c_exp, "--c-exponents");
    validate_pipeline_config(cfg);

    Session session(cfg, out, err, verbose);
    if (sim->parsed()) cmd_simulate(session, sim_args);
    else if (seg->parsed()) cmd_segment(session);
    else if (feat->parsed()) cmd_features(session, feat_inputs);
    else if (sel->parsed()) cmd_select(session, sel_args);
    else if (tune->parsed()) cmd_tune(session, tune_features, tune_mask);
    else if (train->parsed()) cmd_train(session, train_features, train_mask, model_name);
    else if (cls->parsed()) cmd_classify(session, cls_args);
    else if (ver->parsed()) cmd_verify(session, ver_args);
    else if (stab->parsed()) cmd_stability(session, stab_args);
    else if (noise->parsed()) cmd_noise(session, noise_args);
    else if (wfc->parsed()) cmd_waveform_compare(session, wf_inputs, wf_labels, wf_groups, wf_mask);
    else if (rep->parsed()) cmd_report(session, rep_args);
    else if (exp->parsed()) cmd_export(session, exp_args);
  } catch (const Error& e) {
    report_error(err, e);
    return e.code() == Errc::UsageError ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: module=cli code=Internal message=" << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace magprint
