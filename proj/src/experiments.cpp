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

#include "magprint/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "magprint/parallel.hpp"
#include "magprint/pipeline.hpp"
#include "magprint/simulator.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "eval";

const std::string& group_of(const std::map<std::string, std::string>& g, const std::string& device) {
  auto it = g.find(device);
  if (it == g.end()) throw Error(Errc::UnknownLabel, std::string(kModule), "no group for device '" + device + "'");
  return it->second;
}

FeatureMatrix relabeled(const FeatureMatrix& m, const std::string& device, const std::string& label) {
  FeatureMatrix out;
  out.mask = m.mask;
  for (const auto& r : m.rows) {
    if (r.device_id != device) continue;
    out.rows.push_back(r);
    out.rows.back().device_id = label;
  }
  return out;
}

}  // namespace

std::vector<DevicePair> device_pairs(const std::vector<std::string>& devices,
                                     const std::map<std::string, std::string>& device_group, bool same_group) {
  std::vector<std::string> sorted(devices);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<DevicePair> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const bool same = group_of(device_group, sorted[i]) == group_of(device_group, sorted[j]);
      if (same == same_group) out.emplace_back(sorted[i], sorted[j]);
    }
  }
  return out;
}

std::map<std::string, double> mean_by_group(const std::vector<PairEer>& rows,
                                            const std::map<std::string, std::string>& device_group) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    auto& a = acc[group_of(device_group, r.device_a)];
    a.first += r.eer;
    ++a.second;
  }
  std::map<std::string, double> out;
  for (const auto& [g, a] : acc) out[g] = a.first / a.second;
  return out;
}

StabilityReport stability_report(const std::map<std::string, FeatureMatrix>& by_day,
                                 const std::vector<std::string>& days, const std::vector<DevicePair>& pairs,
                                 const VerifyOptions& opts) {
  if (days.size() < 2) {
    throw Error(Errc::MissingDay, std::string(kModule), "stability needs at least 2 day labels");
  }
  for (const auto& d : days) {
    if (!by_day.count(d)) throw Error(Errc::MissingDay, std::string(kModule), "no data for day '" + d + "'");
  }
  StabilityReport report;
  report.days = days;

  struct Job {
    int kind;  // 0 within day, 1 cross day, 2 same device
    std::string day_i, day_j, a, b;
  };
  std::vector<Job> jobs;
  for (const auto& d : days) {
    for (const auto& [a, b] : pairs) jobs.push_back({0, d, d, a, b});
  }
  for (const auto& di : days) {
    for (const auto& dj : days) {
      if (di == dj) continue;
      for (const auto& [a, b] : pairs) jobs.push_back({1, di, dj, a, b});
    }
  }
  std::set<std::string> devices;
  for (const auto& [a, b] : pairs) {
    devices.insert(a);
    devices.insert(b);
  }
  for (std::size_t i = 0; i < days.size(); ++i) {
    for (std::size_t j = i + 1; j < days.size(); ++j) {
      for (const auto& dev : devices) jobs.push_back({2, days[i], days[j], dev, dev});
    }
  }

  std::vector<double> eers(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t k) {
    const Job& job = jobs[k];
    const FeatureMatrix& mi = by_day.at(job.day_i);
    const FeatureMatrix& mj = by_day.at(job.day_j);
    if (job.kind == 0) {
      eers[k] = verify_pair(mi, job.a, job.b, opts).eer;
    } else if (job.kind == 1) {
      eers[k] = verify_pair_across(mi, mj, job.a, job.b, opts).eer;
    } else {
      const std::string la = job.a + "@" + job.day_i;
      const std::string lb = job.a + "@" + job.day_j;
      FeatureMatrix both = relabeled(mi, job.a, la);
      const FeatureMatrix other = relabeled(mj, job.a, lb);
      both.rows.insert(both.rows.end(), other.rows.begin(), other.rows.end());
      eers[k] = verify_pair(both, la, lb, opts).eer;
    }
  });
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const Job& job = jobs[k];
    if (job.kind == 0) report.within_day.push_back({job.day_i, job.a, job.b, eers[k]});
    else if (job.kind == 1) report.cross_day.push_back({job.day_i + ">" + job.day_j, job.a, job.b, eers[k]});
    else report.same_device.push_back({job.day_i + "|" + job.day_j, job.a, job.b, eers[k]});
  }
  return report;
}

std::vector<NoisePoint> noise_sweep(const std::vector<ResponseSegment>& raw_segments, const std::string& device_a,
                                    const std::string& device_b, const NoiseSweepOptions& opts) {
  if (opts.repetitions < 1) throw Error(Errc::InvalidSpec, std::string(kModule), "repetitions must be >= 1");
  std::vector<ResponseSegment> pair;
  for (const auto& s : raw_segments) {
    if (s.device_id == device_a || s.device_id == device_b) pair.push_back(s);
  }
  struct Job {
    std::size_t point;
    int rep;
  };
  std::vector<NoisePoint> points(opts.snr_db.size());
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < opts.snr_db.size(); ++p) {
    points[p].snr_db = opts.snr_db[p];
    const int reps = std::isinf(opts.snr_db[p]) && opts.snr_db[p] > 0 ? 1 : opts.repetitions;
    points[p].eers.resize(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) jobs.push_back({p, r});
  }
  parallel_for(jobs.size(), [&](std::size_t k) {
    const auto [p, rep] = jobs[k];
    const std::uint64_t base = mix_seed(mix_seed(opts.seed, p), static_cast<std::uint64_t>(rep));
    std::vector<ResponseSegment> noisy = pair;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      noisy[i].samples = add_awgn(noisy[i].samples, opts.snr_db[p], mix_seed(base, i));
    }
    const FeatureMatrix m = featurize(std::move(noisy), opts.features);
    points[p].eers[static_cast<std::size_t>(rep)] = verify_pair(m, device_a, device_b, opts.verify).eer;
  });
  for (auto& pt : points) {
    const double n = static_cast<double>(pt.eers.size());
    double mean = 0.0;
    for (double e : pt.eers) mean += e;
    mean /= n;
    double ss = 0.0;
    for (double e : pt.eers) ss += (e - mean) * (e - mean);
    pt.mean_eer = mean;
    pt.std_error = pt.eers.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  }
  return points;
}

WaveformSummary summarize_waveform(const std::string& waveform_id, const FeatureMatrix& matrix,
                                   const std::map<std::string, std::string>& device_model, const VerifyOptions& opts) {
  WaveformSummary out;
  out.waveform_id = waveform_id;
  const auto devices = matrix.class_labels();
  const auto inter = device_pairs(devices, device_model, false);
  const auto intra = device_pairs(devices, device_model, true);
  std::vector<DevicePair> all(inter);
  all.insert(all.end(), intra.begin(), intra.end());
  const auto results = verify_pairs(matrix, all, opts);
  double inter_sum = 0.0, intra_sum = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const bool is_inter = i < inter.size();
    out.pairs.push_back({is_inter ? "inter" : "intra", all[i].first, all[i].second, results[i].eer});
    (is_inter ? inter_sum : intra_sum) += results[i].eer;
  }
  out.inter_eer = inter.empty() ? std::nan("") : inter_sum / static_cast<double>(inter.size());
  out.intra_eer = intra.empty() ? std::nan("") : intra_sum / static_cast<double>(intra.size());
  return out;
}

std::vector<WaveformSummary> waveform_comparison(const std::vector<std::pair<std::string, FeatureMatrix>>& per_waveform,
                                                 const std::map<std::string, std::string>& device_model,
                                                 const VerifyOptions& opts) {
  std::vector<WaveformSummary> out;
  for (const auto& [id, m] : per_waveform) out.push_back(summarize_waveform(id, m, device_model, opts));
  return out;
}

}  // namespace magprint
