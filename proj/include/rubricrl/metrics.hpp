// Copyright 2026 The rubricrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Mechanism metrics: self-consistency, rubric alignment and criterion-count
// statistics, plus the experiment report built from them.

#ifndef RUBRICRL_METRICS_HPP_
#define RUBRICRL_METRICS_HPP_

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "rubricrl/error.hpp"
#include "rubricrl/reward.hpp"
#include "rubricrl/text.hpp"
#include "rubricrl/trajectory.hpp"
#include "rubricrl/verifier.hpp"

namespace rubricrl {

// Compliance of a trajectory's answer with its own rubric. Shares the
// implementation of the self reward, so the two are always equal.
inline double SelfConsistency(const ParseResult& parse, const Verifier& verifier,
                              double w_hard, double w_principle) {
  return SelfReward(parse, verifier, w_hard, w_principle);
}

// Checked criteria encode as their check string, free text as canonical text.
inline std::string CriterionEncoding(const Criterion& c) {
  if (c.check) return c.check->ToString();
  return text::Canonical(c.text);
}

// Weighted Jaccard over criterion encodings. A shared encoding is weighted by
// its golden category; the rest by their own.
inline double RubricAlignment(const Rubric& self_rubric, const Rubric& golden,
                              double w_hard, double w_principle) {
  if (self_rubric.empty() && golden.empty()) {
    throw Error(ErrorCode::kEmptyRubric, "both rubrics are empty");
  }
  auto weight_of = [&](Category c) {
    return c == Category::kHardRule ? w_hard : w_principle;
  };
  std::map<std::string, double> gold;
  for (const Criterion& c : golden.criteria()) {
    gold.emplace(CriterionEncoding(c), weight_of(c.category));
  }
  std::map<std::string, double> self_only;
  double inter = 0.0;
  std::set<std::string> seen;
  for (const Criterion& c : self_rubric.criteria()) {
    std::string enc = CriterionEncoding(c);
    if (!seen.insert(enc).second) continue;
    if (auto it = gold.find(enc); it != gold.end()) {
      inter += it->second;
    } else {
      self_only.emplace(enc, weight_of(c.category));
    }
  }
  double uni = 0.0;
  for (const auto& [enc, w] : gold) uni += w;
  for (const auto& [enc, w] : self_only) uni += w;
  return inter / uni;
}

struct CountStats {
  double mean = 0.0;
  size_t mode = 0;  // smallest among the most frequent counts
  double share_in_5_to_15 = 0.0;
  std::map<size_t, size_t> histogram;
  size_t total = 0;

  nlohmann::json ToJson() const {
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [k, v] : histogram) hist[std::to_string(k)] = v;
    return {{"count", total}, {"mean", mean}, {"mode", mode},
            {"share_in_5_to_15", share_in_5_to_15}, {"histogram", hist}};
  }
};

inline CountStats CriterionCountStats(const std::vector<size_t>& counts) {
  if (counts.empty()) throw Error(ErrorCode::kEmptyInput, "no rubrics to summarize");
  CountStats s;
  s.total = counts.size();
  size_t sum = 0;
  size_t in_range = 0;
  for (size_t n : counts) {
    sum += n;
    ++s.histogram[n];
    if (n >= 5 && n <= 15) ++in_range;
  }
  // Integer sum keeps the mean independent of input order.
  s.mean = double(sum) / double(counts.size());
  s.share_in_5_to_15 = double(in_range) / double(counts.size());
  size_t best = 0;
  for (const auto& [n, freq] : s.histogram) {
    if (freq > best) {
      best = freq;
      s.mode = n;
    }
  }
  return s;
}

inline CountStats CriterionCountStats(const std::vector<Rubric>& rubrics) {
  std::vector<size_t> counts;
  counts.reserve(rubrics.size());
  for (const Rubric& r : rubrics) counts.push_back(r.n_total());
  return CriterionCountStats(counts);
}

inline std::string FormatCountStats(const std::string& label, const CountStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%-16s n=%zu  mean=%.4f  mode=%zu  share_in_5_to_15=%.4f\n",
                label.c_str(), s.total, s.mean, s.mode, s.share_in_5_to_15);
  return buf;
}

// Metrics from one evaluation pass over every task.
struct EvalSnapshot {
  double self_consistency = 0.0;
  double rubric_alignment = 0.0;
  double mean_rubric_size = 0.0;
  double mean_r_gold = 0.0;
  double mean_r_fmt = 0.0;
  double parse_rate = 0.0;

  EvalSnapshot operator-(const EvalSnapshot& o) const {
    return {self_consistency - o.self_consistency,
            rubric_alignment - o.rubric_alignment,
            mean_rubric_size - o.mean_rubric_size, mean_r_gold - o.mean_r_gold,
            mean_r_fmt - o.mean_r_fmt, parse_rate - o.parse_rate};
  }

  nlohmann::json ToJson() const {
    return {{"self_consistency", self_consistency},
            {"rubric_alignment", rubric_alignment},
            {"mean_rubric_size", mean_rubric_size},
            {"mean_r_gold", mean_r_gold},
            {"mean_r_fmt", mean_r_fmt},
            {"parse_rate", parse_rate}};
  }
};

struct ExperimentReport {
  std::string mode;
  EvalSnapshot baseline;  // after warm start, before any update
  EvalSnapshot final;
  CountStats golden_counts;
  CountStats final_self_counts;

  EvalSnapshot delta() const { return final - baseline; }

  nlohmann::json ToJson() const {
    return {{"mode", mode},
            {"baseline", baseline.ToJson()},
            {"final", final.ToJson()},
            {"delta", delta().ToJson()},
            {"golden_counts", golden_counts.ToJson()},
            {"final_self_counts", final_self_counts.ToJson()}};
  }

  std::string ToTable() const {
    std::string out = "mode: " + mode + "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-18s %10s %10s %10s\n", "metric", "baseline",
                  "final", "delta");
    out += buf;
    auto row = [&](const char* name, double b, double f) {
      std::snprintf(buf, sizeof(buf), "%-18s %10.4f %10.4f %+10.4f\n", name, b, f,
                    f - b);
      out += buf;
    };
    row("self_consistency", baseline.self_consistency, final.self_consistency);
    row("rubric_alignment", baseline.rubric_alignment, final.rubric_alignment);
    row("mean_rubric_size", baseline.mean_rubric_size, final.mean_rubric_size);
    row("mean_r_gold", baseline.mean_r_gold, final.mean_r_gold);
    row("mean_r_fmt", baseline.mean_r_fmt, final.mean_r_fmt);
    row("parse_rate", baseline.parse_rate, final.parse_rate);
    out += FormatCountStats("golden counts", golden_counts);
    out += FormatCountStats("final self counts", final_self_counts);
    return out;
  }
};

}  // namespace rubricrl

#endif  // RUBRICRL_METRICS_HPP_
