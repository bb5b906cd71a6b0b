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

// Trajectory reward: a weighted mixture of
//   r_gold  compliance of the answer with the golden rubric,
//   r_self  compliance of the answer with the trajectory's own rubric,
//   r_fmt   a parse-gated shaping term on the self rubric's size.
//
// total = alpha * r_gold + beta * r_self + gamma * r_fmt.

#ifndef RUBRICRL_REWARD_HPP_
#define RUBRICRL_REWARD_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rubricrl/error.hpp"
#include "rubricrl/parallel.hpp"
#include "rubricrl/records.hpp"
#include "rubricrl/trajectory.hpp"
#include "rubricrl/verifier.hpp"

namespace rubricrl {

struct RewardWeights {
  double alpha = 0.3;
  double beta = 0.5;
  double gamma = 0.2;
  double w_hard = 2.0;
  double w_principle = 1.0;

  // Weights need not sum to 1.
  void Validate() const {
    if (alpha < 0 || beta < 0 || gamma < 0) {
      throw Error(ErrorCode::kConfig, "alpha, beta, gamma must be >= 0");
    }
    if (!(alpha + beta + gamma > 0)) {
      throw Error(ErrorCode::kConfig, "alpha + beta + gamma must be > 0");
    }
    if (!(w_hard > 0) || !(w_principle > 0)) {
      throw Error(ErrorCode::kConfig, "w_hard and w_principle must be > 0");
    }
  }

  double Mix(double r_gold, double r_self, double r_fmt) const {
    return alpha * r_gold + beta * r_self + gamma * r_fmt;
  }
};

struct RewardBreakdown {
  double r_gold = 0.0;
  double r_self = 0.0;
  double r_fmt = 0.0;
  double total = 0.0;
  bool parseable = false;
  size_t n_criteria = 0;
  JudgmentSet golden_judgments;
  std::optional<JudgmentSet> self_judgments;
  std::vector<std::string> notes;
};

// Peaks at n = 10 and falls linearly to 0 at n = 5 and n = 15. Integer
// arithmetic keeps every grid value correctly rounded.
inline double FormatReward(bool parseable, size_t n) {
  if (!parseable) return 0.0;
  long distance = std::labs(long(n) - 10);
  return double(std::max(0L, 5 - distance)) / 5.0;
}

inline double GoldenReward(const Answer& answer, const Rubric& golden,
                           const Verifier& verifier, double w_hard,
                           double w_principle) {
  return ComplianceScore(verifier.VerifyRubric(answer, golden), golden, w_hard,
                         w_principle);
}

struct SelfScore {
  double value = 0.0;
  std::optional<JudgmentSet> judgments;
  std::optional<std::string> note;
};

// Unparseable trajectories and empty self rubrics score 0.
inline SelfScore ScoreSelf(const ParseResult& parse, const Verifier& verifier,
                           double w_hard, double w_principle) {
  if (!parse.parseable) return {0.0, std::nullopt, "unparseable trajectory; r_self = 0"};
  if (parse.rubric->empty()) return {0.0, std::nullopt, "empty self rubric; r_self = 0"};
  JudgmentSet j = verifier.VerifyRubric(*parse.answer, *parse.rubric);
  double value = ComplianceScore(j, *parse.rubric, w_hard, w_principle);
  return {value, std::move(j), std::nullopt};
}

inline double SelfReward(const ParseResult& parse, const Verifier& verifier,
                         double w_hard, double w_principle) {
  return ScoreSelf(parse, verifier, w_hard, w_principle).value;
}

inline RewardBreakdown TotalReward(const ParseResult& parse, const Rubric& golden,
                                   const Verifier& verifier,
                                   const RewardWeights& weights) {
  weights.Validate();
  if (golden.empty()) throw Error(ErrorCode::kEmptyRubric, "empty golden rubric");
  RewardBreakdown out;
  out.parseable = parse.parseable;
  out.n_criteria = parse.rubric ? parse.rubric->n_total() : 0;

  if (parse.answer) {
    out.golden_judgments = verifier.VerifyRubric(*parse.answer, golden);
    out.r_gold = ComplianceScore(out.golden_judgments, golden, weights.w_hard,
                                 weights.w_principle);
  } else {
    out.notes.push_back("no answer block; r_gold = 0");
  }

  SelfScore self = ScoreSelf(parse, verifier, weights.w_hard, weights.w_principle);
  out.r_self = self.value;
  out.self_judgments = std::move(self.judgments);
  if (self.note) out.notes.push_back(*self.note);

  out.r_fmt = FormatReward(parse.parseable, out.n_criteria);
  out.total = weights.Mix(out.r_gold, out.r_self, out.r_fmt);
  return out;
}

struct ScoreEntry {
  std::string id;
  std::string prompt_id;
  std::optional<RewardBreakdown> breakdown;
  std::string error;  // set iff breakdown is empty

  bool ok() const { return breakdown.has_value(); }
};

// Scores every trajectory against its prompt's golden rubric, preserving input
// order. Per-record failures become error entries.
inline std::vector<ScoreEntry> ScoreBatch(
    const std::vector<PromptRecord>& prompts,
    const std::vector<TrajectoryRecord>& trajectories, const Verifier& verifier,
    const RewardWeights& weights, int jobs = 1) {
  weights.Validate();
  std::map<std::string, const PromptRecord*> by_id;
  for (const PromptRecord& p : prompts) by_id[p.id] = &p;

  std::vector<ScoreEntry> out(trajectories.size());
  auto score_one = [&](size_t i) {
    const TrajectoryRecord& t = trajectories[i];
    ScoreEntry& e = out[i];
    e.id = t.id;
    e.prompt_id = t.prompt_id;
    auto it = by_id.find(t.prompt_id);
    if (it == by_id.end()) {
      e.error = "unknown prompt_id '" + t.prompt_id + "'";
      return;
    }
    try {
      e.breakdown = TotalReward(ParseTrajectory(t.raw_text), it->second->golden,
                                verifier, weights);
    } catch (const Error& err) {
      e.error = err.what();
    }
  };

  ParallelFor(trajectories.size(), jobs, score_one);
  return out;
}

}  // namespace rubricrl

#endif  // RUBRICRL_REWARD_HPP_
