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


// Seeded synthetic environment. Every task owns a universe of U machine-
// checkable criteria, a golden rubric drawn from it, and an answer renderer
// that can satisfy or violate each criterion independently. Episodes run the
// real render, parse, verify and reward path.

#ifndef RUBRICRL_SYNTHENV_HPP_
#define RUBRICRL_SYNTHENV_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rubricrl/error.hpp"
#include "rubricrl/metrics.hpp"
#include "rubricrl/policy.hpp"
#include "rubricrl/random.hpp"
#include "rubricrl/reward.hpp"
#include "rubricrl/rules.hpp"
#include "rubricrl/text.hpp"
#include "rubricrl/trajectory.hpp"
#include "rubricrl/verifier.hpp"

namespace rubricrl {

struct TaskGenConfig {
  size_t universe_size = 20;
  size_t golden_min = 5;
  size_t golden_max = 15;
  double hard_fraction = 0.6;
  // Leading not_contains rules that every golden rubric carries as hard rules.
  size_t standing_rules = 3;

  void Validate() const {
    if (golden_min < 1 || golden_min > golden_max) {
      throw Error(ErrorCode::kConfig, "golden size range must satisfy 1 <= min <= max");
    }
    if (golden_max > universe_size) {
      throw Error(ErrorCode::kConfig, "universe_size must be >= golden_max");
    }
    if (standing_rules > golden_min) {
      throw Error(ErrorCode::kConfig, "standing_rules must be <= golden_min");
    }
    if (!(hard_fraction >= 0 && hard_fraction <= 1)) {
      throw Error(ErrorCode::kConfig, "hard_fraction must be in [0,1]");
    }
  }
};

struct TaskSpec {
  std::string id;
  std::string instruction;
  std::vector<Criterion> universe;
  Rubric golden;
  std::vector<uint8_t> in_golden;  // per universe index

  size_t universe_size() const { return universe.size(); }

  // Universe index of a criterion text, if any.
  std::optional<size_t> Find(std::string_view criterion_text) const {
    for (size_t u = 0; u < universe.size(); ++u) {
      if (universe[u].text == criterion_text) return u;
    }
    return std::nullopt;
  }
};

namespace internal {

// No filler word contains q, x or z, and every needle token starts with one
// of them, so filler can never produce an accidental needle match.
inline constexpr std::string_view kFiller[] = {
    "the", "plan", "works", "well", "and", "stays", "simple", "for",
    "every", "reader", "here", "today", "with", "care", "along", "this"};

inline std::string CriterionText(const CheckSpec& c) {
  const std::string n = std::to_string(c.count);
  switch (c.kind) {
    case CheckKind::kMaxWords: return "Use at most " + n + " words.";
    case CheckKind::kMinWords: return "Use at least " + n + " words.";
    case CheckKind::kWordCountExact: return "Use exactly " + n + " words.";
    case CheckKind::kAllCaps: return "Write the whole answer in capital letters.";
    case CheckKind::kAllLowercase: return "Write the whole answer in lowercase letters.";
    case CheckKind::kContains: return "Include the word \"" + c.needle + "\".";
    case CheckKind::kNotContains: return "Do not use the word \"" + c.needle + "\".";
    case CheckKind::kStartsWith: return "Begin the answer with \"" + c.needle + "\".";
    case CheckKind::kEndsWith: return "End the answer with \"" + c.needle + "\".";
    case CheckKind::kValidJsonObject: return "Reply with a single JSON object.";
  }
  return "";
}

inline std::string MakeToken(Rng& rng) {
  static constexpr std::string_view kLead = "qxz";
  static constexpr std::string_view kTail = "abcdefghijklmnoprstuvw";
  std::string t(1, kLead[rng.Below(kLead.size())]);
  for (int i = 0; i < 4; ++i) t.push_back(kTail[rng.Below(kTail.size())]);
  return t;
}

// Rising weight up to 10 and a thin tail above it.
inline std::vector<double> GoldenSizeWeights(size_t lo, size_t hi) {
  constexpr double kTail = 0.1245;
  size_t peak = std::clamp<size_t>(10, lo, hi);
  std::vector<double> w;
  for (size_t s = lo; s <= hi; ++s) {
    w.push_back(s <= peak ? double(s - lo + 1) : kTail * double(hi + 1 - s));
  }
  return w;
}

}  // namespace internal

// Throws kUnsatisfiableCombination if the universe mixes checks that the
// renderer cannot control independently.
inline void ValidateTask(const TaskSpec& task) {
  size_t counts = 0, cases = 0, starts = 0, ends = 0;
  std::vector<std::string> needles;
  for (const Criterion& c : task.universe) {
    if (!c.check) {
      throw Error(ErrorCode::kUnsatisfiableCombination,
                  "criterion '" + c.id + "' has no check");
    }
    CheckKind k = c.check->kind;
    if (IsCountKind(k)) {
      ++counts;
      if (c.check->count < int64_t(task.universe.size()) + 4) {
        throw Error(ErrorCode::kUnsatisfiableCombination,
                    "word count " + std::to_string(c.check->count) +
                        " leaves no room for needles");
      }
    }
    if (k == CheckKind::kAllCaps || k == CheckKind::kAllLowercase) ++cases;
    if (k == CheckKind::kStartsWith) ++starts;
    if (k == CheckKind::kEndsWith) ++ends;
    if (k == CheckKind::kValidJsonObject) {
      throw Error(ErrorCode::kUnsatisfiableCombination, "valid_json_object is not renderable");
    }
    if (IsNeedleKind(k)) {
      const std::string& n = c.check->needle;
      bool marked = !n.empty() && (n[0] == 'q' || n[0] == 'x' || n[0] == 'z');
      for (char ch : n) marked = marked && text::IsLower(ch);
      if (!marked) {
        throw Error(ErrorCode::kUnsatisfiableCombination,
                    "needle '" + n + "' must be lowercase and start with q, x or z");
      }
      needles.push_back(n);
    }
  }
  if (counts > 1 || cases > 1 || starts > 1 || ends > 1) {
    throw Error(ErrorCode::kUnsatisfiableCombination,
                "at most one count, case, starts_with and ends_with check per task");
  }
  for (size_t i = 0; i < needles.size(); ++i) {
    for (size_t j = 0; j < needles.size(); ++j) {
      if (i != j && needles[j].find(needles[i]) != std::string::npos) {
        throw Error(ErrorCode::kUnsatisfiableCombination,
                    "needle '" + needles[i] + "' overlaps '" + needles[j] + "'");
      }
    }
  }
}

// Deterministic in (seed, config). Universe layout: standing not_contains
// rules, one word-count check, one case check, starts_with, ends_with, then
// contains / not_contains for the remaining slots.
inline std::vector<TaskSpec> GenerateTasks(uint64_t seed, size_t count,
                                           const TaskGenConfig& config) {
  config.Validate();
  std::vector<double> size_weights =
      internal::GoldenSizeWeights(config.golden_min, config.golden_max);
  const size_t u_size = config.universe_size;
  std::vector<TaskSpec> tasks;
  tasks.reserve(count);
  for (size_t t = 0; t < count; ++t) {
    Rng rng({seed, 0x7a5cULL, t});
    TaskSpec task;
    task.id = "task-" + std::to_string(t + 1);

    std::vector<std::string> tokens;
    while (tokens.size() < u_size) {
      std::string tok = internal::MakeToken(rng);
      if (std::find(tokens.begin(), tokens.end(), tok) == tokens.end()) {
        tokens.push_back(std::move(tok));
      }
    }
    std::vector<CheckSpec> checks;
    for (size_t u = 0; u < u_size; ++u) {
      size_t slot = u < config.standing_rules ? size_t(-1) : u - config.standing_rules;
      if (slot == size_t(-1)) {
        checks.push_back(CheckSpec::Needle(CheckKind::kNotContains, tokens[u]));
      } else if (slot == 0) {
        static constexpr CheckKind kCount[] = {CheckKind::kMaxWords, CheckKind::kMinWords,
                                               CheckKind::kWordCountExact};
        checks.push_back(CheckSpec::Count(kCount[rng.Below(3)],
                                          int64_t(u_size + 4 + rng.Below(8))));
      } else if (slot == 1) {
        checks.push_back(CheckSpec::Flag(rng.Below(2) ? CheckKind::kAllLowercase
                                                      : CheckKind::kAllCaps));
      } else if (slot == 2) {
        checks.push_back(CheckSpec::Needle(CheckKind::kStartsWith, tokens[u]));
      } else if (slot == 3) {
        checks.push_back(CheckSpec::Needle(CheckKind::kEndsWith, tokens[u]));
      } else {
        checks.push_back(CheckSpec::Needle(
            rng.Below(2) ? CheckKind::kNotContains : CheckKind::kContains, tokens[u]));
      }
    }
    for (size_t u = 0; u < u_size; ++u) {
      Criterion c;
      c.id = "u" + std::to_string(u + 1);
      c.text = internal::CriterionText(checks[u]);
      c.category = u < config.standing_rules || rng.Bernoulli(config.hard_fraction)
                       ? Category::kHardRule
                       : Category::kPrinciple;
      c.check = checks[u];
      task.universe.push_back(std::move(c));
    }

    size_t golden_size = config.golden_min + rng.Weighted(size_weights);
    std::vector<size_t> rest;
    for (size_t u = config.standing_rules; u < u_size; ++u) rest.push_back(u);
    rng.Shuffle(rest);
    task.in_golden.assign(u_size, 0);
    for (size_t u = 0; u < config.standing_rules; ++u) task.in_golden[u] = 1;
    for (size_t i = 0; i + config.standing_rules < golden_size; ++i) {
      task.in_golden[rest[i]] = 1;
    }
    std::vector<Criterion> golden;
    for (size_t u = 0; u < u_size; ++u) {
      if (task.in_golden[u]) golden.push_back(task.universe[u]);
    }
    task.golden = Rubric(std::move(golden));
    task.instruction = "Write a short note for " + task.id + " that follows " +
                       std::to_string(golden_size) + " constraints.";
    ValidateTask(task);
    tasks.push_back(std::move(task));
  }
  return tasks;
}

// Builds an answer that meets universe criterion u iff features[u] is set.
inline Answer RenderAnswer(const TaskSpec& task, const std::vector<uint8_t>& features) {
  if (features.size() != task.universe.size()) {
    throw Error(ErrorCode::kInvalidArgument, "feature mask does not match the universe");
  }
  ValidateTask(task);
  std::optional<std::string> first, last;
  std::vector<std::string> middle;
  std::optional<size_t> count_u;
  std::optional<bool> caps;  // true: upper, false: lower, empty: lower
  bool capitalize_first = false;
  for (size_t u = 0; u < features.size(); ++u) {
    const CheckSpec& c = *task.universe[u].check;
    bool on = features[u] != 0;
    switch (c.kind) {
      case CheckKind::kContains:
        if (on) middle.push_back(c.needle);
        break;
      case CheckKind::kNotContains:
        if (!on) middle.push_back(c.needle);
        break;
      case CheckKind::kStartsWith:
        if (on) first = c.needle;
        break;
      case CheckKind::kEndsWith:
        if (on) last = c.needle;
        break;
      case CheckKind::kAllCaps:
        caps = on;
        break;
      case CheckKind::kAllLowercase:
        caps = false;
        capitalize_first = !on;
        break;
      case CheckKind::kMaxWords:
      case CheckKind::kMinWords:
      case CheckKind::kWordCountExact:
        count_u = u;
        break;
      case CheckKind::kValidJsonObject:
        break;
    }
  }
  size_t required = middle.size() + 2;
  size_t target = required + 2;
  if (count_u) {
    const CheckSpec& c = *task.universe[*count_u].check;
    size_t n = size_t(c.count);
    bool on = features[*count_u] != 0;
    if (c.kind == CheckKind::kMinWords) {
      target = on ? n : n - 1;
    } else {
      target = on ? n : n + 1;
    }
  }
  if (target < required) {
    throw Error(ErrorCode::kUnsatisfiableCombination,
                "answer needs " + std::to_string(required) + " words but the count allows " +
                    std::to_string(target));
  }
  size_t filler_i = 0;
  auto filler = [&] {
    return std::string(internal::kFiller[filler_i++ % std::size(internal::kFiller)]);
  };
  std::vector<std::string> words;
  words.push_back(first ? *first : filler());
  for (std::string& m : middle) words.push_back(std::move(m));
  while (words.size() + 1 < target) words.push_back(filler());
  words.push_back(last ? *last : filler());

  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  if (caps.value_or(false)) {
    out = text::Upper(out);
  } else if (capitalize_first) {
    out[0] = text::ToUpper(out[0]);
  }
  return {out};
}

// Re-attaches each parsed criterion's check by exact text match against the
// task universe. Unknown texts stay judge-routed.
inline Rubric AttachChecks(const Rubric& parsed, const TaskSpec& task) {
  std::vector<Criterion> out = parsed.criteria();
  for (Criterion& c : out) {
    if (auto u = task.Find(c.text)) c.check = task.universe[*u].check;
  }
  return Rubric(std::move(out));
}

struct EpisodeRecord {
  std::string task_id;
  Decisions decisions;
  std::string rendered_text;
  ParseResult parse;
  RewardBreakdown reward;
  std::vector<double> decision_log_probs;
  double alignment = 0.0;  // 0 for unparseable trajectories

  std::vector<size_t> RubricIndices() const { return Indices(decisions.rubric); }
  std::vector<size_t> FeatureIndices() const { return Indices(decisions.features); }

 private:
  static std::vector<size_t> Indices(const std::vector<uint8_t>& mask) {
    std::vector<size_t> out;
    for (size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) out.push_back(i);
    }
    return out;
  }
};

// Scores fixed decisions through the full text pipeline.
inline EpisodeRecord ScoreDecisions(const ToyPolicy& policy, const TaskSpec& task,
                                    const Decisions& d, const Verifier& verifier,
                                    const RewardWeights& weights) {
  EpisodeRecord ep;
  ep.task_id = task.id;
  ep.decisions = d;
  std::vector<Criterion> self;
  for (size_t u = 0; u < task.universe.size(); ++u) {
    if (d.rubric[u]) self.push_back(task.universe[u]);
  }
  ep.rendered_text = RenderTrajectory(Rubric(std::move(self)), RenderAnswer(task, d.features));
  ep.parse = ParseTrajectory(ep.rendered_text);
  if (ep.parse.rubric) ep.parse.rubric = AttachChecks(*ep.parse.rubric, task);
  ep.reward = TotalReward(ep.parse, task.golden, verifier, weights);
  if (ep.parse.parseable) {
    ep.alignment =
        RubricAlignment(*ep.parse.rubric, task.golden, weights.w_hard, weights.w_principle);
  }
  ep.decision_log_probs = policy.DecisionLogProbs(d);
  return ep;
}

// Samples the rubric first, then the answer conditioned on it.
inline Decisions SampleDecisions(const ToyPolicy& policy, size_t task_index, Rng& rng) {
  const size_t u_size = policy.universe();
  Decisions d{task_index, std::vector<uint8_t>(u_size), std::vector<uint8_t>(u_size)};
  for (size_t u = 0; u < u_size; ++u) {
    d.rubric[u] = rng.Bernoulli(Sigmoid(policy.rubric_logit(task_index, u)));
  }
  for (size_t u = 0; u < u_size; ++u) {
    d.features[u] = rng.Bernoulli(Sigmoid(policy.FeatureLogit(u, d.rubric[u] != 0)));
  }
  return d;
}

inline EpisodeRecord SampleTrajectory(const ToyPolicy& policy, size_t task_index,
                                      const TaskSpec& task, Rng& rng,
                                      const Verifier& verifier,
                                      const RewardWeights& weights) {
  if (policy.universe() != task.universe.size() || task_index >= policy.n_tasks()) {
    throw Error(ErrorCode::kInvalidArgument, "policy is not sized to the task");
  }
  return ScoreDecisions(policy, task, SampleDecisions(policy, task_index, rng), verifier,
                        weights);
}

}  // namespace rubricrl

#endif  // RUBRICRL_SYNTHENV_HPP_
