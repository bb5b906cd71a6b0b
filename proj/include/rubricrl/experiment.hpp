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


// Seeded end-to-end experiment: warm start from teacher demonstrations, then
// rollout groups, group advantages and clipped updates, with a metrics row per
// step. Output is a pure function of the config.
//
// Config file keys (all optional except where noted):
//   {"seed": 1, "tasks": 50, "universe_size": 20, "steps": 200,
//    "reward_mode": "mixed", "jobs": 1, "eval_samples": 8,
//    "golden_min": 5, "golden_max": 15, "hard_fraction": 0.6, "standing_rules": 3,
//    "weights": {"alpha", "beta", "gamma", "w_hard", "w_principle"},
//    "optimizer": {"group_size", "learning_rate", "eps_low", "eps_high",
//                  "std_floor", "batch_prompts", "mini_batch_prompts",
//                  "aggregation", "rubric_step_scale", "coupling_step_scale"},
//    "warm_start": {"demos_per_task", "steps", "learning_rate",
//                   "rubric_size", "standing_compliance", "other_compliance"}}

#ifndef RUBRICRL_EXPERIMENT_HPP_
#define RUBRICRL_EXPERIMENT_HPP_

#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rubricrl/error.hpp"
#include "rubricrl/metrics.hpp"
#include "rubricrl/optimizer.hpp"
#include "rubricrl/parallel.hpp"
#include "rubricrl/policy.hpp"
#include "rubricrl/random.hpp"
#include "rubricrl/reward.hpp"
#include "rubricrl/synthenv.hpp"
#include "rubricrl/verifier.hpp"

namespace rubricrl {

enum class RewardMode { kGoldenOnly, kSelfOnly, kMixed, kFormatOnly };

inline std::string_view RewardModeName(RewardMode m) {
  switch (m) {
    case RewardMode::kGoldenOnly: return "golden_only";
    case RewardMode::kSelfOnly: return "self_only";
    case RewardMode::kMixed: return "mixed";
    case RewardMode::kFormatOnly: return "format_only";
  }
  return "unknown";
}

inline std::optional<RewardMode> ParseRewardMode(std::string_view s) {
  for (RewardMode m : {RewardMode::kGoldenOnly, RewardMode::kSelfOnly,
                       RewardMode::kMixed, RewardMode::kFormatOnly}) {
    if (RewardModeName(m) == s) return m;
  }
  return std::nullopt;
}

// mixed uses the configured weights; the others fix alpha, beta and gamma.
inline RewardWeights ModeWeights(RewardMode mode, RewardWeights base) {
  switch (mode) {
    case RewardMode::kGoldenOnly: base.alpha = 0.8, base.beta = 0.0, base.gamma = 0.2; break;
    case RewardMode::kSelfOnly: base.alpha = 0.0, base.beta = 0.8, base.gamma = 0.2; break;
    case RewardMode::kFormatOnly: base.alpha = 0.0, base.beta = 0.0, base.gamma = 1.0; break;
    case RewardMode::kMixed: break;
  }
  return base;
}

// Teacher demonstrations: each criterion enters the rubric with probability
// rubric_size / U, and the answer satisfies standing rules with
// standing_compliance and everything else with other_compliance, ignoring the
// rubric. The warm-started policy is therefore fluent but self-inconsistent.
struct WarmStartConfig {
  size_t demos_per_task = 16;
  size_t steps = 300;
  double learning_rate = 0.01;
  double rubric_size = 10.0;
  double standing_compliance = 0.95;
  double other_compliance = 0.02;

  void Validate(size_t universe) const {
    if (demos_per_task == 0) throw Error(ErrorCode::kConfig, "demos_per_task must be > 0");
    if (!(learning_rate > 0)) throw Error(ErrorCode::kConfig, "warm_start learning_rate must be > 0");
    if (!(rubric_size >= 0 && rubric_size <= double(universe))) {
      throw Error(ErrorCode::kConfig, "rubric_size must be in [0, universe_size]");
    }
    for (double p : {standing_compliance, other_compliance}) {
      if (!(p >= 0 && p <= 1)) throw Error(ErrorCode::kConfig, "compliance must be in [0,1]");
    }
  }
};

struct ExperimentConfig {
  uint64_t seed = 1;
  size_t tasks = 50;
  TaskGenConfig generator;
  RewardMode mode = RewardMode::kMixed;
  RewardWeights weights;
  OptimizerConfig optimizer;
  WarmStartConfig warm_start;
  size_t eval_samples = 8;  // per task, for baseline and final evaluation
  int jobs = 1;

  void Validate() const {
    if (tasks == 0) throw Error(ErrorCode::kConfig, "tasks must be > 0");
    if (eval_samples == 0) throw Error(ErrorCode::kConfig, "eval_samples must be > 0");
    if (jobs < 1) throw Error(ErrorCode::kConfig, "jobs must be >= 1");
    generator.Validate();
    ModeWeights(mode, weights).Validate();
    optimizer.Validate();
    warm_start.Validate(generator.universe_size);
  }
};

namespace internal {

template <typename T>
void ReadField(const nlohmann::json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kConfig, std::string("bad value for '") + key + "'");
  }
}

inline void RejectUnknown(const nlohmann::json& obj, std::set<std::string> known,
                          const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::kConfig, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw Error(ErrorCode::kConfig, "unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace internal

inline ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j) {
  using internal::ReadField;
  internal::RejectUnknown(
      j, {"seed", "tasks", "universe_size", "steps", "reward_mode", "jobs", "eval_samples",
          "golden_min", "golden_max", "hard_fraction", "standing_rules", "weights",
          "optimizer", "warm_start"},
      "config");
  ExperimentConfig c;
  ReadField(j, "seed", c.seed);
  ReadField(j, "tasks", c.tasks);
  ReadField(j, "universe_size", c.generator.universe_size);
  ReadField(j, "steps", c.optimizer.steps);
  ReadField(j, "jobs", c.jobs);
  ReadField(j, "eval_samples", c.eval_samples);
  ReadField(j, "golden_min", c.generator.golden_min);
  ReadField(j, "golden_max", c.generator.golden_max);
  ReadField(j, "hard_fraction", c.generator.hard_fraction);
  ReadField(j, "standing_rules", c.generator.standing_rules);
  if (auto it = j.find("reward_mode"); it != j.end()) {
    auto mode = it->is_string() ? ParseRewardMode(it->get<std::string>()) : std::nullopt;
    if (!mode) throw Error(ErrorCode::kConfig, "reward_mode must be one of golden_only, self_only, mixed, format_only");
    c.mode = *mode;
  }
  if (auto it = j.find("weights"); it != j.end()) {
    internal::RejectUnknown(*it, {"alpha", "beta", "gamma", "w_hard", "w_principle"}, "weights");
    ReadField(*it, "alpha", c.weights.alpha);
    ReadField(*it, "beta", c.weights.beta);
    ReadField(*it, "gamma", c.weights.gamma);
    ReadField(*it, "w_hard", c.weights.w_hard);
    ReadField(*it, "w_principle", c.weights.w_principle);
  }
  if (auto it = j.find("optimizer"); it != j.end()) {
    internal::RejectUnknown(*it,
                            {"group_size", "learning_rate", "eps_low", "eps_high",
                             "std_floor", "batch_prompts", "mini_batch_prompts",
                             "aggregation", "rubric_step_scale", "coupling_step_scale"},
                            "optimizer");
    OptimizerConfig& o = c.optimizer;
    ReadField(*it, "group_size", o.group_size);
    ReadField(*it, "learning_rate", o.learning_rate);
    ReadField(*it, "eps_low", o.eps_low);
    ReadField(*it, "eps_high", o.eps_high);
    ReadField(*it, "std_floor", o.std_floor);
    ReadField(*it, "batch_prompts", o.batch_prompts);
    ReadField(*it, "mini_batch_prompts", o.mini_batch_prompts);
    ReadField(*it, "rubric_step_scale", o.rubric_step_scale);
    ReadField(*it, "coupling_step_scale", o.coupling_step_scale);
    if (auto a = it->find("aggregation"); a != it->end()) {
      auto agg = a->is_string() ? ParseAggregation(a->get<std::string>()) : std::nullopt;
      if (!agg) throw Error(ErrorCode::kConfig, "aggregation must be token_mean or sequence_sum");
      o.aggregation = *agg;
    }
  }
  if (auto it = j.find("warm_start"); it != j.end()) {
    internal::RejectUnknown(*it,
                            {"demos_per_task", "steps", "learning_rate", "rubric_size",
                             "standing_compliance", "other_compliance"},
                            "warm_start");
    WarmStartConfig& w = c.warm_start;
    ReadField(*it, "demos_per_task", w.demos_per_task);
    ReadField(*it, "steps", w.steps);
    ReadField(*it, "learning_rate", w.learning_rate);
    ReadField(*it, "rubric_size", w.rubric_size);
    ReadField(*it, "standing_compliance", w.standing_compliance);
    ReadField(*it, "other_compliance", w.other_compliance);
  }
  c.Validate();
  return c;
}

struct StepMetrics {
  size_t step = 0;
  double mean_r_gold = 0.0;
  double mean_r_self = 0.0;
  double mean_r_fmt = 0.0;
  double mean_total = 0.0;
  double self_consistency = 0.0;
  double rubric_alignment = 0.0;
  double mean_rubric_size = 0.0;
  double clipped_frac = 0.0;
  size_t degenerate_groups = 0;
};

struct MetricsTrace {
  std::vector<StepMetrics> rows;
  ExperimentReport report;

  static constexpr std::string_view kCsvHeader =
      "step,mean_r_gold,mean_r_self,mean_r_fmt,mean_total,self_consistency,"
      "rubric_alignment,mean_rubric_size,clipped_frac,degenerate_groups";

  std::string ToCsv() const {
    std::string out(kCsvHeader);
    out.push_back('\n');
    char buf[320];
    for (const StepMetrics& r : rows) {
      std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.6f,%.6f,%zu\n",
                    r.step, r.mean_r_gold, r.mean_r_self, r.mean_r_fmt, r.mean_total,
                    r.self_consistency, r.rubric_alignment, r.mean_rubric_size,
                    r.clipped_frac, r.degenerate_groups);
      out += buf;
    }
    return out;
  }
};

namespace internal {

enum Phase : uint64_t { kDemo = 1, kBatch = 2, kRollout = 3, kEval = 4 };

inline std::vector<Decisions> TeacherDemos(const ExperimentConfig& c) {
  const size_t u_size = c.generator.universe_size;
  const double include_p = c.warm_start.rubric_size / double(u_size);
  std::vector<Decisions> demos;
  for (size_t t = 0; t < c.tasks; ++t) {
    for (size_t k = 0; k < c.warm_start.demos_per_task; ++k) {
      Rng rng({c.seed, kDemo, t, k});
      Decisions d{t, std::vector<uint8_t>(u_size), std::vector<uint8_t>(u_size)};
      for (size_t u = 0; u < u_size; ++u) d.rubric[u] = rng.Bernoulli(include_p);
      for (size_t u = 0; u < u_size; ++u) {
        double p = u < c.generator.standing_rules ? c.warm_start.standing_compliance
                                                  : c.warm_start.other_compliance;
        d.features[u] = rng.Bernoulli(p);
      }
      demos.push_back(std::move(d));
    }
  }
  return demos;
}

struct EvalResult {
  EvalSnapshot snapshot;
  std::vector<size_t> rubric_sizes;
};

inline EvalResult Evaluate(const ExperimentConfig& c, const ToyPolicy& policy,
                           const std::vector<TaskSpec>& tasks, const Verifier& verifier,
                           const RewardWeights& weights, uint64_t tag) {
  std::vector<std::vector<EpisodeRecord>> per_task(tasks.size());
  ParallelFor(tasks.size(), c.jobs, [&](size_t t) {
    Rng rng({c.seed, kEval, tag, t});
    for (size_t k = 0; k < c.eval_samples; ++k) {
      per_task[t].push_back(SampleTrajectory(policy, t, tasks[t], rng, verifier, weights));
    }
  });
  EvalResult out;
  double n = 0;
  for (const auto& eps : per_task) {
    for (const EpisodeRecord& ep : eps) {
      n += 1;
      out.snapshot.self_consistency += ep.reward.r_self;
      out.snapshot.rubric_alignment += ep.alignment;
      out.snapshot.mean_rubric_size += double(ep.reward.n_criteria);
      out.snapshot.mean_r_gold += ep.reward.r_gold;
      out.snapshot.mean_r_fmt += ep.reward.r_fmt;
      out.snapshot.parse_rate += ep.parse.parseable ? 1.0 : 0.0;
      out.rubric_sizes.push_back(ep.reward.n_criteria);
    }
  }
  EvalSnapshot& s = out.snapshot;
  for (double* v : {&s.self_consistency, &s.rubric_alignment, &s.mean_rubric_size,
                    &s.mean_r_gold, &s.mean_r_fmt, &s.parse_rate}) {
    *v /= n;
  }
  return out;
}

}  // namespace internal

// The policy after warm start; exposed for tests.
inline ToyPolicy WarmStartedPolicy(const ExperimentConfig& c) {
  ToyPolicy policy(c.tasks, c.generator.universe_size);
  return WarmStart(std::move(policy), internal::TeacherDemos(c), c.warm_start.steps,
                   c.warm_start.learning_rate);
}

// If final_policy is given it receives the trained policy.
inline MetricsTrace RunExperiment(const ExperimentConfig& c,
                                  ToyPolicy* final_policy = nullptr) {
  c.Validate();
  const RewardWeights weights = ModeWeights(c.mode, c.weights);
  const OptimizerConfig& opt = c.optimizer;
  const std::vector<TaskSpec> tasks = GenerateTasks(c.seed, c.tasks, c.generator);
  const Verifier verifier;  // every synthetic criterion is rule-checked
  ToyPolicy policy = WarmStartedPolicy(c);

  MetricsTrace trace;
  trace.report.mode = std::string(RewardModeName(c.mode));
  std::vector<Rubric> goldens;
  for (const TaskSpec& t : tasks) goldens.push_back(t.golden);
  trace.report.golden_counts = CriterionCountStats(goldens);
  trace.report.baseline = internal::Evaluate(c, policy, tasks, verifier, weights, 0).snapshot;

  std::vector<size_t> order(tasks.size());
  const size_t batch = std::min(opt.batch_prompts, tasks.size());
  for (size_t step = 1; step <= opt.steps; ++step) {
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng batch_rng({c.seed, internal::kBatch, step});
    batch_rng.Shuffle(order);

    std::vector<RolloutGroup> groups(batch);
    std::vector<std::vector<EpisodeRecord>> episodes(batch);
    ParallelFor(batch, c.jobs, [&](size_t b) {
      size_t t = order[b];
      Rng rng({c.seed, internal::kRollout, step, t});
      RolloutGroup& g = groups[b];
      g.prompt_id = tasks[t].id;
      for (size_t k = 0; k < opt.group_size; ++k) {
        EpisodeRecord ep = SampleTrajectory(policy, t, tasks[t], rng, verifier, weights);
        g.episodes.push_back(ep.decisions);
        g.rewards.push_back(ep.reward.total);
        g.old_log_probs.push_back(ep.decision_log_probs);
        episodes[b].push_back(std::move(ep));
      }
    });

    StepMetrics row;
    row.step = step;
    double n = 0;
    for (const auto& eps : episodes) {
      for (const EpisodeRecord& ep : eps) {
        n += 1;
        row.mean_r_gold += ep.reward.r_gold;
        row.mean_r_self += ep.reward.r_self;
        row.mean_r_fmt += ep.reward.r_fmt;
        row.mean_total += ep.reward.total;
        row.rubric_alignment += ep.alignment;
        row.mean_rubric_size += double(ep.reward.n_criteria);
      }
    }
    for (double* v : {&row.mean_r_gold, &row.mean_r_self, &row.mean_r_fmt, &row.mean_total,
                      &row.rubric_alignment, &row.mean_rubric_size}) {
      *v /= n;
    }
    row.self_consistency = row.mean_r_self;

    size_t updates = 0;
    for (size_t begin = 0; begin < groups.size(); begin += opt.mini_batch_prompts) {
      size_t end = std::min(groups.size(), begin + opt.mini_batch_prompts);
      std::vector<RolloutGroup> mini(groups.begin() + long(begin), groups.begin() + long(end));
      try {
        UpdateStats stats = ClippedPgUpdate(policy, mini, opt);
        row.clipped_frac += stats.clipped_frac;
        row.degenerate_groups += stats.degenerate_groups;
        ++updates;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoUsableGroups) throw;
        row.degenerate_groups += mini.size();
      }
    }
    if (updates > 0) row.clipped_frac /= double(updates);
    trace.rows.push_back(row);
  }

  internal::EvalResult final_eval = internal::Evaluate(c, policy, tasks, verifier, weights, 1);
  trace.report.final = final_eval.snapshot;
  trace.report.final_self_counts = CriterionCountStats(final_eval.rubric_sizes);
  if (final_policy) *final_policy = std::move(policy);
  return trace;
}

}  // namespace rubricrl

#endif  // RUBRICRL_EXPERIMENT_HPP_
