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


// Group-relative advantages and the asymmetric clipped policy-gradient step.
// The objective has no KL or reference-policy term.

#ifndef RUBRICRL_OPTIMIZER_HPP_
#define RUBRICRL_OPTIMIZER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rubricrl/error.hpp"
#include "rubricrl/policy.hpp"

namespace rubricrl {

struct AdvantageSet {
  std::vector<double> advantages;
  bool degenerate = false;  // zero-variance group, excluded from updates
};

// A_i = (r_i - mean) / std with the population std. Groups whose std falls
// below std_floor are flagged degenerate and get zero advantages.
inline AdvantageSet GroupAdvantages(const std::vector<double>& rewards,
                                    double std_floor) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kGroupTooSmall, "a group needs at least 2 rewards");
  }
  double n = double(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  double sd = std::sqrt(var / n);
  AdvantageSet out;
  out.advantages.assign(rewards.size(), 0.0);
  if (!(sd >= std_floor)) {
    out.degenerate = true;
    return out;
  }
  for (size_t i = 0; i < rewards.size(); ++i) {
    out.advantages[i] = (rewards[i] - mean) / sd;
  }
  return out;
}

enum class Aggregation {
  kTokenMean,    // mean over every decision of every retained episode
  kSequenceSum,  // per-episode sum of decisions, mean over episodes
};

inline std::string_view AggregationName(Aggregation a) {
  return a == Aggregation::kTokenMean ? "token_mean" : "sequence_sum";
}

inline std::optional<Aggregation> ParseAggregation(std::string_view s) {
  if (s == "token_mean") return Aggregation::kTokenMean;
  if (s == "sequence_sum") return Aggregation::kSequenceSum;
  return std::nullopt;
}

struct OptimizerConfig {
  size_t group_size = 8;
  double learning_rate = 20.0;
  double eps_low = 0.2;
  double eps_high = 0.28;
  double std_floor = 1e-6;
  size_t steps = 200;
  size_t batch_prompts = 32;
  // Each rollout batch is consumed in batch_prompts / mini_batch_prompts
  // successive updates; later ones see ratios away from 1.
  size_t mini_batch_prompts = 16;
  Aggregation aggregation = Aggregation::kTokenMean;
  // Step multiplier for per-task rubric logits. Each of those receives signal
  // only when its task is sampled, while answer parameters are shared.
  double rubric_step_scale = 48.0;
  // Step multiplier for coupling weights, which only see episodes whose
  // rubric includes the criterion.
  double coupling_step_scale = 2.0;

  void Validate() const {
    if (group_size < 2) throw Error(ErrorCode::kConfig, "group_size must be >= 2");
    if (!(learning_rate > 0)) throw Error(ErrorCode::kConfig, "learning_rate must be > 0");
    if (!(eps_low > 0 && eps_low < 1)) throw Error(ErrorCode::kConfig, "eps_low must be in (0,1)");
    if (!(eps_high > 0)) throw Error(ErrorCode::kConfig, "eps_high must be > 0");
    if (!(std_floor > 0)) throw Error(ErrorCode::kConfig, "std_floor must be > 0");
    if (steps == 0) throw Error(ErrorCode::kConfig, "steps must be > 0");
    if (batch_prompts == 0) throw Error(ErrorCode::kConfig, "batch_prompts must be > 0");
    if (mini_batch_prompts == 0 || mini_batch_prompts > batch_prompts) {
      throw Error(ErrorCode::kConfig, "mini_batch_prompts must be in [1, batch_prompts]");
    }
    if (!(rubric_step_scale > 0) || !(coupling_step_scale > 0)) {
      throw Error(ErrorCode::kConfig, "step scales must be > 0");
    }
  }
};

struct RolloutGroup {
  std::string prompt_id;
  std::vector<Decisions> episodes;
  std::vector<double> rewards;
  // Per-decision log-probs under the rollout-time policy.
  std::vector<std::vector<double>> old_log_probs;

  void Validate() const {
    if (episodes.size() < 2) {
      throw Error(ErrorCode::kGroupTooSmall, "group '" + prompt_id + "' has < 2 episodes");
    }
    if (rewards.size() != episodes.size() || old_log_probs.size() != episodes.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "group '" + prompt_id + "' has mismatched list lengths");
    }
  }
};

struct SurrogateEval {
  double value = 0.0;
  std::vector<double> gradient;  // d value / d params
  size_t decisions = 0;
  size_t clipped = 0;
  size_t used_groups = 0;
  size_t degenerate_groups = 0;
};

// Evaluates mean min(rho*A, clip(rho, 1-eps_low, 1+eps_high)*A) and its exact
// gradient. Where the clipped branch is strictly smaller the term is constant
// in the parameters; otherwise d(rho*A) = A * rho * d log pi.
inline SurrogateEval EvaluateSurrogate(const ToyPolicy& policy,
                                       const std::vector<RolloutGroup>& groups,
                                       const OptimizerConfig& config) {
  SurrogateEval out;
  out.gradient.assign(policy.n_params(), 0.0);
  size_t retained_episodes = 0;
  std::vector<AdvantageSet> advantages;
  advantages.reserve(groups.size());
  for (const RolloutGroup& g : groups) {
    g.Validate();
    advantages.push_back(GroupAdvantages(g.rewards, config.std_floor));
    if (advantages.back().degenerate) {
      ++out.degenerate_groups;
    } else {
      ++out.used_groups;
      retained_episodes += g.episodes.size();
    }
  }
  if (out.used_groups == 0) return out;

  double denom = config.aggregation == Aggregation::kTokenMean
                     ? double(retained_episodes * policy.n_decisions())
                     : double(retained_episodes);
  double lo = 1.0 - config.eps_low;
  double hi = 1.0 + config.eps_high;
  std::vector<double> weight(policy.n_decisions());
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    if (advantages[gi].degenerate) continue;
    const RolloutGroup& g = groups[gi];
    for (size_t e = 0; e < g.episodes.size(); ++e) {
      double a = advantages[gi].advantages[e];
      std::vector<double> new_lp = policy.DecisionLogProbs(g.episodes[e]);
      if (g.old_log_probs[e].size() != new_lp.size()) {
        throw Error(ErrorCode::kInvalidArgument, "old_log_probs have the wrong length");
      }
      for (size_t i = 0; i < new_lp.size(); ++i) {
        double ratio = std::exp(new_lp[i] - g.old_log_probs[e][i]);
        double plain = ratio * a;
        double clipped = std::clamp(ratio, lo, hi) * a;
        ++out.decisions;
        if (clipped < plain) {
          ++out.clipped;
          out.value += clipped;
          weight[i] = 0.0;
        } else {
          out.value += plain;
          weight[i] = plain / denom;
        }
      }
      policy.AccumulateLogProbGradient(g.episodes[e], weight, out.gradient);
    }
  }
  out.value /= denom;
  return out;
}

struct UpdateStats {
  double surrogate = 0.0;
  double clipped_frac = 0.0;
  size_t degenerate_groups = 0;
  size_t used_groups = 0;
};

// One plain gradient-ascent step on the clipped surrogate.
inline UpdateStats ClippedPgUpdate(ToyPolicy& policy,
                                   const std::vector<RolloutGroup>& groups,
                                   const OptimizerConfig& config) {
  config.Validate();
  if (groups.empty()) throw Error(ErrorCode::kNoUsableGroups, "no groups");
  SurrogateEval eval = EvaluateSurrogate(policy, groups, config);
  if (eval.used_groups == 0) {
    throw Error(ErrorCode::kNoUsableGroups,
                "all " + std::to_string(groups.size()) + " groups are degenerate");
  }
  std::vector<double>& theta = policy.params();
  for (size_t i = 0; i < theta.size(); ++i) {
    double scale = policy.IsRubricParam(i)     ? config.rubric_step_scale
                   : policy.IsCouplingParam(i) ? config.coupling_step_scale
                                               : 1.0;
    theta[i] += config.learning_rate * scale * eval.gradient[i];
  }
  UpdateStats stats;
  stats.surrogate = eval.value;
  stats.clipped_frac = double(eval.clipped) / double(eval.decisions);
  stats.degenerate_groups = eval.degenerate_groups;
  stats.used_groups = eval.used_groups;
  return stats;
}

inline double DemoLogLikelihood(const ToyPolicy& policy,
                                const std::vector<Decisions>& demos) {
  double total = 0.0;
  for (const Decisions& d : demos) {
    for (double lp : policy.DecisionLogProbs(d)) total += lp;
  }
  return total;
}

// Maximum-likelihood fit to demonstrations by plain gradient ascent on the
// summed log-likelihood.
inline ToyPolicy WarmStart(ToyPolicy policy, const std::vector<Decisions>& demos,
                           size_t steps, double learning_rate) {
  if (demos.empty()) throw Error(ErrorCode::kInvalidArgument, "no demonstrations");
  if (!(learning_rate > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  }
  for (const Decisions& d : demos) policy.CheckShape(d);
  std::vector<double> ones(policy.n_decisions(), 1.0);
  std::vector<double> grad(policy.n_params());
  for (size_t s = 0; s < steps; ++s) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const Decisions& d : demos) policy.AccumulateLogProbGradient(d, ones, grad);
    std::vector<double>& theta = policy.params();
    for (size_t i = 0; i < theta.size(); ++i) theta[i] += learning_rate * grad[i];
  }
  return policy;
}

}  // namespace rubricrl

#endif  // RUBRICRL_OPTIMIZER_HPP_
