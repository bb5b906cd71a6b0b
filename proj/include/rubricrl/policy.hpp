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


// Bernoulli-factorized toy policy over a fixed universe of U criteria.
//
// A trajectory for task t is 2U binary decisions, rubric first:
//   z_u ~ Bernoulli(sigmoid(rho[t,u]))            include criterion u
//   f_u ~ Bernoulli(sigmoid(a_u + k_u * z_u))     answer satisfies u
// Parameters live in one flat vector laid out as [rho (T*U)][a (U)][k (U)].

#ifndef RUBRICRL_POLICY_HPP_
#define RUBRICRL_POLICY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rubricrl/error.hpp"

namespace rubricrl {

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow for large |x|.
inline double LogSigmoid(double x) {
  return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x)));
}

// log P(bit | logit).
inline double BernoulliLogProb(bool bit, double logit) {
  return LogSigmoid(bit ? logit : -logit);
}

struct Decisions {
  size_t task = 0;
  std::vector<uint8_t> rubric;    // z, size U
  std::vector<uint8_t> features;  // f, size U
};

class ToyPolicy {
 public:
  ToyPolicy(size_t n_tasks, size_t universe)
      : n_tasks_(n_tasks), universe_(universe),
        params_(n_tasks * universe + 2 * universe, 0.0) {
    if (n_tasks == 0 || universe == 0) {
      throw Error(ErrorCode::kInvalidArgument, "policy needs tasks and a universe");
    }
  }

  size_t n_tasks() const { return n_tasks_; }
  size_t universe() const { return universe_; }
  size_t n_params() const { return params_.size(); }
  size_t n_decisions() const { return 2 * universe_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  size_t RubricIndex(size_t task, size_t u) const { return task * universe_ + u; }
  size_t AnswerIndex(size_t u) const { return n_tasks_ * universe_ + u; }
  size_t CouplingIndex(size_t u) const {
    return n_tasks_ * universe_ + universe_ + u;
  }
  bool IsRubricParam(size_t i) const { return i < n_tasks_ * universe_; }
  bool IsCouplingParam(size_t i) const { return i >= CouplingIndex(0); }

  double& rubric_logit(size_t task, size_t u) { return params_[RubricIndex(task, u)]; }
  double rubric_logit(size_t task, size_t u) const {
    return params_[RubricIndex(task, u)];
  }
  double& answer_logit(size_t u) { return params_[AnswerIndex(u)]; }
  double answer_logit(size_t u) const { return params_[AnswerIndex(u)]; }
  double& coupling(size_t u) { return params_[CouplingIndex(u)]; }
  double coupling(size_t u) const { return params_[CouplingIndex(u)]; }

  double FeatureLogit(size_t u, bool in_rubric) const {
    return answer_logit(u) + (in_rubric ? coupling(u) : 0.0);
  }

  // Logit of decision i (rubric decisions 0..U-1, then features).
  double DecisionLogit(const Decisions& d, size_t i) const {
    if (i < universe_) return rubric_logit(d.task, i);
    size_t u = i - universe_;
    return FeatureLogit(u, d.rubric[u] != 0);
  }

  bool DecisionBit(const Decisions& d, size_t i) const {
    return i < universe_ ? d.rubric[i] != 0 : d.features[i - universe_] != 0;
  }

  // Per-decision log-probabilities in the fixed order rubric then answer.
  std::vector<double> DecisionLogProbs(const Decisions& d) const {
    CheckShape(d);
    std::vector<double> out(n_decisions());
    for (size_t i = 0; i < out.size(); ++i) {
      out[i] = BernoulliLogProb(DecisionBit(d, i), DecisionLogit(d, i));
    }
    return out;
  }

  // Product of the 2U Bernoulli probabilities, logged once at the end.
  // Independent of DecisionLogProbs, used to cross-check it.
  double TrajectoryLogProb(const Decisions& d) const {
    CheckShape(d);
    double log_p = 0.0;
    double prod = 1.0;
    for (size_t i = 0; i < n_decisions(); ++i) {
      double p = Sigmoid(DecisionLogit(d, i));
      prod *= DecisionBit(d, i) ? p : 1.0 - p;
      if (prod < 1e-200) {
        log_p += std::log(prod);
        prod = 1.0;
      }
    }
    return log_p + std::log(prod);
  }

  // grad += weight[i] * d log P(decision i) / d theta for every decision.
  void AccumulateLogProbGradient(const Decisions& d,
                                 const std::vector<double>& weight,
                                 std::vector<double>& grad) const {
    for (size_t i = 0; i < n_decisions(); ++i) {
      if (weight[i] == 0.0) continue;
      double g = weight[i] *
                 ((DecisionBit(d, i) ? 1.0 : 0.0) - Sigmoid(DecisionLogit(d, i)));
      if (i < universe_) {
        grad[RubricIndex(d.task, i)] += g;
      } else {
        size_t u = i - universe_;
        grad[AnswerIndex(u)] += g;
        if (d.rubric[u]) grad[CouplingIndex(u)] += g;
      }
    }
  }

  void CheckShape(const Decisions& d) const {
    if (d.task >= n_tasks_ || d.rubric.size() != universe_ ||
        d.features.size() != universe_) {
      throw Error(ErrorCode::kInvalidArgument, "decisions do not fit the policy");
    }
  }

 private:
  size_t n_tasks_;
  size_t universe_;
  std::vector<double> params_;
};

}  // namespace rubricrl

#endif  // RUBRICRL_POLICY_HPP_
