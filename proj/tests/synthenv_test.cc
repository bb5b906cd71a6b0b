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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "rubricrl/error.hpp"
#include "rubricrl/rules.hpp"
#include "rubricrl/synthenv.hpp"
#include "rubricrl/text.hpp"

namespace rubricrl {
namespace {

std::vector<uint8_t> RandomMask(Rng& rng, size_t n, double p = 0.5) {
  std::vector<uint8_t> m(n);
  for (auto& b : m) b = rng.Bernoulli(p);
  return m;
}

TEST(GenerateTasksTest, Deterministic) {
  auto a = GenerateTasks(1, 8, {});
  auto b = GenerateTasks(1, 8, {});
  auto c = GenerateTasks(2, 8, {});
  ASSERT_EQ(a.size(), 8u);
  bool any_diff = false;
  for (size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].in_golden, b[t].in_golden);
    for (size_t u = 0; u < a[t].universe.size(); ++u) {
      EXPECT_EQ(a[t].universe[u].text, b[t].universe[u].text);
      any_diff |= a[t].universe[u].text != c[t].universe[u].text;
    }
  }
  EXPECT_TRUE(any_diff);
}

TEST(GenerateTasksTest, GoldenSizeDistribution) {
  TaskGenConfig config;
  auto tasks = GenerateTasks(3, 10000, config);
  std::map<size_t, size_t> hist;
  double sum = 0;
  for (const TaskSpec& t : tasks) {
    size_t n = t.golden.n_total();
    ASSERT_GE(n, 5u);
    ASSERT_LE(n, 15u);
    for (size_t u = 0; u < config.standing_rules; ++u) ASSERT_TRUE(t.in_golden[u]);
    ++hist[n];
    sum += double(n);
  }
  auto mode = std::max_element(hist.begin(), hist.end(), [](auto& x, auto& y) {
    return x.second < y.second;
  });
  EXPECT_EQ(mode->first, 10u);
  EXPECT_NEAR(sum / 10000.0, 8.66, 0.1);
}

TEST(GenerateTasksTest, UniverseShape) {
  for (const TaskSpec& t : GenerateTasks(5, 50, {})) {
    ASSERT_EQ(t.universe_size(), 20u);
    EXPECT_NO_THROW(ValidateTask(t));
    for (size_t u = 0; u < t.universe.size(); ++u) {
      ASSERT_TRUE(t.universe[u].check);
      EXPECT_EQ(t.Find(t.universe[u].text), u);
    }
  }
}

TEST(GenerateTasksTest, RejectsBadConfig) {
  TaskGenConfig c;
  c.golden_max = 30;
  EXPECT_THROW(GenerateTasks(1, 1, c), Error);
}

TEST(RenderAnswerTest, MeetsExactlyTheSelectedCriteria) {
  Rng rng({17});
  auto tasks = GenerateTasks(9, 300, {});
  for (const TaskSpec& t : tasks) {
    for (int k = 0; k < 10; ++k) {
      std::vector<uint8_t> f = RandomMask(rng, t.universe.size(), 0.1 + 0.08 * k);
      Answer a = RenderAnswer(t, f);
      for (size_t u = 0; u < f.size(); ++u) {
        Verdict v = VerifyRule(a.text, *t.universe[u].check);
        ASSERT_EQ(v == Verdict::kMet, f[u] != 0)
            << t.universe[u].text << " | " << a.text;
      }
    }
  }
}

TEST(RenderAnswerTest, WrongMaskSize) {
  auto tasks = GenerateTasks(1, 1, {});
  EXPECT_THROW(RenderAnswer(tasks[0], {1, 0}), Error);
}

TEST(EpisodeTest, SaturatedPolicyIsSelfConsistent) {
  auto tasks = GenerateTasks(1, 3, {});
  ToyPolicy p(3, 20);
  for (double& x : p.params()) x = 40.0;
  Rng rng({1});
  Verifier v;
  EpisodeRecord ep = SampleTrajectory(p, 1, tasks[1], rng, v, RewardWeights{});
  EXPECT_TRUE(ep.parse.parseable);
  EXPECT_EQ(ep.RubricIndices().size(), 20u);
  EXPECT_EQ(ep.reward.r_self, 1.0);
  EXPECT_EQ(ep.reward.r_gold, 1.0);
  EXPECT_EQ(ep.reward.r_fmt, 0.0);
}

TEST(EpisodeTest, UniformPolicyRubricSize) {
  auto tasks = GenerateTasks(1, 1, {});
  ToyPolicy p(1, 20);
  Rng rng({2});
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    Decisions d = SampleDecisions(p, 0, rng);
    sum += double(std::count(d.rubric.begin(), d.rubric.end(), 1));
  }
  EXPECT_NEAR(sum / 10000.0, 10.0, 0.15);
}

TEST(EpisodeTest, LogProbsAndRoundTrip) {
  auto tasks = GenerateTasks(4, 5, {});
  ToyPolicy p(5, 20);
  Rng rng({8});
  for (double& x : p.params()) x = 3 * (2 * rng.Uniform() - 1);
  Verifier v;
  for (int i = 0; i < 200; ++i) {
    size_t t = rng.Below(5);
    EpisodeRecord ep = SampleTrajectory(p, t, tasks[t], rng, v, RewardWeights{});
    double sum = 0;
    for (double lp : ep.decision_log_probs) sum += lp;
    EXPECT_NEAR(sum, p.TrajectoryLogProb(ep.decisions), 1e-10);
    if (ep.RubricIndices().empty()) {
      EXPECT_EQ(ep.reward.r_self, 0.0);
      continue;
    }
    ASSERT_TRUE(ep.parse.parseable);
    EXPECT_EQ(ep.parse.rubric->n_total(), ep.RubricIndices().size());
    EXPECT_EQ(ep.parse.answer->text, RenderAnswer(tasks[t], ep.decisions.features).text);
    for (const Criterion& c : ep.parse.rubric->criteria()) EXPECT_TRUE(c.check);
  }
}

TEST(EpisodeTest, SelfRewardIsFractionOfRubricMet) {
  auto tasks = GenerateTasks(6, 1, {});
  const TaskSpec& t = tasks[0];
  ToyPolicy p(1, 20);
  Decisions d{0, std::vector<uint8_t>(20, 0), std::vector<uint8_t>(20, 0)};
  // Rubric: the three standing rules plus slot 3 (count). Meet only the rules.
  for (size_t u = 0; u < 4; ++u) d.rubric[u] = 1;
  for (size_t u = 0; u < 3; ++u) d.features[u] = 1;
  EpisodeRecord ep = ScoreDecisions(p, t, d, Verifier{}, RewardWeights{});
  double w = t.universe[3].category == Category::kHardRule ? 2.0 : 1.0;
  EXPECT_DOUBLE_EQ(ep.reward.r_self, 6.0 / (6.0 + w));
  EXPECT_EQ(ep.reward.r_fmt, 0.0);
  EXPECT_GT(ep.alignment, 0.0);
}

}  // namespace
}  // namespace rubricrl
