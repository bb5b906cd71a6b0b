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


// Command-line front end. RunCli is the whole program minus main(), so tests
// can drive it with captured streams.
//
//   rubricrl [--jobs N] [--judge-url URL] score    --prompts P --trajectories T --out O
//   rubricrl [--jobs N]                   simulate --config C --out CSV [--report JSON]
//   rubricrl                              stats    --prompts P [--trajectories T]
//
// Exit codes: 0 success, 2 per-record errors (score only; output still
// written), 1 fatal or usage errors.

#ifndef RUBRICRL_CLI_HPP_
#define RUBRICRL_CLI_HPP_

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rubricrl/dataset.hpp"
#include "rubricrl/error.hpp"
#include "rubricrl/experiment.hpp"
#include "rubricrl/metrics.hpp"
#include "rubricrl/reward.hpp"
#include "rubricrl/trajectory.hpp"
#include "rubricrl/verifier.hpp"

namespace rubricrl {

namespace internal {

inline nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::json::parse(ss.str(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::kConfig, "'" + path + "' is not valid JSON");
  return j;
}

// Scoring config: {"weights": {...}, "verifier": {"judge_endpoint",
// "timeout_ms", "max_retries", "retry_backoff_ms", "max_in_flight",
// "fallback": "fail_closed" | "propagate_error", "judge_prompt_template"}}
inline void ApplyScoreConfig(const nlohmann::json& j, RewardWeights& w, VerifierConfig& v) {
  RejectUnknown(j, {"weights", "verifier"}, "config");
  if (auto it = j.find("weights"); it != j.end()) {
    RejectUnknown(*it, {"alpha", "beta", "gamma", "w_hard", "w_principle"}, "weights");
    ReadField(*it, "alpha", w.alpha);
    ReadField(*it, "beta", w.beta);
    ReadField(*it, "gamma", w.gamma);
    ReadField(*it, "w_hard", w.w_hard);
    ReadField(*it, "w_principle", w.w_principle);
  }
  if (auto it = j.find("verifier"); it != j.end()) {
    RejectUnknown(*it,
                  {"judge_endpoint", "timeout_ms", "max_retries", "retry_backoff_ms",
                   "max_in_flight", "fallback", "judge_prompt_template"},
                  "verifier");
    ReadField(*it, "judge_endpoint", v.judge_endpoint);
    ReadField(*it, "max_retries", v.max_retries);
    ReadField(*it, "max_in_flight", v.max_in_flight);
    ReadField(*it, "judge_prompt_template", v.judge_prompt_template);
    int64_t ms = -1;
    ReadField(*it, "timeout_ms", ms);
    if (ms >= 0) v.timeout = std::chrono::milliseconds(ms);
    ms = -1;
    ReadField(*it, "retry_backoff_ms", ms);
    if (ms >= 0) v.retry_backoff = std::chrono::milliseconds(ms);
    std::string fallback;
    ReadField(*it, "fallback", fallback);
    if (fallback == "propagate_error") {
      v.fallback = JudgeFallback::kPropagateError;
    } else if (fallback == "fail_closed" || fallback.empty()) {
      v.fallback = JudgeFallback::kFailClosedNotMet;
    } else {
      throw Error(ErrorCode::kConfig, "fallback must be fail_closed or propagate_error");
    }
  }
}

inline void ReportSkipped(const std::string& path, const std::vector<LineReport>& skipped,
                          std::ostream& err) {
  for (const LineReport& r : skipped) {
    err << path << ":" << r.line << ": skipped: " << r.message << "\n";
  }
}

}  // namespace internal

inline int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rubric-conditioned reward scoring and seeded experiments", "rubricrl"};
  app.require_subcommand(1);
  int jobs = 1;
  std::string judge_url;
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--judge-url", judge_url,
                 "Judge endpoint for free-text criteria (RUBRIC_JUDGE_URL overrides)");

  auto* score = app.add_subcommand("score", "Score trajectories against golden rubrics");
  std::string prompts_path, trajectories_path, out_path, config_path;
  std::optional<double> alpha, beta, gamma, w_hard, w_principle;
  score->add_option("--prompts", prompts_path, "Prompt JSONL")->required();
  score->add_option("--trajectories", trajectories_path, "Trajectory JSONL")->required();
  score->add_option("--out", out_path, "Score JSONL output")->required();
  score->add_option("--config", config_path, "Scoring config JSON");
  score->add_option("--alpha", alpha, "Golden reward weight");
  score->add_option("--beta", beta, "Self reward weight");
  score->add_option("--gamma", gamma, "Format reward weight");
  score->add_option("--w-hard", w_hard, "Hard rule weight");
  score->add_option("--w-principle", w_principle, "Principle weight");

  auto* simulate = app.add_subcommand("simulate", "Run a seeded synthetic experiment");
  std::string sim_config, sim_mode, sim_out, sim_report;
  simulate->add_option("--config", sim_config, "Experiment config JSON")->required();
  simulate->add_option("--mode", sim_mode,
                       "golden_only | self_only | mixed | format_only");
  simulate->add_option("--out", sim_out, "Metrics CSV output")->required();
  simulate->add_option("--report", sim_report, "Report JSON output");

  auto* stats = app.add_subcommand("stats", "Criterion-count statistics");
  std::string stats_prompts, stats_trajectories;
  stats->add_option("--prompts", stats_prompts, "Prompt JSONL")->required();
  stats->add_option("--trajectories", stats_trajectories, "Trajectory JSONL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    if (*score) {
      RewardWeights weights;
      VerifierConfig vconfig;
      if (!config_path.empty()) {
        internal::ApplyScoreConfig(internal::ReadJsonFile(config_path), weights, vconfig);
      }
      if (alpha) weights.alpha = *alpha;
      if (beta) weights.beta = *beta;
      if (gamma) weights.gamma = *gamma;
      if (w_hard) weights.w_hard = *w_hard;
      if (w_principle) weights.w_principle = *w_principle;
      weights.Validate();
      if (!judge_url.empty()) vconfig.judge_endpoint = judge_url;
      Verifier verifier(vconfig);

      auto prompts = LoadPrompts(prompts_path);
      auto trajectories = LoadTrajectories(trajectories_path);
      internal::ReportSkipped(prompts_path, prompts.skipped, err);
      internal::ReportSkipped(trajectories_path, trajectories.skipped, err);

      std::vector<ScoreEntry> entries =
          ScoreBatch(prompts.records, trajectories.records, verifier, weights, jobs);
      WriteFileAtomic(out_path, ScoresToJsonl(entries));

      size_t ok = 0, failed_parse = 0, errors = 0;
      double total = 0.0, n_sum = 0.0;
      for (const ScoreEntry& e : entries) {
        if (!e.ok()) {
          ++errors;
          err << "record '" << e.id << "': " << e.error << "\n";
          continue;
        }
        ++ok;
        total += e.breakdown->total;
        n_sum += double(e.breakdown->n_criteria);
        if (!e.breakdown->parseable) ++failed_parse;
      }
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "scored=%zu errors=%zu skipped_lines=%zu mean_total=%.4f "
                    "parse_failure_rate=%.4f mean_n=%.4f\n",
                    ok, errors, prompts.skipped.size() + trajectories.skipped.size(),
                    ok ? total / double(ok) : 0.0,
                    ok ? double(failed_parse) / double(ok) : 0.0,
                    ok ? n_sum / double(ok) : 0.0);
      out << buf;
      bool partial = errors > 0 || !prompts.skipped.empty() || !trajectories.skipped.empty();
      return partial ? 2 : 0;
    }

    if (*simulate) {
      nlohmann::json j = internal::ReadJsonFile(sim_config);
      if (!sim_mode.empty()) {
        if (!ParseRewardMode(sim_mode)) {
          err << "invalid --mode '" << sim_mode << "'\n" << simulate->help();
          return 1;
        }
        if (j.is_object()) j["reward_mode"] = sim_mode;
      }
      ExperimentConfig config = ExperimentConfigFromJson(j);
      if (app.get_option("--jobs")->count() > 0) config.jobs = jobs;
      MetricsTrace trace = RunExperiment(config);
      WriteFileAtomic(sim_out, trace.ToCsv());
      if (!sim_report.empty()) {
        WriteFileAtomic(sim_report, trace.report.ToJson().dump(2) + "\n");
      }
      out << trace.report.ToTable();
      return 0;
    }

    if (*stats) {
      auto prompts = LoadPrompts(stats_prompts);
      internal::ReportSkipped(stats_prompts, prompts.skipped, err);
      std::vector<Rubric> goldens;
      for (const PromptRecord& p : prompts.records) goldens.push_back(p.golden);
      out << FormatCountStats("golden", CriterionCountStats(goldens));
      if (!stats_trajectories.empty()) {
        auto trajectories = LoadTrajectories(stats_trajectories);
        internal::ReportSkipped(stats_trajectories, trajectories.skipped, err);
        std::vector<Rubric> self;
        size_t unparseable = 0;
        for (const TrajectoryRecord& t : trajectories.records) {
          ParseResult parse = ParseTrajectory(t.raw_text);
          if (parse.parseable) {
            self.push_back(*parse.rubric);
          } else {
            ++unparseable;
          }
        }
        if (self.empty()) {
          err << "no parseable trajectories\n";
          return 1;
        }
        out << FormatCountStats("self", CriterionCountStats(self));
        out << "unparseable trajectories: " << unparseable << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace rubricrl

#endif  // RUBRICRL_CLI_HPP_
