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

// Per-criterion verdicts and the weighted compliance score.
//
// Criteria carrying a CheckSpec are decided locally by VerifyRule. All other
// criteria of a rubric are sent to the judge together in one request:
//
//   POST <judge_endpoint>
//   {"answer": "...", "prompt": "...",
//    "criteria": [{"id": "c1", "text": "...", "category": "hard_rule"}]}
//
//   200 {"judgments": [{"id": "c1", "verdict": "met"}]}
//
// Any other status or body is a transport failure. Transport failures are
// retried; once retries are exhausted the configured fallback applies.

#ifndef RUBRICRL_VERIFIER_HPP_
#define RUBRICRL_VERIFIER_HPP_

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "rubricrl/error.hpp"
#include "rubricrl/rules.hpp"
#include "rubricrl/trajectory.hpp"

namespace rubricrl {

enum class Provenance { kRule, kJudge, kMock };

inline std::string_view ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kRule: return "rule";
    case Provenance::kJudge: return "judge";
    case Provenance::kMock: return "mock";
  }
  return "unknown";
}

struct JudgmentSet {
  std::map<std::string, Verdict> verdicts;
  std::map<std::string, Provenance> provenance;
  // Only criteria whose verdict came from a fallback carry a note.
  std::map<std::string, std::string> errors;

  void Set(const std::string& id, Verdict v, Provenance p) {
    verdicts[id] = v;
    provenance[id] = p;
  }

  void Merge(const JudgmentSet& other) {
    for (const auto& [id, v] : other.verdicts) verdicts[id] = v;
    for (const auto& [id, p] : other.provenance) provenance[id] = p;
    for (const auto& [id, e] : other.errors) errors[id] = e;
  }

  bool Covers(const Rubric& rubric) const {
    if (verdicts.size() != rubric.n_total()) return false;
    for (const Criterion& c : rubric.criteria()) {
      if (!verdicts.count(c.id)) return false;
    }
    return true;
  }
};

enum class JudgeFallback { kFailClosedNotMet, kPropagateError };

inline constexpr std::string_view kDefaultJudgePrompt =
    "You are a strict rubric verifier. For each numbered criterion decide "
    "whether the answer satisfies it. Reply with met or not_met per "
    "criterion id.\n\nAnswer:\n{answer}\n\nCriteria:\n{criteria}\n";

struct VerifierConfig {
  std::string judge_endpoint;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  std::chrono::milliseconds retry_backoff{250};
  int max_in_flight = 4;
  JudgeFallback fallback = JudgeFallback::kFailClosedNotMet;
  std::string judge_prompt_template{kDefaultJudgePrompt};

  void Validate() const {
    if (max_in_flight < 1) {
      throw Error(ErrorCode::kConfig, "max_in_flight must be >= 1");
    }
    if (timeout.count() <= 0) {
      throw Error(ErrorCode::kConfig, "timeout must be positive");
    }
    if (max_retries < 0) {
      throw Error(ErrorCode::kConfig, "max_retries must be >= 0");
    }
  }
};

struct JudgeRequest {
  std::string answer;
  std::string prompt;
  std::vector<Criterion> criteria;

  nlohmann::json ToJson() const {
    nlohmann::json items = nlohmann::json::array();
    for (const Criterion& c : criteria) {
      items.push_back({{"id", c.id},
                       {"text", c.text},
                       {"category", std::string(CategoryName(c.category))}});
    }
    return {{"answer", answer}, {"prompt", prompt}, {"criteria", items}};
  }
};

// Verdicts keyed by criterion id. An empty optional signals a transport
// failure for the whole request.
using JudgeResponse = std::optional<std::map<std::string, Verdict>>;

// In-process judge used in place of HTTP (tests, offline runs). Verdicts it
// produces are tagged with mock provenance.
using JudgeBackend = std::function<JudgeResponse(const JudgeRequest&)>;

// Returns the parsed verdicts, or nullopt when the body violates the wire
// schema.
inline JudgeResponse ParseJudgeResponse(std::string_view body) {
  auto doc = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  auto it = doc.find("judgments");
  if (it == doc.end() || !it->is_array()) return std::nullopt;
  std::map<std::string, Verdict> out;
  for (const auto& j : *it) {
    if (!j.is_object()) return std::nullopt;
    auto id = j.find("id");
    auto verdict = j.find("verdict");
    if (id == j.end() || verdict == j.end() || !id->is_string() ||
        !verdict->is_string()) {
      return std::nullopt;
    }
    auto v = ParseVerdict(verdict->get<std::string>());
    if (!v) return std::nullopt;
    out[id->get<std::string>()] = *v;
  }
  return out;
}

inline std::string RenderJudgePrompt(std::string_view tmpl,
                                     const std::string& answer,
                                     const std::vector<Criterion>& criteria) {
  std::string listing;
  for (const Criterion& c : criteria) {
    listing += "- [" + c.id + "] " + c.text + " (" +
               std::string(CategoryName(c.category)) + ")\n";
  }
  std::string out;
  for (size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 8, "{answer}") == 0) {
      out += answer;
      i += 8;
    } else if (tmpl.compare(i, 10, "{criteria}") == 0) {
      out += listing;
      i += 10;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

class Verifier {
 public:
  // RUBRIC_JUDGE_URL, when set, overrides config.judge_endpoint.
  explicit Verifier(VerifierConfig config = {})
      : config_(Validated(std::move(config))),
        state_(std::make_shared<State>(config_)) {
    if (const char* env = std::getenv("RUBRIC_JUDGE_URL"); env && *env) {
      config_.judge_endpoint = env;
    }
  }

  Verifier(VerifierConfig config, JudgeBackend backend) : Verifier(std::move(config)) {
    backend_ = std::move(backend);
  }

  const VerifierConfig& config() const { return config_; }

  // Number of judge transport attempts (HTTP requests or backend calls).
  size_t judge_attempts() const { return state_->attempts.load(); }
  // Number of logical single-pass batches sent to the judge.
  size_t judge_batches() const { return state_->batches.load(); }

  JudgmentSet VerifyWithJudge(const Answer& answer,
                              const std::vector<Criterion>& criteria) const {
    if (criteria.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty judge batch");
    }
    JudgeRequest request{answer.text,
                         RenderJudgePrompt(config_.judge_prompt_template,
                                           answer.text, criteria),
                         criteria};
    Provenance provenance = backend_ ? Provenance::kMock : Provenance::kJudge;
    state_->batches.fetch_add(1);

    JudgeResponse response;
    std::string failure = "judge endpoint not configured";
    if (backend_ || !config_.judge_endpoint.empty()) {
      for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(config_.retry_backoff * attempt);
        response = Send(request, &failure);
        if (response) break;
      }
    }

    JudgmentSet out;
    std::vector<std::string> failed;
    for (const Criterion& c : criteria) {
      if (response) {
        auto it = response->find(c.id);
        if (it != response->end()) {
          out.Set(c.id, it->second, provenance);
          continue;
        }
      }
      failed.push_back(c.id);
    }
    if (!failed.empty()) {
      std::string note = response ? "judge response omitted this criterion"
                                  : "judge unavailable: " + failure;
      if (config_.fallback == JudgeFallback::kPropagateError) {
        throw Error(ErrorCode::kJudgeUnavailable,
                    note + " (" + std::to_string(failed.size()) + " criteria)");
      }
      for (const std::string& id : failed) {
        out.Set(id, Verdict::kNotMet, provenance);
        out.errors[id] = note;
      }
    }
    return out;
  }

  // Rule-checkable criteria are decided locally; the rest go to the judge in
  // at most one batch.
  JudgmentSet VerifyRubric(const Answer& answer, const Rubric& rubric) const {
    if (rubric.empty()) throw Error(ErrorCode::kEmptyRubric, "empty rubric");
    JudgmentSet out;
    std::vector<Criterion> free_text;
    for (const Criterion& c : rubric.criteria()) {
      if (c.check) {
        out.Set(c.id, VerifyRule(answer.text, *c.check), Provenance::kRule);
      } else {
        free_text.push_back(c);
      }
    }
    if (!free_text.empty()) out.Merge(VerifyWithJudge(answer, free_text));
    return out;
  }

 private:
  static VerifierConfig Validated(VerifierConfig config) {
    config.Validate();
    return config;
  }

  struct State {
    explicit State(const VerifierConfig& c) : in_flight(c.max_in_flight) {}
    std::counting_semaphore<> in_flight;
    std::atomic<size_t> attempts{0};
    std::atomic<size_t> batches{0};
  };

  JudgeResponse Send(const JudgeRequest& request, std::string* failure) const {
    state_->in_flight.acquire();
    struct Release {
      State* s;
      ~Release() { s->in_flight.release(); }
    } release{state_.get()};
    state_->attempts.fetch_add(1);
    if (backend_) {
      JudgeResponse r = backend_(request);
      if (!r) *failure = "backend reported failure";
      return r;
    }
    return Post(request, failure);
  }

  JudgeResponse Post(const JudgeRequest& request, std::string* failure) const {
    const std::string& url = config_.judge_endpoint;
    constexpr std::string_view kScheme = "http://";
    if (url.compare(0, kScheme.size(), kScheme) != 0) {
      *failure = "unsupported judge URL '" + url + "' (http:// required)";
      return std::nullopt;
    }
    size_t path_pos = url.find('/', kScheme.size());
    std::string host_port =
        path_pos == std::string::npos ? url : url.substr(0, path_pos);
    std::string path =
        path_pos == std::string::npos ? "/" : url.substr(path_pos);

    httplib::Client client(host_port);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path, request.ToJson().dump(), "application/json");
    if (!res) {
      *failure = httplib::to_string(res.error());
      return std::nullopt;
    }
    if (res->status != 200) {
      *failure = "HTTP status " + std::to_string(res->status);
      return std::nullopt;
    }
    JudgeResponse parsed = ParseJudgeResponse(res->body);
    if (!parsed) *failure = "malformed judge response body";
    return parsed;
  }

  VerifierConfig config_;
  std::shared_ptr<State> state_;
  JudgeBackend backend_;
};

// Weighted fraction of met criteria:
//   (w_h * met_hard + w_p * met_principle) / (w_h * n_hard + w_p * n_principle)
inline double ComplianceScore(const JudgmentSet& judgments, const Rubric& rubric,
                              double w_hard, double w_principle) {
  if (!(w_hard > 0.0) || !(w_principle > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "weights must be positive");
  }
  if (rubric.empty()) throw Error(ErrorCode::kEmptyRubric, "empty rubric");
  double met_hard = 0, met_principle = 0, n_hard = 0, n_principle = 0;
  for (const Criterion& c : rubric.criteria()) {
    auto it = judgments.verdicts.find(c.id);
    if (it == judgments.verdicts.end()) {
      throw Error(ErrorCode::kMissingJudgment, "no verdict for '" + c.id + "'");
    }
    bool met = it->second == Verdict::kMet;
    if (c.category == Category::kHardRule) {
      n_hard += 1;
      met_hard += met;
    } else {
      n_principle += 1;
      met_principle += met;
    }
  }
  return (w_hard * met_hard + w_principle * met_principle) /
         (w_hard * n_hard + w_principle * n_principle);
}

}  // namespace rubricrl

#endif  // RUBRICRL_VERIFIER_HPP_
