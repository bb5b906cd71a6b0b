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

// JSONL ingestion and output.
//
// Prompt lines:
//   {"id": "p1", "instruction": "...",
//    "golden": [{"text": "...", "category": "hard_rule", "check": "max_words:30"}]}
// "check" is optional; criteria without it are routed to the judge.
//
// Trajectory lines:
//   {"id": "t1", "prompt_id": "p1", "raw_text": "<rubric>...</answer>"}
//
// Score lines:
//   {"id", "prompt_id", "r_gold", "r_self", "r_fmt", "total", "parseable",
//    "n_criteria", "notes": [...]}   or   {"id", "prompt_id", "error"}

#ifndef RUBRICRL_DATASET_HPP_
#define RUBRICRL_DATASET_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rubricrl/error.hpp"
#include "rubricrl/records.hpp"
#include "rubricrl/reward.hpp"
#include "rubricrl/text.hpp"

namespace rubricrl {

struct LineReport {
  size_t line = 0;  // 1-based
  std::string message;
};

template <typename Record>
struct LoadResult {
  std::vector<Record> records;
  std::vector<LineReport> skipped;
};

namespace internal {

inline std::string RequireString(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

inline Criterion CriterionFromJson(const nlohmann::json& j, size_t index) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "criterion is not an object");
  }
  Criterion c;
  c.id = "g" + std::to_string(index + 1);
  c.text = RequireString(j, "text");
  auto category = ParseCategoryName(RequireString(j, "category"));
  if (!category) {
    throw Error(ErrorCode::kInvalidArgument,
                "category must be hard_rule or principle");
  }
  c.category = *category;
  if (auto it = j.find("check"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw Error(ErrorCode::kInvalidArgument, "check must be a string");
    }
    c.check = ParseCheckSpec(it->get<std::string>());
  }
  return c;
}

inline PromptRecord PromptFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "not an object");
  PromptRecord p;
  p.id = RequireString(j, "id");
  if (auto it = j.find("instruction"); it != j.end() && it->is_string()) {
    p.instruction = it->get<std::string>();
  }
  auto golden = j.find("golden");
  if (golden == j.end() || !golden->is_array() || golden->empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "'golden' must be a non-empty array");
  }
  std::vector<Criterion> criteria;
  for (size_t i = 0; i < golden->size(); ++i) {
    criteria.push_back(CriterionFromJson((*golden)[i], i));
  }
  p.golden = Rubric(std::move(criteria));
  return p;
}

inline TrajectoryRecord TrajectoryFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "not an object");
  return {RequireString(j, "id"), RequireString(j, "prompt_id"),
          RequireString(j, "raw_text")};
}

// Reads JSONL, skipping malformed lines with a report. Duplicate ids are
// fatal.
template <typename Record, typename FromJson>
LoadResult<Record> LoadJsonl(const std::filesystem::path& path,
                             FromJson from_json) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }
  LoadResult<Record> out;
  std::map<std::string, size_t> first_line;
  std::string line;
  size_t line_no = 0;
  size_t non_blank = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::IsBlank(line)) continue;
    ++non_blank;
    Record record;
    try {
      auto j = nlohmann::json::parse(line);
      record = from_json(j);
    } catch (const std::exception& e) {
      out.skipped.push_back({line_no, e.what()});
      continue;
    }
    auto [it, inserted] = first_line.emplace(record.id, line_no);
    if (!inserted) {
      throw Error(ErrorCode::kDuplicateId,
                  "id '" + record.id + "' on lines " +
                      std::to_string(it->second) + " and " +
                      std::to_string(line_no) + " of " + path.string());
    }
    out.records.push_back(std::move(record));
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "read error on '" + path.string() + "'");
  if (non_blank == 0) {
    throw Error(ErrorCode::kEmptyFile, "'" + path.string() + "' has no records");
  }
  return out;
}

}  // namespace internal

inline LoadResult<PromptRecord> LoadPrompts(const std::filesystem::path& path) {
  return internal::LoadJsonl<PromptRecord>(path, internal::PromptFromJson);
}

inline LoadResult<TrajectoryRecord> LoadTrajectories(
    const std::filesystem::path& path) {
  return internal::LoadJsonl<TrajectoryRecord>(path,
                                                internal::TrajectoryFromJson);
}

inline nlohmann::json ScoreEntryToJson(const ScoreEntry& e) {
  nlohmann::json j = {{"id", e.id}, {"prompt_id", e.prompt_id}};
  if (!e.ok()) {
    j["error"] = e.error;
    return j;
  }
  const RewardBreakdown& b = *e.breakdown;
  j["r_gold"] = b.r_gold;
  j["r_self"] = b.r_self;
  j["r_fmt"] = b.r_fmt;
  j["total"] = b.total;
  j["parseable"] = b.parseable;
  j["n_criteria"] = b.n_criteria;
  j["notes"] = b.notes;
  return j;
}

// Writes through a sibling temp file and renames it into place, so readers
// never observe a partial file.
inline void WriteFileAtomic(const std::filesystem::path& path,
                            const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into '" + path.string() + "'");
  }
}

inline std::string ScoresToJsonl(const std::vector<ScoreEntry>& entries) {
  std::string out;
  for (const ScoreEntry& e : entries) out += ScoreEntryToJson(e).dump() + "\n";
  return out;
}

}  // namespace rubricrl

#endif  // RUBRICRL_DATASET_HPP_
