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

#ifndef RUBRICRL_ERROR_HPP_
#define RUBRICRL_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rubricrl {

enum class ErrorCode {
  kInvalidArgument,
  kEmptyRubric,
  kMissingJudgment,
  kJudgeUnavailable,
  kGroupTooSmall,
  kNoUsableGroups,
  kUnsatisfiableCombination,
  kConfig,
  kIo,
  kDuplicateId,
  kEmptyFile,
  kEmptyInput,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyRubric: return "EmptyRubric";
    case ErrorCode::kMissingJudgment: return "MissingJudgment";
    case ErrorCode::kJudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::kGroupTooSmall: return "GroupTooSmall";
    case ErrorCode::kNoUsableGroups: return "NoUsableGroups";
    case ErrorCode::kUnsatisfiableCombination: return "UnsatisfiableCombination";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kEmptyInput: return "EmptyInput";
  }
  return "Unknown";
}

// All library failures are reported through this exception type; callers
// branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rubricrl

#endif  // RUBRICRL_ERROR_HPP_
