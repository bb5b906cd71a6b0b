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

#ifndef RUBRICRL_RECORDS_HPP_
#define RUBRICRL_RECORDS_HPP_

#include <string>

#include "rubricrl/trajectory.hpp"

namespace rubricrl {

// An instruction paired with its golden rubric.
struct PromptRecord {
  std::string id;
  std::string instruction;
  Rubric golden;
};

// One raw model output awaiting scoring.
struct TrajectoryRecord {
  std::string id;
  std::string prompt_id;
  std::string raw_text;
};

}  // namespace rubricrl

#endif  // RUBRICRL_RECORDS_HPP_
