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


// Umbrella header.

#ifndef RUBRICRL_RUBRICRL_HPP_
#define RUBRICRL_RUBRICRL_HPP_

#include "rubricrl/dataset.hpp"
#include "rubricrl/error.hpp"
#include "rubricrl/experiment.hpp"
#include "rubricrl/metrics.hpp"
#include "rubricrl/optimizer.hpp"
#include "rubricrl/policy.hpp"
#include "rubricrl/random.hpp"
#include "rubricrl/records.hpp"
#include "rubricrl/reward.hpp"
#include "rubricrl/rules.hpp"
#include "rubricrl/synthenv.hpp"
#include "rubricrl/text.hpp"
#include "rubricrl/trajectory.hpp"
#include "rubricrl/verifier.hpp"

#endif  // RUBRICRL_RUBRICRL_HPP_
