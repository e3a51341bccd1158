// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Solution files. Floats are rounded to 9 significant digits; complex
// arrays are stored as [re, im] pairs, matrices column by column.

#pragma once

#include <string>

#include "mfris/ao.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

double round_sig9(double x);

// JSON document holding the config, the design, the metrics and the notes.
std::string solution_to_json(const SolutionRecord& rec, const ScenarioConfig& cfg);

struct LoadedSolution {
  ScenarioConfig cfg;
  SolutionRecord rec;  // design, objective and scheme; no trace
};

// Throws ConfigError on malformed input.
LoadedSolution solution_from_json(const std::string& text);

}  // namespace mfris
