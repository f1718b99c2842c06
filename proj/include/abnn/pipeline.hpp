// Copyright 2026 The abnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "abnn/config.hpp"
#include "abnn/dataset.hpp"
#include "abnn/report.hpp"
#include "abnn/training.hpp"

namespace abnn {

struct RunOutput {
  RunConfig resolved;
  RobustnessReport report;            // empty for train
  std::vector<EpochMetrics> metrics;  // train only
};

// Loads or generates the dataset and returns (train, test) splits.
std::pair<Dataset, Dataset> load_dataset(const DatasetConfig& cfg, DType dtype);

// Row label for a trained model: the defense name, or "standard"/"bnn"
// when it was trained without an inner attack.
std::string defense_label(const TrainConfig& train);

// Validates, logs the resolved configuration to `log`, then executes the
// command. Errors are rethrown with the failing stage prefixed. Markdown
// goes to `out` when the command has no report path.
RunOutput run_pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& log);

// run_pipeline with errors turned into a diagnostic on `log` and a nonzero
// status equal to the error code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& log);

}  // namespace abnn
