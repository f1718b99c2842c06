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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "abnn/attacks.hpp"
#include "abnn/dataset.hpp"
#include "abnn/model.hpp"
#include "abnn/training.hpp"

namespace abnn {

enum class Command { kTrain, kAttack, kEval, kReport, kSweep };

const char* to_string(Command command);
Command command_from_string(const std::string& name);

struct DatasetConfig {
  std::string source = "synthetic";  // "synthetic" or "idx"
  SyntheticSpec synthetic;
  std::string idx_images;
  std::string idx_labels;
  double test_fraction = 0.3;
  // Generation and split seed, independent of the run seed so that
  // several training seeds share one train/test split.
  std::uint64_t seed = 0;

  bool operator==(const DatasetConfig&) const = default;
};

struct AttackGrid {
  std::vector<AttackKind> kinds{AttackKind::kNaive, AttackKind::kAveraged};
  std::vector<double> gammas{0.035, 0.07};
  // gamma, seed and threads of the base are ignored.
  AttackConfig base;

  bool operator==(const AttackGrid&) const = default;
};

struct EvalConfig {
  std::size_t m_eval = 40;
  EnsembleMode ensemble = EnsembleMode::kProbabilities;
  // Leading test examples evaluated; 0 means the whole test split.
  std::size_t n_examples = 1000;

  bool operator==(const EvalConfig&) const = default;
};

struct SweepConfig {
  std::string param = "m_grad";  // "m_grad" or "steps"
  std::vector<std::size_t> values{1, 5, 10};

  bool operator==(const SweepConfig&) const = default;
};

struct PathsConfig {
  std::string checkpoint;
  std::string report_csv;
  std::string report_md;
  std::string metrics_csv;
  std::string adversarial_csv;
  std::vector<std::string> inputs;  // report CSVs merged by `report`

  bool operator==(const PathsConfig&) const = default;
};

struct ReportConfig {
  // Defense label for evaluated rows; empty means derived from the
  // checkpoint's training provenance.
  std::string label;
  // Wall time is written as 0 unless enabled, keeping reports
  // byte-reproducible.
  bool timing = false;

  bool operator==(const ReportConfig&) const = default;
};

struct RunConfig {
  Command command = Command::kEval;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  DatasetConfig dataset;
  // input_dim and classes of 0 are taken from the dataset; stochastic
  // unset is taken from train.defense.
  ModelSpec model{0, {32}, 0, false, 1.0, 0.05, DType::kFloat32};
  std::optional<bool> stochastic;
  TrainConfig train = default_train_config(DefenseKind::kAdvBnnNaive);
  AttackGrid attack;
  EvalConfig eval;
  SweepConfig sweep;
  PathsConfig paths;
  ReportConfig report;

  bool operator==(const RunConfig&) const = default;
};

// Semantic checks for the selected command, including that every path the
// command reads exists and every path it writes has an existing parent.
void validate_config(const RunConfig& cfg);

// Canonical document: JSON with sorted keys and two-space indentation.
// Parsing rejects unknown keys; missing keys keep their defaults.
std::string config_to_text(const RunConfig& cfg);
RunConfig config_from_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

struct ConfigKey {
  std::string name;           // dotted, e.g. "attack.m_grad"
  std::string kind;           // "int", "number", "bool", "string", "list"
  std::string default_value;  // as accepted by config_set
  std::string help;
};

// Every settable leaf of RunConfig.
const std::vector<ConfigKey>& config_keys();

// Sets one leaf from its text form; lists are comma-separated.
void config_set(RunConfig& cfg, const std::string& key, const std::string& value);
std::string config_get(const RunConfig& cfg, const std::string& key);

std::string model_spec_to_text(const ModelSpec& spec);
ModelSpec model_spec_from_text(const std::string& text);

}  // namespace abnn
