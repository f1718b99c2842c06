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
#include <string>
#include <vector>

namespace abnn {

// One (defense, attack, gamma) cell with its full attack/evaluation
// configuration. Accuracies are stored per seed; the reported value is the
// mean.
struct ReportRow {
  std::string defense;
  std::string attack;
  double gamma = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> clean_per_seed;
  std::vector<double> robust_per_seed;
  std::size_t n_examples = 0;
  std::size_t m_eval = 0;
  std::string ensemble = "prob";
  std::size_t m_grad = 0;
  std::size_t steps = 0;
  double eta = 0.0;
  std::string step_rule;
  bool random_start = true;
  double wall_time_s = 0.0;

  double clean_accuracy() const;
  double robust_accuracy() const;
  bool operator==(const ReportRow&) const = default;
};

struct RobustnessReport {
  std::vector<ReportRow> rows;

  bool operator==(const RobustnessReport&) const = default;
};

enum class ReportFormat { kCsv, kMarkdown };

ReportFormat report_format_from_string(const std::string& name);

// Validates provenance and accuracy bounds, rejects duplicate keys and sorts
// by (defense, gamma, attack, m_grad, steps).
RobustnessReport build_report(std::vector<ReportRow> rows);

// Rows sharing every configuration field are merged by concatenating their
// per-seed values.
RobustnessReport merge_reports(const std::vector<RobustnessReport>& reports);

std::string report_to_csv(const RobustnessReport& report);
RobustnessReport report_from_csv(const std::string& text);

// Defenses as rows, a Plain column, then one column per (gamma, attack).
// Falls back to one line per row when (defense, attack, gamma) repeats.
std::string report_to_markdown(const RobustnessReport& report);

std::string defense_display_name(const std::string& defense);

void emit_report(const RobustnessReport& report, ReportFormat format,
                 const std::filesystem::path& path);
RobustnessReport read_report_csv(const std::filesystem::path& path);

// Shortest text that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace abnn
