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

#include "abnn/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "abnn/error.hpp"

namespace abnn {

namespace {

const char* const kCsvHeader =
    "defense,attack,gamma,clean_accuracy,robust_accuracy,n_examples,m_eval,"
    "ensemble,m_grad,steps,eta,step_rule,random_start,seeds,clean_per_seed,"
    "robust_per_seed,wall_time_s";
constexpr std::size_t kCsvColumns = 17;

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

int defense_rank(const std::string& defense) {
  static const std::vector<std::string> order{"adv_training", "adv_bnn_naive",
                                              "adv_bnn_apgd"};
  auto it = std::find(order.begin(), order.end(), defense);
  return it == order.end() ? static_cast<int>(order.size())
                           : static_cast<int>(it - order.begin());
}

int attack_rank(const std::string& attack) {
  if (attack == "naive") return 0;
  if (attack == "apgd") return 1;
  return 2;
}

auto sort_key(const ReportRow& r) {
  return std::make_tuple(defense_rank(r.defense), r.defense, r.gamma,
                         attack_rank(r.attack), r.attack, r.m_grad, r.steps);
}

// Everything except the per-seed values and timing.
auto config_key(const ReportRow& r) {
  return std::make_tuple(r.defense, r.attack, r.gamma, r.n_examples, r.m_eval,
                         r.ensemble, r.m_grad, r.steps, r.eta, r.step_rule,
                         r.random_start);
}

void check_label(const std::string& value, const char* field) {
  if (value.empty()) {
    fail(ErrorCode::kMissingProvenance, std::string("report row is missing ") + field);
  }
  if (value.find_first_of(",;|\n\r") != std::string::npos) {
    fail(ErrorCode::kInvalidArgument,
         std::string("report field ") + field + " contains a reserved character");
  }
}

void validate_row(const ReportRow& r) {
  check_label(r.defense, "defense");
  check_label(r.attack, "attack");
  check_label(r.step_rule, "step_rule");
  check_label(r.ensemble, "ensemble");
  if (r.seeds.empty()) fail(ErrorCode::kMissingProvenance, "report row has no seeds");
  if (r.clean_per_seed.size() != r.seeds.size() ||
      r.robust_per_seed.size() != r.seeds.size()) {
    fail(ErrorCode::kMissingProvenance,
         "report row for " + r.defense + "/" + r.attack +
             " needs one clean and one robust value per seed");
  }
  if (r.n_examples == 0) fail(ErrorCode::kMissingProvenance, "report row has n_examples = 0");
  if (r.m_eval == 0) fail(ErrorCode::kMissingProvenance, "report row has m_eval = 0");
  if (r.m_grad == 0) fail(ErrorCode::kMissingProvenance, "report row has m_grad = 0");
  if (!std::isfinite(r.gamma) || r.gamma < 0) {
    fail(ErrorCode::kInvalidArgument, "report row has an invalid gamma");
  }
  if (!std::isfinite(r.eta) || r.eta < 0) {
    fail(ErrorCode::kMissingProvenance, "report row has an invalid eta");
  }
  for (const auto* values : {&r.clean_per_seed, &r.robust_per_seed}) {
    for (double v : *values) {
      if (!(v >= 0.0 && v <= 1.0)) {
        fail(ErrorCode::kInvalidArgument, "report accuracy outside [0, 1]");
      }
    }
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t parse_size(const std::string& text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::kInvalidArgument, "cannot parse integer '" + text + "'");
  }
  return value;
}

template <class T, class Parse>
std::string join(const std::vector<T>& values, Parse fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += fmt(values[i]);
  }
  return out;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
  return buf;
}

std::string accuracy_cell(const std::vector<double>& per_seed) {
  std::string cell = percent(mean_of(per_seed)) + " %";
  if (per_seed.size() > 1) {
    cell += " (";
    for (std::size_t i = 0; i < per_seed.size(); ++i) {
      if (i) cell += ", ";
      cell += percent(per_seed[i]);
    }
    cell += ")";
  }
  return cell;
}

}  // namespace

double ReportRow::clean_accuracy() const { return mean_of(clean_per_seed); }
double ReportRow::robust_accuracy() const { return mean_of(robust_per_seed); }

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) fail(ErrorCode::kInvalidArgument, "cannot format double");
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::kInvalidArgument, "cannot parse number '" + text + "'");
  }
  return value;
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  fail(ErrorCode::kInvalidArgument, "unknown report format '" + name + "'");
}

RobustnessReport build_report(std::vector<ReportRow> rows) {
  if (rows.empty()) fail(ErrorCode::kInvalidArgument, "cannot build an empty report");
  for (const auto& r : rows) validate_row(r);
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return sort_key(a) < sort_key(b);
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (sort_key(rows[i]) == sort_key(rows[i - 1])) {
      fail(ErrorCode::kInvalidArgument,
           "duplicate report row for " + rows[i].defense + "/" + rows[i].attack +
               " at gamma " + format_double(rows[i].gamma));
    }
  }
  return RobustnessReport{std::move(rows)};
}

RobustnessReport merge_reports(const std::vector<RobustnessReport>& reports) {
  std::vector<ReportRow> merged;
  for (const auto& report : reports) {
    for (const auto& row : report.rows) {
      auto it = std::find_if(merged.begin(), merged.end(), [&](const ReportRow& m) {
        return config_key(m) == config_key(row);
      });
      if (it == merged.end()) {
        merged.push_back(row);
        continue;
      }
      for (auto seed : row.seeds) {
        if (std::find(it->seeds.begin(), it->seeds.end(), seed) != it->seeds.end()) {
          fail(ErrorCode::kInvalidArgument, "merge_reports: seed " + std::to_string(seed) +
                                                " appears twice for " + row.defense + "/" +
                                                row.attack + " at gamma " + format_double(row.gamma));
        }
      }
      it->seeds.insert(it->seeds.end(), row.seeds.begin(), row.seeds.end());
      it->clean_per_seed.insert(it->clean_per_seed.end(), row.clean_per_seed.begin(),
                                row.clean_per_seed.end());
      it->robust_per_seed.insert(it->robust_per_seed.end(), row.robust_per_seed.begin(),
                                 row.robust_per_seed.end());
      it->wall_time_s += row.wall_time_s;
    }
  }
  return build_report(std::move(merged));
}

std::string report_to_csv(const RobustnessReport& report) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  auto u64 = [](std::uint64_t v) { return std::to_string(v); };
  for (const auto& r : report.rows) {
    os << r.defense << ',' << r.attack << ',' << format_double(r.gamma) << ','
       << format_double(r.clean_accuracy()) << ',' << format_double(r.robust_accuracy())
       << ',' << r.n_examples << ',' << r.m_eval << ',' << r.ensemble << ',' << r.m_grad
       << ',' << r.steps << ',' << format_double(r.eta) << ',' << r.step_rule << ','
       << (r.random_start ? "true" : "false") << ',' << join(r.seeds, u64) << ','
       << join(r.clean_per_seed, format_double) << ','
       << join(r.robust_per_seed, format_double) << ',' << format_double(r.wall_time_s)
       << '\n';
  }
  return os.str();
}

RobustnessReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    fail(ErrorCode::kInvalidArgument, "report CSV has an unexpected header");
  }
  std::vector<ReportRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != kCsvColumns) {
      fail(ErrorCode::kInvalidArgument, "report CSV line " + std::to_string(line_no) +
                                            " has " + std::to_string(f.size()) +
                                            " fields, expected " +
                                            std::to_string(kCsvColumns));
    }
    ReportRow r;
    r.defense = f[0];
    r.attack = f[1];
    r.gamma = parse_double(f[2]);
    r.n_examples = parse_size(f[5]);
    r.m_eval = parse_size(f[6]);
    r.ensemble = f[7];
    r.m_grad = parse_size(f[8]);
    r.steps = parse_size(f[9]);
    r.eta = parse_double(f[10]);
    r.step_rule = f[11];
    if (f[12] != "true" && f[12] != "false") {
      fail(ErrorCode::kInvalidArgument, "report CSV: random_start must be true or false");
    }
    r.random_start = f[12] == "true";
    for (const auto& s : split(f[13], ';')) r.seeds.push_back(parse_size(s));
    for (const auto& s : split(f[14], ';')) r.clean_per_seed.push_back(parse_double(s));
    for (const auto& s : split(f[15], ';')) r.robust_per_seed.push_back(parse_double(s));
    r.wall_time_s = parse_double(f[16]);
    rows.push_back(std::move(r));
  }
  return build_report(std::move(rows));
}

std::string defense_display_name(const std::string& defense) {
  if (defense == "adv_training") return "Adv. Training";
  if (defense == "adv_bnn_naive") return "Adv-BNN";
  if (defense == "adv_bnn_apgd") return "Adv-BNN w/ A-PGD";
  if (defense == "standard") return "Standard training";
  if (defense == "bnn") return "BNN (no adversarial training)";
  return defense;
}

std::string report_to_markdown(const RobustnessReport& report) {
  if (report.rows.empty()) fail(ErrorCode::kInvalidArgument, "cannot render an empty report");
  std::set<std::tuple<std::string, std::string, double>> cells;
  bool unique = true;
  for (const auto& r : report.rows) {
    unique = unique && cells.emplace(r.defense, r.attack, r.gamma).second;
  }
  std::ostringstream os;
  if (!unique) {
    os << "| Defense | Attack | γ | m_grad | steps | η | Plain | Robust |\n"
       << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : report.rows) {
      os << "| " << defense_display_name(r.defense) << " | "
         << (r.attack == "apgd" ? "A-PGD" : r.attack == "naive" ? "Naive PGD" : r.attack)
         << " | " << format_double(r.gamma) << " | " << r.m_grad << " | " << r.steps
         << " | " << format_double(r.eta) << " | " << accuracy_cell(r.clean_per_seed)
         << " | " << accuracy_cell(r.robust_per_seed) << " |\n";
    }
    return os.str();
  }

  std::vector<double> gammas;
  std::vector<std::string> defenses;
  for (const auto& r : report.rows) {
    if (std::find(gammas.begin(), gammas.end(), r.gamma) == gammas.end()) {
      gammas.push_back(r.gamma);
    }
    if (std::find(defenses.begin(), defenses.end(), r.defense) == defenses.end()) {
      defenses.push_back(r.defense);
    }
  }
  std::sort(gammas.begin(), gammas.end());
  const std::vector<std::pair<std::string, std::string>> attacks{{"naive", "Naive PGD"},
                                                                 {"apgd", "A-PGD"}};
  os << "| Defense | Plain |";
  for (double g : gammas) {
    for (const auto& a : attacks) os << " γ=" << format_double(g) << " " << a.second << " |";
  }
  os << "\n|---|---|";
  for (std::size_t i = 0; i < gammas.size() * attacks.size(); ++i) os << "---|";
  os << '\n';
  for (const auto& defense : defenses) {
    const ReportRow* first = nullptr;
    for (const auto& r : report.rows) {
      if (r.defense == defense) {
        first = &r;
        break;
      }
    }
    os << "| " << defense_display_name(defense) << " | "
       << accuracy_cell(first->clean_per_seed) << " |";
    for (double g : gammas) {
      for (const auto& a : attacks) {
        auto it = std::find_if(report.rows.begin(), report.rows.end(), [&](const ReportRow& r) {
          return r.defense == defense && r.attack == a.first && r.gamma == g;
        });
        os << ' ' << (it == report.rows.end() ? std::string("-") : accuracy_cell(it->robust_per_seed))
           << " |";
      }
    }
    os << '\n';
  }
  return os.str();
}

void emit_report(const RobustnessReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  if (report.rows.empty()) fail(ErrorCode::kInvalidArgument, "refusing to emit an empty report");
  const std::string text =
      format == ReportFormat::kCsv ? report_to_csv(report) : report_to_markdown(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write report '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write failed for report '" + path.string() + "'");
}

RobustnessReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open report '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return report_from_csv(buf.str());
}

}  // namespace abnn
