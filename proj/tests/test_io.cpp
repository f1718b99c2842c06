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

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <sstream>

#include "abnn/checkpoint.hpp"
#include "abnn/config.hpp"
#include "abnn/error.hpp"
#include "abnn/pipeline.hpp"
#include "abnn/report.hpp"
#include "test_support.hpp"

namespace abnn {
namespace {

using namespace abnn::testing;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ReportRow row(std::string defense, std::string attack, double gamma, double robust) {
  ReportRow r;
  r.defense = std::move(defense);
  r.attack = std::move(attack);
  r.gamma = gamma;
  r.seeds = {1};
  r.clean_per_seed = {0.9};
  r.robust_per_seed = {robust};
  r.n_examples = 300;
  r.m_eval = 40;
  r.m_grad = r.attack == "naive" ? 1 : 10;
  r.steps = 150;
  r.eta = 2.5 * gamma / 150;
  r.step_rule = "sign";
  return r;
}

std::vector<ReportRow> table_rows() {
  std::vector<ReportRow> rows;
  const char* defenses[] = {"adv_bnn_apgd", "adv_training", "adv_bnn_naive"};
  double v = 0.8;
  for (const char* d : defenses) {
    for (double g : {0.07, 0.035}) {
      for (const char* a : {"apgd", "naive"}) rows.push_back(row(d, a, g, v -= 0.01));
    }
  }
  return rows;
}

TEST(Report, RejectsEmptyAndIncompleteRows) {
  EXPECT_THROW(build_report({}), Error);
  auto r = row("adv_training", "naive", 0.035, 0.5);
  r.seeds.clear();
  EXPECT_EQ(code_of([&] { build_report({r}); }), ErrorCode::kMissingProvenance);
  r = row("adv_training", "naive", 0.035, 0.5);
  r.m_eval = 0;
  EXPECT_EQ(code_of([&] { build_report({r}); }), ErrorCode::kMissingProvenance);
  r = row("", "naive", 0.035, 0.5);
  EXPECT_EQ(code_of([&] { build_report({r}); }), ErrorCode::kMissingProvenance);
  r = row("adv_training", "naive", 0.035, 1.5);
  EXPECT_EQ(code_of([&] { build_report({r}); }), ErrorCode::kInvalidArgument);
  r = row("adv_training", "naive", 0.035, 0.5);
  r.clean_per_seed.push_back(0.1);
  EXPECT_EQ(code_of([&] { build_report({r}); }), ErrorCode::kMissingProvenance);
}

TEST(Report, RejectsDuplicateKeys) {
  auto r = row("adv_training", "naive", 0.035, 0.5);
  EXPECT_THROW(build_report({r, r}), Error);
}

TEST(Report, SortsByDefenseGammaAttack) {
  auto report = build_report(table_rows());
  ASSERT_EQ(report.rows.size(), 12u);
  EXPECT_EQ(report.rows[0].defense, "adv_training");
  EXPECT_EQ(report.rows[0].gamma, 0.035);
  EXPECT_EQ(report.rows[0].attack, "naive");
  EXPECT_EQ(report.rows[1].attack, "apgd");
  EXPECT_EQ(report.rows[2].gamma, 0.07);
  EXPECT_EQ(report.rows[4].defense, "adv_bnn_naive");
  EXPECT_EQ(report.rows[11].defense, "adv_bnn_apgd");
}

TEST(Report, CsvRoundTripIsExact) {
  auto rows = table_rows();
  rows[0].seeds = {3, 4, 5};
  rows[0].clean_per_seed = {0.1, 1.0 / 3.0, 0.7};
  rows[0].robust_per_seed = {0.05, 0.2, std::nextafter(0.3, 1.0)};
  rows[1].wall_time_s = 12.75;
  rows[2].random_start = false;
  auto report = build_report(rows);
  const std::string csv = report_to_csv(report);
  EXPECT_EQ(report_from_csv(csv), report);
  EXPECT_EQ(report_to_csv(report_from_csv(csv)), csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "defense,attack,gamma,clean_accuracy,robust_accuracy,n_examples,m_eval,ensemble,m_grad,"
            "steps,eta,step_rule,random_start,seeds,clean_per_seed,robust_per_seed,wall_time_s");
}

TEST(Report, CsvParserIsStrict) {
  const std::string csv = report_to_csv(build_report({row("adv_training", "naive", 0.035, 0.5)}));
  EXPECT_THROW(report_from_csv(csv.substr(0, csv.size() - 5)), Error);
  EXPECT_THROW(report_from_csv("defense,attack\nx,y\n"), Error);
  EXPECT_THROW(parse_double("0.5x"), Error);
  EXPECT_EQ(parse_double(format_double(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(Report, MarkdownHasTableShape) {
  const std::string md = report_to_markdown(build_report(table_rows()));
  std::vector<std::string> lines;
  std::istringstream in(md);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] == '|') lines.push_back(line);
  }
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "| Defense | Plain | γ=0.035 Naive PGD | γ=0.035 A-PGD | γ=0.07 Naive PGD | γ=0.07 A-PGD |");
  EXPECT_EQ(lines[2].rfind("| Adv. Training |", 0), 0u);
  EXPECT_EQ(lines[3].rfind("| Adv-BNN |", 0), 0u);
  EXPECT_EQ(lines[4].rfind("| Adv-BNN w/ A-PGD |", 0), 0u);
  EXPECT_EQ(lines[2], "| Adv. Training | 90.0 % | 72.0 % | 73.0 % | 74.0 % | 75.0 % |");
}

TEST(Report, MarkdownShowsPerSeedValuesAndGaps) {
  auto r = row("adv_bnn_apgd", "apgd", 0.07, 0.3);
  r.seeds = {1, 2, 3};
  r.clean_per_seed = {0.9, 0.9, 0.9};
  r.robust_per_seed = {0.2, 0.3, 0.4};
  const std::string md = report_to_markdown(build_report({r, row("adv_training", "naive", 0.07, 0.5)}));
  EXPECT_NE(md.find("30.0 % (20.0, 30.0, 40.0)"), std::string::npos) << md;
  EXPECT_NE(md.find("| - |"), std::string::npos) << md;
}

TEST(Report, MergeConcatenatesSeeds) {
  auto a = row("adv_bnn_naive", "apgd", 0.07, 0.2);
  auto b = a;
  b.seeds = {2};
  b.robust_per_seed = {0.4};
  b.wall_time_s = 1.5;
  auto other = row("adv_bnn_naive", "naive", 0.07, 0.5);
  auto merged = merge_reports({build_report({a, other}), build_report({b})});
  ASSERT_EQ(merged.rows.size(), 2u);
  const auto& m = merged.rows[1];
  EXPECT_EQ(m.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_DOUBLE_EQ(m.robust_accuracy(), 0.3);
  EXPECT_DOUBLE_EQ(m.wall_time_s, 1.5);
  b.steps = 300;
  EXPECT_EQ(merge_reports({build_report({a}), build_report({b})}).rows.size(), 2u);
  b.steps = 150;
  EXPECT_THROW(merge_reports({build_report({a}), build_report({a})}), Error);
}

TEST(Report, EmitWritesFiles) {
  TempDir dir;
  auto report = build_report(table_rows());
  emit_report(report, ReportFormat::kCsv, dir / "r.csv");
  emit_report(report, ReportFormat::kMarkdown, dir / "r.md");
  EXPECT_EQ(read_report_csv(dir / "r.csv"), report);
  EXPECT_EQ(slurp(dir / "r.md"), report_to_markdown(report));
  EXPECT_EQ(code_of([&] { emit_report(report, ReportFormat::kCsv, dir / "no" / "such" / "r.csv"); }),
            ErrorCode::kIo);
}

StochasticModel checkpoint_model(bool stochastic, DType dtype) {
  Rng rng(5);
  return StochasticModel::initialize(small_spec(4, {3, 2}, 3, stochastic, dtype), rng);
}

TEST(Checkpoint, RoundTripPreservesBits) {
  for (bool stochastic : {false, true}) {
    for (DType dtype : {DType::kFloat32, DType::kFloat64}) {
      auto model = checkpoint_model(stochastic, dtype);
      const std::string bytes = serialize_checkpoint(model, "{\"seed\": 3}");
      Checkpoint back = deserialize_checkpoint(bytes);
      EXPECT_EQ(back.provenance, "{\"seed\": 3}");
      EXPECT_EQ(back.model.spec(), model.spec());
      auto a = model.parameters(), b = back.model.parameters();
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(b[i].dtype(), dtype);
        EXPECT_TRUE(a[i].bit_equal(b[i]));
      }
      EXPECT_EQ(serialize_checkpoint(back.model, back.provenance), bytes);
    }
  }
}

TEST(Checkpoint, HeaderIsLittleEndian) {
  const std::string bytes = serialize_checkpoint(checkpoint_model(true, DType::kFloat32), "");
  EXPECT_EQ(bytes.substr(0, 4), "ABNN");
  EXPECT_EQ(bytes.substr(4, 4), std::string("\x01\x00\x00\x00", 4));
}

TEST(Checkpoint, CorruptionIsReported) {
  const std::string bytes = serialize_checkpoint(checkpoint_model(true, DType::kFloat64), "prov");
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(code_of([&] { deserialize_checkpoint(bad); }), ErrorCode::kBadMagic);
  bad = bytes;
  bad[4] = 9;
  EXPECT_EQ(code_of([&] { deserialize_checkpoint(bad); }), ErrorCode::kUnsupportedVersion);
  for (std::size_t cut : {std::size_t{2}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_EQ(code_of([&] { deserialize_checkpoint(bytes.substr(0, cut)); }), ErrorCode::kTruncated) << cut;
  }
  EXPECT_EQ(code_of([&] { deserialize_checkpoint(""); }), ErrorCode::kTruncated);
  EXPECT_EQ(code_of([&] { deserialize_checkpoint(bytes + "x"); }), ErrorCode::kModelMismatch);
}

TEST(Checkpoint, FileRoundTrip) {
  TempDir dir;
  auto model = checkpoint_model(true, DType::kFloat32);
  save_checkpoint(model, "p", dir / "m.abnn");
  auto back = load_checkpoint(dir / "m.abnn");
  EXPECT_TRUE(model.parameters()[0].bit_equal(back.model.parameters()[0]));
  EXPECT_EQ(code_of([&] { load_checkpoint(dir / "missing.abnn"); }), ErrorCode::kIo);
}

TEST(Config, TextRoundTripIsIdentity) {
  RunConfig cfg;
  cfg.seed = 12;
  cfg.stochastic = true;
  cfg.model.hidden = {7, 5};
  cfg.attack.gammas = {0.01, 0.02, 0.03};
  cfg.attack.kinds = {AttackKind::kAveraged};
  cfg.paths.inputs = {"a.csv", "b.csv"};
  cfg.train.inner_attack.step_rule = StepRule::kRaw;
  const std::string text = config_to_text(cfg);
  EXPECT_EQ(config_from_text(text), cfg);
  EXPECT_EQ(config_to_text(config_from_text(text)), text);
  EXPECT_EQ(config_from_text(config_to_text(RunConfig{})), RunConfig{});
}

TEST(Config, OverlayKeepsDefaultsAndRejectsUnknownKeys) {
  RunConfig cfg = config_from_text(R"({"eval": {"m_eval": 7}})");
  EXPECT_EQ(cfg.eval.m_eval, 7u);
  EXPECT_EQ(cfg.attack.base.steps, RunConfig{}.attack.base.steps);
  EXPECT_EQ(code_of([] { config_from_text(R"({"eval": {"m_evl": 7}})"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { config_from_text(R"({"eval": {"m_eval": "x"}})"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { config_from_text("{"); }), ErrorCode::kConfig);
}

TEST(Config, SetAndGetByDottedKey) {
  RunConfig cfg;
  config_set(cfg, "attack.gammas", "0.01,0.05");
  config_set(cfg, "model.hidden", "8,4");
  config_set(cfg, "seed", "99");
  config_set(cfg, "train.defense", "adv_bnn_apgd");
  config_set(cfg, "attack.random_start", "false");
  EXPECT_EQ(cfg.attack.gammas, (std::vector<double>{0.01, 0.05}));
  EXPECT_EQ(cfg.model.hidden, (std::vector<std::size_t>{8, 4}));
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.train.defense, DefenseKind::kAdvBnnApgd);
  EXPECT_FALSE(cfg.attack.base.random_start);
  EXPECT_EQ(config_get(cfg, "seed"), "99");
  config_set(cfg, "seed", "none");
  EXPECT_FALSE(cfg.seed.has_value());
  EXPECT_EQ(code_of([&] { config_set(cfg, "no.such.key", "1"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([&] { config_set(cfg, "eval.m_eval", "-3"); }), ErrorCode::kConfig);
}

TEST(Config, EveryKeyIsSettableFromItsDefault) {
  for (const auto& key : config_keys()) {
    RunConfig cfg;
    EXPECT_NO_THROW(config_set(cfg, key.name, key.default_value)) << key.name;
    EXPECT_EQ(cfg, RunConfig{}) << key.name;
    EXPECT_FALSE(key.help.empty()) << key.name;
  }
}

TEST(Config, SeedRequiredForTrainAndEval) {
  TempDir dir;
  RunConfig cfg;
  cfg.command = Command::kTrain;
  cfg.paths.checkpoint = (dir / "m.abnn").string();
  EXPECT_EQ(code_of([&] { validate_config(cfg); }), ErrorCode::kConfig);
  cfg.seed = 1;
  EXPECT_NO_THROW(validate_config(cfg));
}

TEST(Config, MissingCheckpointFailsBeforeCompute) {
  RunConfig cfg;
  cfg.command = Command::kEval;
  cfg.seed = 1;
  cfg.paths.checkpoint = "/nonexistent/model.abnn";
  std::ostringstream out, log;
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(run(cfg, out, log), static_cast<int>(ErrorCode::kIo));
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(1));
  EXPECT_NE(log.str().find("does not exist"), std::string::npos) << log.str();
  EXPECT_EQ(log.str().find("resolved config"), std::string::npos);
}

TEST(Config, ModelSpecRoundTrip) {
  ModelSpec spec = small_spec(9, {4, 3}, 5, true, DType::kFloat32);
  EXPECT_EQ(model_spec_from_text(model_spec_to_text(spec)), spec);
  EXPECT_EQ(code_of([] { model_spec_from_text("[]"); }), ErrorCode::kModelMismatch);
}

// A few seconds of end-to-end work on a tiny synthetic problem.
RunConfig tiny_config(const TempDir& dir, Command command) {
  RunConfig cfg;
  cfg.command = command;
  cfg.seed = 5;
  cfg.dataset.synthetic.per_class = 40;
  cfg.model.hidden = {6};
  cfg.model.init_sigma_ratio = 0.5;
  cfg.train.epochs = 2;
  cfg.train.batch_size = 16;
  cfg.train.inner_attack.steps = 3;
  cfg.train.inner_attack.m_grad = 2;
  cfg.attack.base.steps = 5;
  cfg.attack.base.m_grad = 3;
  cfg.eval.m_eval = 4;
  cfg.eval.n_examples = 16;
  cfg.paths.checkpoint = (dir / "m.abnn").string();
  return cfg;
}

TEST(Pipeline, TrainEvalReportIsByteIdentical) {
  std::string reports[2];
  for (auto& text : reports) {
    TempDir dir;
    std::ostringstream out, log;
    RunConfig train = tiny_config(dir, Command::kTrain);
    train.paths.metrics_csv = (dir / "metrics.csv").string();
    run_pipeline(train, out, log);
    EXPECT_NE(log.str().find("resolved config:"), std::string::npos);
    EXPECT_EQ(slurp(dir / "metrics.csv").substr(0, 45), "epoch,train_loss,clean_accuracy,robust_accura");
    RunConfig eval = tiny_config(dir, Command::kEval);
    eval.paths.report_csv = (dir / "r.csv").string();
    auto result = run_pipeline(eval, out, log);
    EXPECT_EQ(result.report.rows.size(), 4u);
    RunConfig report = tiny_config(dir, Command::kReport);
    report.paths.inputs = {(dir / "r.csv").string()};
    report.paths.report_md = (dir / "r.md").string();
    run_pipeline(report, out, log);
    text = slurp(dir / "r.csv") + slurp(dir / "r.md");
  }
  EXPECT_FALSE(reports[0].empty());
  EXPECT_EQ(reports[0], reports[1]);
}

TEST(Pipeline, CheckpointCarriesProvenance) {
  TempDir dir;
  std::ostringstream out, log;
  auto resolved = run_pipeline(tiny_config(dir, Command::kTrain), out, log).resolved;
  auto ckpt = load_checkpoint(dir / "m.abnn");
  EXPECT_EQ(ckpt.provenance, config_to_text(resolved));
  EXPECT_EQ(resolved.model.input_dim, 20u);
  EXPECT_EQ(resolved.model.classes, 2u);
  EXPECT_EQ(ckpt.model.spec().input_dim, 20u);
}

TEST(Pipeline, SweepEmitsOneRowPerValue) {
  TempDir dir;
  std::ostringstream out, log;
  run_pipeline(tiny_config(dir, Command::kTrain), out, log);
  RunConfig sweep = tiny_config(dir, Command::kSweep);
  sweep.attack.gammas = {0.07};
  auto report = run_pipeline(sweep, out, log).report;
  ASSERT_EQ(report.rows.size(), 6u);
  std::size_t apgd = 0;
  for (const auto& r : report.rows) {
    if (r.attack == "apgd") {
      EXPECT_EQ(r.m_grad, (std::vector<std::size_t>{1, 5, 10})[apgd++]);
    }
  }
  EXPECT_EQ(apgd, 3u);
  EXPECT_NE(out.str().find("| Defense |"), std::string::npos);
}

TEST(Pipeline, AttackWritesAdversarialCsv) {
  TempDir dir;
  std::ostringstream out, log;
  run_pipeline(tiny_config(dir, Command::kTrain), out, log);
  RunConfig attack = tiny_config(dir, Command::kAttack);
  attack.attack.kinds = {AttackKind::kNaive};
  attack.attack.gammas = {0.035};
  attack.paths.adversarial_csv = (dir / "adv.csv").string();
  run_pipeline(attack, out, log);
  const std::string csv = slurp(dir / "adv.csv");
  EXPECT_EQ(csv.rfind("attack,gamma,index,label,success,x0,", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 17);
}

TEST(Pipeline, EvalRejectsMismatchedModel) {
  TempDir dir;
  std::ostringstream out, log;
  run_pipeline(tiny_config(dir, Command::kTrain), out, log);
  RunConfig eval = tiny_config(dir, Command::kEval);
  eval.dataset.synthetic.dim = 7;
  EXPECT_EQ(run(eval, out, log), static_cast<int>(ErrorCode::kModelMismatch));
}

TEST(Pipeline, DatasetSplitHonoursFraction) {
  DatasetConfig cfg;
  cfg.synthetic.per_class = 50;
  cfg.test_fraction = 0.2;
  auto [train, test] = load_dataset(cfg, DType::kFloat32);
  EXPECT_EQ(train.size(), 80u);
  EXPECT_EQ(test.size(), 20u);
}

TEST(Pipeline, DefenseLabels) {
  TrainConfig cfg = default_train_config(DefenseKind::kAdvBnnNaive);
  EXPECT_EQ(defense_label(cfg), "adv_bnn_naive");
  cfg.inner_attack.gamma = 0;
  EXPECT_EQ(defense_label(cfg), "bnn");
  cfg = default_train_config(DefenseKind::kAdvTraining);
  cfg.inner_attack.gamma = 0;
  EXPECT_EQ(defense_label(cfg), "standard");
}

}  // namespace
}  // namespace abnn
