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

#include "abnn/pipeline.hpp"

#include <bit>
#include <chrono>
#include <fstream>

#include "abnn/checkpoint.hpp"
#include "abnn/error.hpp"
#include "abnn/eval.hpp"

namespace abnn {

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + ": " + e.what());
  }
}

std::ofstream open_output(const std::string& path, const char* what) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, std::string("cannot write ") + what + " '" + path + "'");
  return out;
}

void emit_outputs(const RobustnessReport& report, const PathsConfig& paths, std::ostream& out) {
  if (!paths.report_csv.empty()) emit_report(report, ReportFormat::kCsv, paths.report_csv);
  if (!paths.report_md.empty()) emit_report(report, ReportFormat::kMarkdown, paths.report_md);
  if (paths.report_csv.empty() && paths.report_md.empty()) out << report_to_markdown(report);
}

struct EvalContext {
  StochasticModel model;
  Dataset data;
  std::string label;
  std::uint64_t seed = 0;
  EnsembleEval eval;
  double clean = 0.0;
};

std::string label_from_provenance(const Checkpoint& ckpt, const RunConfig& cfg) {
  if (!cfg.report.label.empty()) return cfg.report.label;
  try {
    return defense_label(config_from_text(ckpt.provenance).train);
  } catch (const Error&) {
    fail(ErrorCode::kMissingProvenance,
         "checkpoint provenance is not a run config; set report.label");
  }
}

EvalContext prepare_eval(const RunConfig& cfg) {
  EvalContext ctx;
  Checkpoint ckpt = stage("load checkpoint", [&] { return load_checkpoint(cfg.paths.checkpoint); });
  ctx.label = stage("load checkpoint", [&] { return label_from_provenance(ckpt, cfg); });
  ctx.model = std::move(ckpt.model);
  ctx.data = stage("load dataset", [&] {
    Dataset test = load_dataset(cfg.dataset, ctx.model.spec().dtype).second;
    if (test.dim() != ctx.model.spec().input_dim) {
      fail(ErrorCode::kModelMismatch,
           "dataset dimension " + std::to_string(test.dim()) + " does not match model input " +
               std::to_string(ctx.model.spec().input_dim));
    }
    return cfg.eval.n_examples > 0 ? test.head(cfg.eval.n_examples) : test;
  });
  ctx.seed = cfg.seed.value_or(0);
  ctx.eval = EnsembleEval{cfg.eval.m_eval, derive_seed(ctx.seed, {stream::kEval}),
                          cfg.eval.ensemble, cfg.threads};
  ctx.clean = stage("clean accuracy", [&] { return clean_accuracy(ctx.model, ctx.data, ctx.eval); });
  return ctx;
}

AttackConfig attack_for(const RunConfig& cfg, const EvalContext& ctx, AttackKind kind,
                        double gamma) {
  AttackConfig a = cfg.attack.base;
  a.gamma = gamma;
  a.seed = derive_seed(ctx.seed, {stream::kAttack, static_cast<std::uint64_t>(kind),
                                  std::bit_cast<std::uint64_t>(gamma)});
  a.threads = cfg.threads;
  return a;
}

ReportRow make_row(const RunConfig& cfg, const EvalContext& ctx, AttackKind kind,
                   const AttackConfig& a, double robust, double seconds) {
  ReportRow row;
  row.defense = ctx.label;
  row.attack = to_string(kind);
  row.gamma = a.gamma;
  row.seeds = {ctx.seed};
  row.clean_per_seed = {ctx.clean};
  row.robust_per_seed = {robust};
  row.n_examples = ctx.data.size();
  row.m_eval = ctx.eval.m_eval;
  row.ensemble = to_string(ctx.eval.mode);
  row.m_grad = kind == AttackKind::kAveraged ? a.m_grad : 1;
  row.steps = a.steps;
  row.eta = a.resolved_eta();
  row.step_rule = to_string(a.step_rule);
  row.random_start = a.random_start;
  row.wall_time_s = cfg.report.timing ? seconds : 0.0;
  return row;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_adversarial(std::ostream& os, AttackKind kind, double gamma, const Dataset& data,
                       const AttackResult& result) {
  const std::size_t d = data.dim();
  const auto values = result.adversarial.to_vector();
  for (std::size_t i = 0; i < data.size(); ++i) {
    os << to_string(kind) << ',' << format_double(gamma) << ',' << i << ',' << data.labels[i]
       << ',' << static_cast<int>(result.success[i]);
    for (std::size_t j = 0; j < d; ++j) os << ',' << format_double(values[i * d + j]);
    os << '\n';
  }
}

RunOutput run_train(RunOutput output, std::ostream& log) {
  const RunConfig& cfg = output.resolved;
  auto [train, test] = stage("load dataset", [&] { return load_dataset(cfg.dataset, cfg.model.dtype); });
  TrainConfig tc = cfg.train;
  tc.seed = *cfg.seed;
  tc.threads = cfg.threads;
  Rng init = make_rng(*cfg.seed, {stream::kInit});
  StochasticModel model = stage("initialize", [&] { return StochasticModel::initialize(cfg.model, init); });
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochMetrics& m) {
    log << "epoch " << m.epoch << " loss " << format_double(m.train_loss) << " clean "
        << format_double(m.clean_accuracy) << " robust " << format_double(m.robust_accuracy)
        << '\n';
  };
  TrainResult result = stage("train", [&] { return train_defense(model, train, tc, &test, hooks); });
  stage("save checkpoint", [&] {
    save_checkpoint(result.model, config_to_text(cfg), cfg.paths.checkpoint);
  });
  if (!cfg.paths.metrics_csv.empty()) {
    stage("write metrics", [&] {
      auto os = open_output(cfg.paths.metrics_csv, "metrics");
      os << "epoch,train_loss,clean_accuracy,robust_accuracy\n";
      for (const auto& m : result.metrics) {
        os << m.epoch << ',' << format_double(m.train_loss) << ','
           << format_double(m.clean_accuracy) << ',' << format_double(m.robust_accuracy) << '\n';
      }
    });
  }
  output.metrics = std::move(result.metrics);
  return output;
}

RunOutput run_eval(RunOutput output, std::ostream& out) {
  const RunConfig& cfg = output.resolved;
  EvalContext ctx = prepare_eval(cfg);
  std::ofstream adversarial;
  if (cfg.command == Command::kAttack && !cfg.paths.adversarial_csv.empty()) {
    adversarial = open_output(cfg.paths.adversarial_csv, "adversarial output");
    adversarial << "attack,gamma,index,label,success";
    for (std::size_t j = 0; j < ctx.data.dim(); ++j) adversarial << ",x" << j;
    adversarial << '\n';
  }
  std::vector<ReportRow> rows;
  for (double gamma : cfg.attack.gammas) {
    for (AttackKind kind : cfg.attack.kinds) {
      const AttackConfig a = attack_for(cfg, ctx, kind, gamma);
      const auto start = Clock::now();
      RobustEvaluation r = stage("attack", [&] {
        return robust_accuracy(ctx.model, ctx.data, kind, a, ctx.eval);
      });
      rows.push_back(make_row(cfg, ctx, kind, a, r.accuracy, seconds_since(start)));
      if (adversarial.is_open()) write_adversarial(adversarial, kind, gamma, ctx.data, r.attack);
    }
  }
  output.report = stage("report", [&] {
    RobustnessReport report = build_report(std::move(rows));
    emit_outputs(report, cfg.paths, out);
    return report;
  });
  return output;
}

RunOutput run_sweep(RunOutput output, std::ostream& out) {
  const RunConfig& cfg = output.resolved;
  EvalContext ctx = prepare_eval(cfg);
  std::vector<ReportRow> rows;
  for (double gamma : cfg.attack.gammas) {
    for (AttackKind kind : cfg.attack.kinds) {
      AttackConfig a = attack_for(cfg, ctx, kind, gamma);
      if (cfg.sweep.param == "steps") {
        const auto start = Clock::now();
        auto points = stage("sweep", [&] {
          return steps_sweep(ctx.model, ctx.data, kind, a, cfg.sweep.values, ctx.eval);
        });
        const double per_point = seconds_since(start) / static_cast<double>(points.size());
        const double eta = a.resolved_eta();
        for (const auto& p : points) {
          AttackConfig at = a;
          at.steps = p.steps;
          at.eta = eta;
          rows.push_back(make_row(cfg, ctx, kind, at, 1.0 - p.success_rate, per_point));
        }
        continue;
      }
      for (std::size_t m : cfg.sweep.values) {
        a.m_grad = m;
        const auto start = Clock::now();
        RobustEvaluation r = stage("sweep", [&] {
          return robust_accuracy(ctx.model, ctx.data, kind, a, ctx.eval);
        });
        ReportRow row = make_row(cfg, ctx, kind, a, r.accuracy, seconds_since(start));
        row.m_grad = m;
        rows.push_back(std::move(row));
      }
    }
  }
  output.report = stage("report", [&] {
    RobustnessReport report = build_report(std::move(rows));
    emit_outputs(report, cfg.paths, out);
    return report;
  });
  return output;
}

RunOutput run_report(RunOutput output, std::ostream& out) {
  const RunConfig& cfg = output.resolved;
  output.report = stage("report", [&] {
    std::vector<RobustnessReport> inputs;
    for (const auto& p : cfg.paths.inputs) inputs.push_back(read_report_csv(p));
    RobustnessReport report = merge_reports(inputs);
    emit_outputs(report, cfg.paths, out);
    return report;
  });
  return output;
}

}  // namespace

std::pair<Dataset, Dataset> load_dataset(const DatasetConfig& cfg, DType dtype) {
  Dataset all;
  if (cfg.source == "synthetic") {
    all = gen_synthetic(cfg.synthetic, derive_seed(cfg.seed, {stream::kData}), dtype);
  } else if (cfg.source == "idx") {
    all = load_idx(cfg.idx_images, cfg.idx_labels, dtype);
  } else {
    fail(ErrorCode::kConfig, "unknown dataset source '" + cfg.source + "'");
  }
  return split_dataset(all, cfg.test_fraction, derive_seed(cfg.seed, {stream::kShuffle}));
}

std::string defense_label(const TrainConfig& train) {
  if (train.inner_attack.gamma <= 0) {
    return defense_is_stochastic(train.defense) ? "bnn" : "standard";
  }
  return to_string(train.defense);
}

RunOutput run_pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  stage("config", [&] { validate_config(cfg); });
  RunOutput output;
  output.resolved = cfg;
  RunConfig& resolved = output.resolved;
  if (!resolved.seed) resolved.seed = 0;
  if (cfg.command == Command::kTrain) {
    stage("load dataset", [&] {
      const Dataset train = load_dataset(cfg.dataset, cfg.model.dtype).first;
      if (resolved.model.input_dim == 0) resolved.model.input_dim = train.dim();
      if (resolved.model.classes == 0) resolved.model.classes = train.classes;
      if (resolved.model.input_dim != train.dim()) {
        fail(ErrorCode::kModelMismatch, "model.input_dim does not match the dataset");
      }
    });
    resolved.stochastic = cfg.stochastic.value_or(defense_is_stochastic(cfg.train.defense));
    resolved.model.stochastic = *resolved.stochastic;
  }
  log << "resolved config:\n" << config_to_text(resolved);
  switch (cfg.command) {
    case Command::kTrain: return run_train(std::move(output), log);
    case Command::kAttack:
    case Command::kEval: return run_eval(std::move(output), out);
    case Command::kSweep: return run_sweep(std::move(output), out);
    case Command::kReport: return run_report(std::move(output), out);
  }
  return output;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  try {
    run_pipeline(cfg, out, log);
    return 0;
  } catch (const Error& e) {
    log << "error [" << to_string(e.code()) << "] " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace abnn
