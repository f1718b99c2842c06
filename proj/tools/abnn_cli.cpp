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

// abnn: train, attack, evaluate and report on stochastic classifiers.
//
//   abnn train --seed 1 --paths.checkpoint model.abnn --train.defense adv_bnn_naive
//   abnn eval --seed 1 --paths.checkpoint model.abnn --paths.report_csv r1.csv
//   abnn report --paths.inputs r1.csv,r2.csv --paths.report_md table.md
//
// Every configuration key is a flag; --config loads a base document first.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "abnn/abnn.h"

namespace {

struct Key {
  std::string name;
  std::string help;
  std::string kind;
  std::string fallback;
};

std::vector<Key> keys() {
  std::vector<Key> out;
  for (size_t i = 0; i < abnn_config_key_count(); ++i) {
    out.push_back({abnn_config_key_name(i), abnn_config_key_help(i), abnn_config_key_kind(i),
                   abnn_config_key_default(i)});
  }
  return out;
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_path;
  bool print_config = false;
  std::map<std::string, std::string> values;
};

void write_out(void*, int stream, const char* text, size_t len) {
  std::fwrite(text, 1, len, stream == 0 ? stdout : stderr);
  std::fflush(stream == 0 ? stdout : stderr);
}

int fail_with(abnn_status status, const char* what) {
  std::fprintf(stderr, "abnn: %s: %s\n", what, abnn_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial attacks and defenses for stochastic classifiers", "abnn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", abnn_version());

  const std::vector<std::pair<std::string, std::string>> commands{
      {"train", "train a defense and write a checkpoint"},
      {"attack", "attack a checkpoint and write adversarial examples"},
      {"eval", "clean and robust accuracy of a checkpoint"},
      {"report", "merge report CSVs and render tables"},
      {"sweep", "robust accuracy over m_grad or step counts"}};
  const auto all_keys = keys();

  std::map<std::string, std::unique_ptr<Subcommand>> subs;
  for (const auto& [name, description] : commands) {
    auto sub = std::make_unique<Subcommand>();
    sub->app = app.add_subcommand(name, description);
    sub->app->add_option("--config", sub->config_path, "base configuration document")
        ->check(CLI::ExistingFile);
    sub->app->add_flag("--print-config", sub->print_config,
                       "print the configuration and exit without running");
    for (const auto& key : all_keys) {
      if (key.name == "command") continue;
      auto* opt = sub->app->add_option("--" + key.name, sub->values[key.name], key.help);
      opt->type_name(key.kind == "list" ? "LIST" : key.kind == "bool" ? "BOOL"
                     : key.kind == "string" ? "TEXT" : key.kind == "int" ? "INT" : "FLOAT");
      opt->default_str(key.fallback);
      if (key.name == "seed" && (name == "train" || name == "eval")) opt->required();
    }
    subs.emplace(name, std::move(sub));
  }

  CLI11_PARSE(app, argc, argv);

  for (auto& [name, sub] : subs) {
    if (!sub->app->parsed()) continue;
    abnn_config* raw = nullptr;
    abnn_status status = sub->config_path.empty()
                             ? abnn_config_new(&raw)
                             : abnn_config_load(sub->config_path.c_str(), &raw);
    if (status != ABNN_OK) return fail_with(status, "config");
    std::unique_ptr<abnn_config, decltype(&abnn_config_free)> cfg(raw, abnn_config_free);

    status = abnn_config_set(cfg.get(), "command", name.c_str());
    if (status != ABNN_OK) return fail_with(status, "config");
    for (const auto& key : all_keys) {
      if (key.name == "command" || sub->app->count("--" + key.name) == 0) continue;
      status = abnn_config_set(cfg.get(), key.name.c_str(), sub->values[key.name].c_str());
      if (status != ABNN_OK) return fail_with(status, "config");
    }

    if (sub->print_config) {
      char* text = nullptr;
      status = abnn_config_to_text(cfg.get(), &text);
      if (status != ABNN_OK) return fail_with(status, "config");
      std::fputs(text, stdout);
      abnn_string_free(text);
      return 0;
    }

    status = abnn_run(cfg.get(), write_out, nullptr);
    if (status != ABNN_OK) return fail_with(status, name.c_str());
    return 0;
  }
  return 1;
}
