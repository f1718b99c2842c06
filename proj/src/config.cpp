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

#include "abnn/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "abnn/error.hpp"
#include "abnn/report.hpp"

namespace abnn {

using json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::kConfig, msg); }

json attack_fields(const AttackConfig& a) {
  return {{"eta", a.eta},
          {"steps", a.steps},
          {"m_grad", a.m_grad},
          {"random_start", a.random_start},
          {"step_rule", to_string(a.step_rule)},
          {"lo", a.lo},
          {"hi", a.hi}};
}

json model_json(const ModelSpec& m) {
  return {{"input_dim", m.input_dim},
          {"hidden", m.hidden},
          {"classes", m.classes},
          {"prior_sigma", m.prior_sigma},
          {"init_sigma_ratio", m.init_sigma_ratio},
          {"dtype", to_string(m.dtype)}};
}

json to_json(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["threads"] = c.threads;

  const auto& s = c.dataset.synthetic;
  j["dataset"] = {{"source", c.dataset.source},
                  {"synthetic",
                   {{"classes", s.classes},
                    {"dim", s.dim},
                    {"separation", s.separation},
                    {"sigma", s.sigma},
                    {"per_class", s.per_class},
                    {"robust_dims", s.robust_dims},
                    {"robust_separation", s.robust_separation}}},
                  {"idx_images", c.dataset.idx_images},
                  {"idx_labels", c.dataset.idx_labels},
                  {"test_fraction", c.dataset.test_fraction},
                  {"seed", c.dataset.seed}};

  j["model"] = model_json(c.model);
  j["model"]["stochastic"] = c.stochastic ? json(*c.stochastic) : json(nullptr);

  const auto& t = c.train;
  json inner = attack_fields(t.inner_attack);
  inner["gamma"] = t.inner_attack.gamma;
  j["train"] = {{"defense", to_string(t.defense)},
                {"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"kl_weight", t.kl_weight},
                {"probe_size", t.probe_size},
                {"probe_m_eval", t.probe_m_eval},
                {"optimizer",
                 {{"kind", to_string(t.optimizer.kind)},
                  {"learning_rate", t.optimizer.learning_rate},
                  {"momentum", t.optimizer.momentum},
                  {"beta1", t.optimizer.beta1},
                  {"beta2", t.optimizer.beta2},
                  {"epsilon", t.optimizer.epsilon}}},
                {"inner_attack", inner}};

  json attack = attack_fields(c.attack.base);
  std::vector<std::string> kinds;
  for (auto k : c.attack.kinds) kinds.emplace_back(to_string(k));
  attack["kinds"] = kinds;
  attack["gammas"] = c.attack.gammas;
  j["attack"] = attack;

  j["eval"] = {{"m_eval", c.eval.m_eval},
               {"ensemble", to_string(c.eval.ensemble)},
               {"n_examples", c.eval.n_examples}};
  j["sweep"] = {{"param", c.sweep.param}, {"values", c.sweep.values}};
  j["paths"] = {{"checkpoint", c.paths.checkpoint},
                {"report_csv", c.paths.report_csv},
                {"report_md", c.paths.report_md},
                {"metrics_csv", c.paths.metrics_csv},
                {"adversarial_csv", c.paths.adversarial_csv},
                {"inputs", c.paths.inputs}};
  j["report"] = {{"label", c.report.label}, {"timing", c.report.timing}};
  return j;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("config key '") + key + "': " + e.what());
  }
}

void read_attack_fields(const json& j, AttackConfig& a) {
  a.eta = get<double>(j, "eta");
  a.steps = get<std::size_t>(j, "steps");
  a.m_grad = get<std::size_t>(j, "m_grad");
  a.random_start = get<bool>(j, "random_start");
  a.step_rule = step_rule_from_string(get<std::string>(j, "step_rule"));
  a.lo = get<double>(j, "lo");
  a.hi = get<double>(j, "hi");
}

ModelSpec read_model(const json& m) {
  ModelSpec spec;
  spec.input_dim = get<std::size_t>(m, "input_dim");
  spec.hidden = get<std::vector<std::size_t>>(m, "hidden");
  spec.classes = get<std::size_t>(m, "classes");
  spec.prior_sigma = get<double>(m, "prior_sigma");
  spec.init_sigma_ratio = get<double>(m, "init_sigma_ratio");
  spec.dtype = dtype_from_string(get<std::string>(m, "dtype"));
  return spec;
}

RunConfig from_json(const json& j) {
  RunConfig c;
  c.command = command_from_string(get<std::string>(j, "command"));
  if (!j.at("seed").is_null()) c.seed = get<std::uint64_t>(j, "seed");
  c.threads = get<unsigned>(j, "threads");

  const json& d = j.at("dataset");
  c.dataset.source = get<std::string>(d, "source");
  const json& s = d.at("synthetic");
  auto& syn = c.dataset.synthetic;
  syn.classes = get<std::size_t>(s, "classes");
  syn.dim = get<std::size_t>(s, "dim");
  syn.separation = get<double>(s, "separation");
  syn.sigma = get<double>(s, "sigma");
  syn.per_class = get<std::size_t>(s, "per_class");
  syn.robust_dims = get<std::size_t>(s, "robust_dims");
  syn.robust_separation = get<double>(s, "robust_separation");
  c.dataset.idx_images = get<std::string>(d, "idx_images");
  c.dataset.idx_labels = get<std::string>(d, "idx_labels");
  c.dataset.test_fraction = get<double>(d, "test_fraction");
  c.dataset.seed = get<std::uint64_t>(d, "seed");

  const json& m = j.at("model");
  c.model = read_model(m);
  if (!m.at("stochastic").is_null()) c.stochastic = get<bool>(m, "stochastic");

  const json& t = j.at("train");
  c.train.defense = defense_kind_from_string(get<std::string>(t, "defense"));
  c.train.epochs = get<std::size_t>(t, "epochs");
  c.train.batch_size = get<std::size_t>(t, "batch_size");
  c.train.kl_weight = get<double>(t, "kl_weight");
  c.train.probe_size = get<std::size_t>(t, "probe_size");
  c.train.probe_m_eval = get<std::size_t>(t, "probe_m_eval");
  const json& o = t.at("optimizer");
  c.train.optimizer.kind = optimizer_kind_from_string(get<std::string>(o, "kind"));
  c.train.optimizer.learning_rate = get<double>(o, "learning_rate");
  c.train.optimizer.momentum = get<double>(o, "momentum");
  c.train.optimizer.beta1 = get<double>(o, "beta1");
  c.train.optimizer.beta2 = get<double>(o, "beta2");
  c.train.optimizer.epsilon = get<double>(o, "epsilon");
  read_attack_fields(t.at("inner_attack"), c.train.inner_attack);
  c.train.inner_attack.gamma = get<double>(t.at("inner_attack"), "gamma");

  const json& a = j.at("attack");
  read_attack_fields(a, c.attack.base);
  c.attack.kinds.clear();
  for (const auto& k : get<std::vector<std::string>>(a, "kinds")) {
    c.attack.kinds.push_back(attack_kind_from_string(k));
  }
  c.attack.gammas = get<std::vector<double>>(a, "gammas");

  const json& e = j.at("eval");
  c.eval.m_eval = get<std::size_t>(e, "m_eval");
  c.eval.ensemble = ensemble_mode_from_string(get<std::string>(e, "ensemble"));
  c.eval.n_examples = get<std::size_t>(e, "n_examples");

  c.sweep.param = get<std::string>(j.at("sweep"), "param");
  c.sweep.values = get<std::vector<std::size_t>>(j.at("sweep"), "values");

  const json& p = j.at("paths");
  c.paths.checkpoint = get<std::string>(p, "checkpoint");
  c.paths.report_csv = get<std::string>(p, "report_csv");
  c.paths.report_md = get<std::string>(p, "report_md");
  c.paths.metrics_csv = get<std::string>(p, "metrics_csv");
  c.paths.adversarial_csv = get<std::string>(p, "adversarial_csv");
  c.paths.inputs = get<std::vector<std::string>>(p, "inputs");

  c.report.label = get<std::string>(j.at("report"), "label");
  c.report.timing = get<bool>(j.at("report"), "timing");
  return c;
}

// Keys whose default is null; their text form "auto"/"none" maps to null.
bool nullable(const std::string& key) { return key == "seed" || key == "model.stochastic"; }

bool kinds_compatible(const json& def, const json& value, const std::string& key) {
  if (nullable(key)) return value.is_null() || value.is_number_unsigned() || value.is_boolean();
  if (def.is_number_float()) return value.is_number();
  if (def.is_number_unsigned() || def.is_number_integer()) {
    return value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0);
  }
  return def.type() == value.type();
}

void overlay(json& target, const json& input, const std::string& prefix) {
  if (!input.is_object()) config_error("config section '" + prefix + "' must be an object");
  for (auto it = input.begin(); it != input.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!target.contains(it.key())) config_error("unknown config key '" + key + "'");
    json& slot = target[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), key);
    } else if (kinds_compatible(slot, it.value(), key)) {
      slot = it.value();
    } else {
      config_error("config key '" + key + "' has the wrong type");
    }
  }
}

const std::map<std::string, std::string>& help_texts() {
  static const std::map<std::string, std::string> help{
      {"command", "train, attack, eval, report or sweep"},
      {"seed", "global run seed (required for train and eval)"},
      {"threads", "worker threads for attacks and evaluation, 0 = all cores"},
      {"dataset.source", "synthetic or idx"},
      {"dataset.synthetic.classes", "number of Gaussian blobs"},
      {"dataset.synthetic.dim", "input dimension"},
      {"dataset.synthetic.separation", "per-coordinate mean separation"},
      {"dataset.synthetic.sigma", "within-class standard deviation"},
      {"dataset.synthetic.per_class", "examples per class"},
      {"dataset.synthetic.robust_dims", "leading coordinates with robust_separation"},
      {"dataset.synthetic.robust_separation", "mean separation on the robust coordinates"},
      {"dataset.idx_images", "IDX image file (u8, rank 3)"},
      {"dataset.idx_labels", "IDX label file (u8, rank 1)"},
      {"dataset.test_fraction", "held-out fraction used for evaluation"},
      {"dataset.seed", "seed for data generation and the train/test split"},
      {"model.input_dim", "input width, 0 = from the dataset"},
      {"model.hidden", "hidden layer widths"},
      {"model.classes", "output classes, 0 = from the dataset"},
      {"model.stochastic", "variational layers: true, false or auto (from train.defense)"},
      {"model.prior_sigma", "standard deviation of the N(0, s^2) weight prior"},
      {"model.init_sigma_ratio", "initial sigma relative to the init bound"},
      {"model.dtype", "float32 or float64"},
      {"train.defense", "adv_training, adv_bnn_naive or adv_bnn_apgd"},
      {"train.epochs", "training epochs"},
      {"train.batch_size", "minibatch size"},
      {"train.kl_weight", "weight of the KL term (scaled by 1/dataset size)"},
      {"train.probe_size", "held-out examples scored after each epoch, 0 = off"},
      {"train.probe_m_eval", "ensemble size for the per-epoch probe"},
      {"train.optimizer.kind", "adam or sgd_momentum"},
      {"train.optimizer.learning_rate", "learning rate"},
      {"train.optimizer.momentum", "SGD momentum"},
      {"train.optimizer.beta1", "Adam beta1"},
      {"train.optimizer.beta2", "Adam beta2"},
      {"train.optimizer.epsilon", "Adam epsilon"},
      {"train.inner_attack.gamma", "l-inf radius of training attacks, 0 = clean training"},
      {"train.inner_attack.eta", "training attack step size, <= 0 = 2.5 gamma / steps"},
      {"train.inner_attack.steps", "training attack steps"},
      {"train.inner_attack.m_grad", "noise samples per gradient for A-PGD training"},
      {"train.inner_attack.random_start", "uniform random start inside the ball"},
      {"train.inner_attack.step_rule", "sign or raw"},
      {"train.inner_attack.lo", "lower data bound"},
      {"train.inner_attack.hi", "upper data bound"},
      {"attack.kinds", "attacks to run: naive, apgd"},
      {"attack.gammas", "l-inf radii"},
      {"attack.eta", "step size, <= 0 = 2.5 gamma / steps"},
      {"attack.steps", "attack steps"},
      {"attack.m_grad", "noise samples per A-PGD gradient"},
      {"attack.random_start", "uniform random start inside the ball"},
      {"attack.step_rule", "sign or raw"},
      {"attack.lo", "lower data bound"},
      {"attack.hi", "upper data bound"},
      {"eval.m_eval", "ensemble size at inference"},
      {"eval.ensemble", "prob (average probabilities) or logit (average logits)"},
      {"eval.n_examples", "leading test examples evaluated, 0 = all"},
      {"sweep.param", "m_grad or steps"},
      {"sweep.values", "values of the swept parameter"},
      {"paths.checkpoint", "model checkpoint (written by train, read otherwise)"},
      {"paths.report_csv", "CSV report output"},
      {"paths.report_md", "markdown report output"},
      {"paths.metrics_csv", "per-epoch training metrics output"},
      {"paths.adversarial_csv", "adversarial examples output (attack)"},
      {"paths.inputs", "report CSVs merged by the report command"},
      {"report.label", "defense label for rows, empty = from the checkpoint"},
      {"report.timing", "record wall time in reports (breaks byte reproducibility)"},
  };
  return help;
}

std::string leaf_text(const json& v) {
  if (v.is_null()) return "auto";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      out += leaf_text(v[i]);
    }
    return out;
  }
  return v.dump();
}

std::string kind_of(const std::string& key, const json& v) {
  if (key == "seed") return "int";
  if (key == "model.stochastic") return "bool";
  if (v.is_boolean()) return "bool";
  if (v.is_number_float()) return "number";
  if (v.is_number()) return "int";
  if (v.is_array()) return "list";
  return "string";
}

void flatten(const json& j, const std::string& prefix, std::vector<ConfigKey>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object()) {
      flatten(it.value(), key, out);
      continue;
    }
    auto help = help_texts().find(key);
    out.push_back({key, kind_of(key, it.value()), leaf_text(it.value()),
                   help == help_texts().end() ? std::string() : help->second});
  }
}

json* find_leaf(json& root, const std::string& key) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node->is_object() ? nullptr : node;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    config_error("config key '" + key + "' expects a non-negative integer, got '" + text + "'");
  }
  return v;
}

double parse_number(const std::string& key, const std::string& text) {
  try {
    return parse_double(text);
  } catch (const Error&) {
    config_error("config key '" + key + "' expects a number, got '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  config_error("config key '" + key + "' expects true or false, got '" + text + "'");
}

json parse_leaf(const std::string& key, const json& current, const json& def,
                const std::string& text) {
  if (key == "seed") {
    if (text == "none" || text == "auto") return nullptr;
    return parse_unsigned(key, text);
  }
  if (key == "model.stochastic") {
    if (text == "auto") return nullptr;
    return parse_bool(key, text);
  }
  if (def.is_array()) {
    json arr = json::array();
    if (text.empty()) return arr;
    std::stringstream ss(text);
    std::string item;
    const json element = def.empty() ? json("") : def.front();
    while (std::getline(ss, item, ',')) {
      arr.push_back(parse_leaf(key + "[]", json(), element, item));
    }
    return arr;
  }
  (void)current;
  if (def.is_boolean()) return parse_bool(key, text);
  if (def.is_number_float()) return parse_number(key, text);
  if (def.is_number()) return parse_unsigned(key, text);
  return text;
}

}  // namespace

const char* to_string(Command command) {
  switch (command) {
    case Command::kTrain: return "train";
    case Command::kAttack: return "attack";
    case Command::kEval: return "eval";
    case Command::kReport: return "report";
    case Command::kSweep: return "sweep";
  }
  return "?";
}

Command command_from_string(const std::string& name) {
  if (name == "train") return Command::kTrain;
  if (name == "attack") return Command::kAttack;
  if (name == "eval") return Command::kEval;
  if (name == "report") return Command::kReport;
  if (name == "sweep") return Command::kSweep;
  config_error("unknown command '" + name + "'");
}

std::string config_to_text(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

RunConfig config_from_text(const std::string& text) {
  json input;
  try {
    input = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  json full = to_json(RunConfig{});
  overlay(full, input, "");
  try {
    return from_json(full);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    config_error(e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str());
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    flatten(to_json(RunConfig{}), "", out);
    return out;
  }();
  return keys;
}

void config_set(RunConfig& cfg, const std::string& key, const std::string& value) {
  json j = to_json(cfg);
  json* leaf = find_leaf(j, key);
  if (leaf == nullptr) config_error("unknown config key '" + key + "'");
  static const json defaults = to_json(RunConfig{});
  const json* def = find_leaf(const_cast<json&>(defaults), key);
  *leaf = parse_leaf(key, *leaf, *def, value);
  try {
    cfg = from_json(j);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    config_error("config key '" + key + "': " + e.what());
  }
}

std::string config_get(const RunConfig& cfg, const std::string& key) {
  json j = to_json(cfg);
  const json* leaf = find_leaf(j, key);
  if (leaf == nullptr) config_error("unknown config key '" + key + "'");
  return leaf_text(*leaf);
}

std::string model_spec_to_text(const ModelSpec& spec) {
  json j = model_json(spec);
  j["stochastic"] = spec.stochastic;
  return j.dump();
}

ModelSpec model_spec_from_text(const std::string& text) {
  try {
    const json j = json::parse(text);
    ModelSpec spec = read_model(j);
    spec.stochastic = get<bool>(j, "stochastic");
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorCode::kModelMismatch, std::string("bad architecture record: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::kModelMismatch, std::string("bad architecture record: ") + e.what());
  }
}

namespace {

void require_file(const std::string& path, const char* what) {
  if (path.empty()) config_error(std::string(what) + " path is required");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    fail(ErrorCode::kIo, std::string(what) + " '" + path + "' does not exist");
  }
}

void require_writable(const std::string& path, const char* what) {
  if (path.empty()) return;
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty() && !std::filesystem::is_directory(parent, ec)) {
    fail(ErrorCode::kIo, std::string(what) + " directory '" + parent.string() + "' does not exist");
  }
  if (std::filesystem::is_directory(path, ec)) {
    fail(ErrorCode::kIo, std::string(what) + " '" + path + "' is a directory");
  }
}

}  // namespace

void validate_config(const RunConfig& cfg) {
  const Command cmd = cfg.command;
  if ((cmd == Command::kTrain || cmd == Command::kEval) && !cfg.seed) {
    config_error(std::string(to_string(cmd)) + " requires a seed");
  }
  if (cmd != Command::kReport) {
    if (cfg.dataset.source == "synthetic") {
      cfg.dataset.synthetic.validate();
    } else if (cfg.dataset.source == "idx") {
      require_file(cfg.dataset.idx_images, "IDX images");
      require_file(cfg.dataset.idx_labels, "IDX labels");
    } else {
      config_error("dataset.source must be synthetic or idx");
    }
    if (!(cfg.dataset.test_fraction > 0.0 && cfg.dataset.test_fraction < 1.0)) {
      config_error("dataset.test_fraction must lie in (0, 1)");
    }
  }
  switch (cmd) {
    case Command::kTrain:
      if (cfg.paths.checkpoint.empty()) config_error("train requires paths.checkpoint");
      require_writable(cfg.paths.checkpoint, "checkpoint");
      require_writable(cfg.paths.metrics_csv, "metrics");
      if (cfg.stochastic && *cfg.stochastic != defense_is_stochastic(cfg.train.defense)) {
        fail(ErrorCode::kModelMismatch,
             std::string("defense ") + to_string(cfg.train.defense) + " needs model.stochastic=" +
                 (defense_is_stochastic(cfg.train.defense) ? "true" : "false"));
      }
      for (double s : cfg.model.hidden) {
        if (s == 0) config_error("model.hidden widths must be >= 1");
      }
      cfg.train.validate();
      break;
    case Command::kAttack:
    case Command::kEval:
    case Command::kSweep: {
      require_file(cfg.paths.checkpoint, "checkpoint");
      require_writable(cfg.paths.report_csv, "report");
      require_writable(cfg.paths.report_md, "report");
      require_writable(cfg.paths.adversarial_csv, "adversarial output");
      if (cfg.attack.kinds.empty()) config_error("attack.kinds is empty");
      if (cfg.attack.gammas.empty()) config_error("attack.gammas is empty");
      if (cfg.eval.m_eval == 0) config_error("eval.m_eval must be >= 1");
      for (double g : cfg.attack.gammas) {
        AttackConfig a = cfg.attack.base;
        a.gamma = g;
        a.validate();
      }
      if (cmd == Command::kSweep) {
        if (cfg.sweep.param != "m_grad" && cfg.sweep.param != "steps") {
          config_error("sweep.param must be m_grad or steps");
        }
        if (cfg.sweep.values.empty()) config_error("sweep.values is empty");
        for (std::size_t i = 1; i < cfg.sweep.values.size(); ++i) {
          if (cfg.sweep.values[i] <= cfg.sweep.values[i - 1]) {
            config_error("sweep.values must be strictly ascending");
          }
        }
        if (cfg.sweep.param == "m_grad" && cfg.sweep.values.front() == 0) {
          config_error("sweep over m_grad needs values >= 1");
        }
      }
      break;
    }
    case Command::kReport:
      if (cfg.paths.inputs.empty()) config_error("report requires paths.inputs");
      for (const auto& p : cfg.paths.inputs) require_file(p, "report input");
      require_writable(cfg.paths.report_csv, "report");
      require_writable(cfg.paths.report_md, "report");
      break;
  }
}

}  // namespace abnn
