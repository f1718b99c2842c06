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

#include "abnn/abnn.h"

#include <cstring>
#include <new>
#include <ostream>
#include <streambuf>
#include <string>

#include "abnn/checkpoint.hpp"
#include "abnn/config.hpp"
#include "abnn/error.hpp"
#include "abnn/pipeline.hpp"

struct abnn_config {
  abnn::RunConfig value;
};

struct abnn_model {
  abnn::Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

abnn_status set_error(abnn_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class Fn>
abnn_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ABNN_OK;
  } catch (const abnn::Error& e) {
    return set_error(static_cast<abnn_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(ABNN_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(ABNN_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (p == nullptr) abnn::fail(abnn::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

// Line-buffered bridge from an ostream to the write callback.
class CallbackBuf : public std::streambuf {
 public:
  CallbackBuf(abnn_write_fn fn, void* user, int stream) : fn_(fn), user_(user), stream_(stream) {}
  ~CallbackBuf() override { flush_line(); }

 protected:
  int_type overflow(int_type ch) override {
    if (ch == traits_type::eof()) return traits_type::not_eof(ch);
    line_.push_back(static_cast<char>(ch));
    if (ch == '\n') flush_line();
    return ch;
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    for (std::streamsize i = 0; i < n; ++i) overflow(traits_type::to_int_type(s[i]));
    return n;
  }
  int sync() override {
    flush_line();
    return 0;
  }

 private:
  void flush_line() {
    if (!line_.empty() && fn_ != nullptr) fn_(user_, stream_, line_.data(), line_.size());
    line_.clear();
  }

  abnn_write_fn fn_;
  void* user_;
  int stream_;
  std::string line_;
};

const abnn::ConfigKey* key_at(size_t index) {
  const auto& keys = abnn::config_keys();
  return index < keys.size() ? &keys[index] : nullptr;
}

}  // namespace

extern "C" {

const char* abnn_version(void) { return "1.0.0"; }

const char* abnn_status_string(abnn_status status) {
  if (status == ABNN_OK) return "ok";
  if (status == ABNN_INTERNAL) return "internal error";
  if (status >= 1 && status <= 15) return abnn::to_string(static_cast<abnn::ErrorCode>(status));
  return "unknown status";
}

const char* abnn_last_error(void) { return g_last_error.c_str(); }

void abnn_string_free(char* s) { delete[] s; }

abnn_status abnn_config_new(abnn_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new abnn_config{};
  });
}

abnn_status abnn_config_parse(const char* text, abnn_config** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new abnn_config{abnn::config_from_text(text)};
  });
}

abnn_status abnn_config_load(const char* path, abnn_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new abnn_config{abnn::load_config(path)};
  });
}

void abnn_config_free(abnn_config* cfg) { delete cfg; }

abnn_status abnn_config_set(abnn_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    abnn::config_set(cfg->value, key, value);
  });
}

abnn_status abnn_config_get(const abnn_config* cfg, const char* key, char** out) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(out, "out");
    *out = copy_string(abnn::config_get(cfg->value, key));
  });
}

abnn_status abnn_config_to_text(const abnn_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = copy_string(abnn::config_to_text(cfg->value));
  });
}

abnn_status abnn_config_validate(const abnn_config* cfg) {
  return guarded([&] {
    require(cfg, "config");
    abnn::validate_config(cfg->value);
  });
}

size_t abnn_config_key_count(void) { return abnn::config_keys().size(); }

const char* abnn_config_key_name(size_t index) {
  const auto* k = key_at(index);
  return k ? k->name.c_str() : nullptr;
}

const char* abnn_config_key_kind(size_t index) {
  const auto* k = key_at(index);
  return k ? k->kind.c_str() : nullptr;
}

const char* abnn_config_key_default(size_t index) {
  const auto* k = key_at(index);
  return k ? k->default_value.c_str() : nullptr;
}

const char* abnn_config_key_help(size_t index) {
  const auto* k = key_at(index);
  return k ? k->help.c_str() : nullptr;
}

abnn_status abnn_run(const abnn_config* cfg, abnn_write_fn write, void* user) {
  return guarded([&] {
    require(cfg, "config");
    CallbackBuf out_buf(write, user, 0);
    CallbackBuf log_buf(write, user, 1);
    std::ostream out(&out_buf);
    std::ostream log(&log_buf);
    abnn::run_pipeline(cfg->value, out, log);
    out.flush();
    log.flush();
  });
}

abnn_status abnn_model_load(const char* path, abnn_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new abnn_model{abnn::load_checkpoint(path)};
  });
}

void abnn_model_free(abnn_model* model) { delete model; }

abnn_status abnn_model_info(const abnn_model* model, size_t* input_dim, size_t* classes,
                            int* stochastic) {
  return guarded([&] {
    require(model, "model");
    const auto& spec = model->checkpoint.model.spec();
    if (input_dim) *input_dim = spec.input_dim;
    if (classes) *classes = spec.classes;
    if (stochastic) *stochastic = spec.stochastic ? 1 : 0;
  });
}

abnn_status abnn_model_provenance(const abnn_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = copy_string(model->checkpoint.provenance);
  });
}

abnn_status abnn_model_predict(const abnn_model* model, const double* inputs, size_t n,
                               size_t m_eval, uint64_t seed, double* probs) {
  return guarded([&] {
    require(model, "model");
    require(inputs, "inputs");
    require(probs, "probs");
    if (n == 0 || m_eval == 0) {
      abnn::fail(abnn::ErrorCode::kInvalidArgument, "n and m_eval must be >= 1");
    }
    const auto& m = model->checkpoint.model;
    const std::size_t d = m.spec().input_dim;
    const abnn::Tensor x = abnn::Tensor::from_values(
        {n, d}, std::span<const double>(inputs, n * d), m.spec().dtype);
    abnn::Rng rng = abnn::make_rng(seed, {abnn::stream::kEval});
    const auto p = abnn::predict_ensemble(m.frozen(), x, m_eval, rng).to_vector();
    std::memcpy(probs, p.data(), p.size() * sizeof(double));
  });
}

}  // extern "C"
