/* Copyright 2026 The abnn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the abnn toolkit. Every fallible call returns an
 * abnn_status; on failure abnn_last_error() describes it (per thread).
 * Strings returned through char** must be released with abnn_string_free. */

#ifndef ABNN_ABNN_H_
#define ABNN_ABNN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ABNN_API __declspec(dllexport)
#else
#define ABNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum abnn_status {
  ABNN_OK = 0,
  ABNN_INVALID_ARGUMENT = 1,
  ABNN_SHAPE_MISMATCH = 2,
  ABNN_DTYPE_MISMATCH = 3,
  ABNN_NO_TRACE = 4,
  ABNN_NON_SCALAR_LOSS = 5,
  ABNN_NOISE_MISMATCH = 6,
  ABNN_NON_FINITE = 7,
  ABNN_IO = 8,
  ABNN_BAD_MAGIC = 9,
  ABNN_TRUNCATED = 10,
  ABNN_COUNT_MISMATCH = 11,
  ABNN_UNSUPPORTED_VERSION = 12,
  ABNN_MISSING_PROVENANCE = 13,
  ABNN_CONFIG = 14,
  ABNN_MODEL_MISMATCH = 15,
  ABNN_INTERNAL = 99
} abnn_status;

typedef struct abnn_config abnn_config;
typedef struct abnn_model abnn_model;

ABNN_API const char* abnn_version(void);
ABNN_API const char* abnn_status_string(abnn_status status);
ABNN_API const char* abnn_last_error(void);
ABNN_API void abnn_string_free(char* s);

/* Run configuration. */
ABNN_API abnn_status abnn_config_new(abnn_config** out);
ABNN_API abnn_status abnn_config_parse(const char* text, abnn_config** out);
ABNN_API abnn_status abnn_config_load(const char* path, abnn_config** out);
ABNN_API void abnn_config_free(abnn_config* cfg);
ABNN_API abnn_status abnn_config_set(abnn_config* cfg, const char* key, const char* value);
ABNN_API abnn_status abnn_config_get(const abnn_config* cfg, const char* key, char** out);
ABNN_API abnn_status abnn_config_to_text(const abnn_config* cfg, char** out);
ABNN_API abnn_status abnn_config_validate(const abnn_config* cfg);

/* Settable keys, in canonical order. kind is "int", "number", "bool",
 * "string" or "list". Out-of-range indices return NULL. */
ABNN_API size_t abnn_config_key_count(void);
ABNN_API const char* abnn_config_key_name(size_t index);
ABNN_API const char* abnn_config_key_kind(size_t index);
ABNN_API const char* abnn_config_key_default(size_t index);
ABNN_API const char* abnn_config_key_help(size_t index);

/* Receives progress lines and diagnostics (stream 1) and report text
 * (stream 0). May be NULL to discard. */
typedef void (*abnn_write_fn)(void* user, int stream, const char* text, size_t len);

/* Runs the configured command. The failing stage is named in
 * abnn_last_error(). */
ABNN_API abnn_status abnn_run(const abnn_config* cfg, abnn_write_fn write, void* user);

/* Checkpoints and inference. */
ABNN_API abnn_status abnn_model_load(const char* path, abnn_model** out);
ABNN_API void abnn_model_free(abnn_model* model);
ABNN_API abnn_status abnn_model_info(const abnn_model* model, size_t* input_dim,
                                     size_t* classes, int* stochastic);
ABNN_API abnn_status abnn_model_provenance(const abnn_model* model, char** out);

/* Ensemble class probabilities for n row-major inputs of input_dim values;
 * probs receives n * classes values. */
ABNN_API abnn_status abnn_model_predict(const abnn_model* model, const double* inputs,
                                        size_t n, size_t m_eval, uint64_t seed,
                                        double* probs);

#ifdef __cplusplus
}
#endif

#endif /* ABNN_ABNN_H_ */
