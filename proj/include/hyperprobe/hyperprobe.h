// Copyright 2026 The hyperprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to the hyperprobe toolkit.
 *
 * Every function returns an hp_status. On failure a description is available
 * from hp_last_error() on the same thread until the next call. Strings
 * returned through char** outputs are owned by the caller and released with
 * hp_string_free(). Options and configurations travel as JSON objects;
 * unknown keys are usage errors. */

#ifndef HYPERPROBE_H_
#define HYPERPROBE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HP_API __declspec(dllexport)
#else
#define HP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hp_status {
  HP_OK = 0,
  HP_ERR_USAGE = 1,
  HP_ERR_DATA = 2,
  HP_ERR_NUMERICAL = 3,
  HP_ERR_INTERNAL = 4
} hp_status;

typedef struct hp_model hp_model;
typedef struct hp_syntax_corpus hp_syntax_corpus;
typedef struct hp_sentiment_corpus hp_sentiment_corpus;

HP_API const char* hp_version(void);
HP_API const char* hp_last_error(void);
HP_API void hp_string_free(char* s);

/* Hex SHA-256 of a file's contents. */
HP_API hp_status hp_sha256_file(const char* path, char** hex);

/* ---- corpora ---------------------------------------------------------- */

/* max_length 0 keeps the default cap of 60 tokens. summary_json may be NULL. */
HP_API hp_status hp_syntax_corpus_load(const char* treebank, const char* embeddings,
                                       size_t max_length, hp_syntax_corpus** out,
                                       char** summary_json);
HP_API size_t hp_syntax_corpus_size(const hp_syntax_corpus* corpus);
HP_API void hp_syntax_corpus_free(hp_syntax_corpus* corpus);

HP_API hp_status hp_sentiment_corpus_load(const char* labels, const char* embeddings,
                                          size_t max_length, hp_sentiment_corpus** out,
                                          char** summary_json);
HP_API size_t hp_sentiment_corpus_size(const hp_sentiment_corpus* corpus);
HP_API void hp_sentiment_corpus_free(hp_sentiment_corpus* corpus);

/* Writes a generated corpus: CoNLL-U or label TSV plus a PEMB file.
 * kind is "syntax" or "sentiment". */
HP_API hp_status hp_synth(const char* kind, const char* options_json, const char* text_path,
                          const char* embeddings_path, char** summary_json);

/* ---- training --------------------------------------------------------- */

/* Fills in defaults and validates; the result lists every key. */
HP_API hp_status hp_resolve_train_config(const char* config_json, char** resolved_json);

/* The log is the tab-separated epoch table without wall times; the summary
 * holds best epoch, dev loss, stop reason and timing. A diverged run still
 * returns HP_OK with the last good model and "diverged": true. */
HP_API hp_status hp_train_syntax(const char* config_json, const hp_syntax_corpus* train,
                                 const hp_syntax_corpus* dev, hp_model** model, char** log_tsv,
                                 char** summary_json);
HP_API hp_status hp_train_sentiment(const char* config_json, const hp_sentiment_corpus* train,
                                    const hp_sentiment_corpus* dev, hp_model** model,
                                    char** log_tsv, char** summary_json);

/* ---- models ----------------------------------------------------------- */

HP_API hp_status hp_model_load(const char* path, hp_model** out);
HP_API hp_status hp_model_save(const hp_model* model, const char* path);
HP_API void hp_model_free(hp_model* model);
/* Replaces or appends a metadata entry stored with the checkpoint. */
HP_API hp_status hp_model_set_metadata(hp_model* model, const char* key, const char* value);
/* Task, geometry, dimensions, curvature, flags and metadata. */
HP_API hp_status hp_model_info(const hp_model* model, char** info_json);

/* ---- evaluation ------------------------------------------------------- */

/* Options: include_punct, macro_uuas, threads, layer. */
HP_API hp_status hp_evaluate_syntax(const hp_model* model, const hp_syntax_corpus* corpus,
                                    const char* options_json, char** report_json);
HP_API hp_status hp_evaluate_sentiment(const hp_model* model, const hp_sentiment_corpus* corpus,
                                       const char* options_json, char** report_json);
/* Per-word mean logit gap, most positive first, as TSV. */
HP_API hp_status hp_rank_words(const hp_model* model, const hp_sentiment_corpus* corpus,
                               char** words_tsv);

/* Request keys: kind ("syntax" or "sentiment"), axis, grid, config (train
 * config), eval (evaluation options), train_text, train_embeddings,
 * dev_text, dev_embeddings, max_length. For the layer axis the embedding
 * paths may contain "{layer}". */
HP_API hp_status hp_sweep(const char* request_json, char** report_json, char** report_tsv);

/* Options: seed, tolerance, step, sentences, corrupt (test hook). Writes
 * passed = 1 when every case is within tolerance. */
HP_API hp_status hp_gradcheck(const char* options_json, char** report_json, int* passed);

/* ---- figures ---------------------------------------------------------- */

/* Options: include_punct (syntax), significance (sentiment). */
HP_API hp_status hp_viz_syntax(const hp_model* model, const hp_syntax_corpus* corpus,
                               size_t index, const char* options_json, char** svg,
                               char** scene_tsv);
HP_API hp_status hp_viz_sentiment(const hp_model* model, const hp_sentiment_corpus* corpus,
                                  size_t index, const char* options_json, char** svg,
                                  char** scene_tsv);

#ifdef __cplusplus
}
#endif

#endif /* HYPERPROBE_H_ */
