#ifndef TAGPROJ_H
#define TAGPROJ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define TP_SIDE_SOURCE 0

#define TP_SIDE_TARGET 1

#define TP_MODE_BINARY 0

#define TP_MODE_ITF 1

#define TP_EVAL_PROJECTION 0

#define TP_EVAL_HOLDOUT 1

// Result code of every fallible call.
typedef enum TpStatus {
  TP_STATUS_OK = 0,
  TP_STATUS_NULL_POINTER = 1,
  TP_STATUS_INVALID_UTF8 = 2,
  TP_STATUS_INVALID_ARGUMENT = 3,
  TP_STATUS_PARSE = 4,
  TP_STATUS_VALIDATION = 5,
  TP_STATUS_ALIGNMENT = 6,
  TP_STATUS_CONFIG = 7,
  TP_STATUS_DOMAIN = 8,
  TP_STATUS_SHAPE = 9,
  TP_STATUS_UNKNOWN_WORD = 10,
  TP_STATUS_NOT_FOUND = 11,
  TP_STATUS_IO = 12,
  TP_STATUS_PANIC = 13,
} TpStatus;

// A sentence-aligned corpus with an annotated source side.
typedef struct TpCorpus TpCorpus;

// Word-by-phrase representation of one corpus side.
typedef struct TpMatrix TpMatrix;

// Scores of a single run.
typedef struct TpRunMetrics {
  double precision;
  double recall;
  double f1;
} TpRunMetrics;

// Protocol settings. Start from [`tp_hyperparams_default`].
typedef struct TpHyperParams {
  size_t h1;
  size_t h2;
  size_t epochs;
  size_t k;
  size_t r;
  double learning_rate;
  size_t batch_size;
  uint64_t seed;
  // `TP_MODE_BINARY` or `TP_MODE_ITF`.
  uint32_t mode;
  // `TP_EVAL_PROJECTION` or `TP_EVAL_HOLDOUT`.
  uint32_t eval_mode;
} TpHyperParams;

// Mean and sample standard deviation over `iterations` runs.
typedef struct TpMetrics {
  double precision_mean;
  double precision_std;
  double recall_mean;
  double recall_std;
  double f1_mean;
  double f1_std;
  size_t iterations;
} TpMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a
// successful call. The pointer stays valid until the next call into the
// library from the same thread.
const char *tp_last_error(void);

// Library version as a static NUL-terminated string.
const char *tp_version(void);

// Loads `source.conll` plus `target.conll` or `target.txt` from `dir`.
//
// # Safety
// `dir` must be a NUL-terminated string and `out` a writable pointer.
enum TpStatus tp_corpus_load_dir(const char *dir, struct TpCorpus **out);

// Builds a corpus from in-memory text. The source is two-column CoNLL;
// the target is CoNLL when `target_annotated` is true, otherwise one
// space-separated phrase per line.
//
// # Safety
// Both strings must be NUL-terminated and `out` writable.
enum TpStatus tp_corpus_from_text(const char *source_conll,
                                  const char *target,
                                  bool target_annotated,
                                  struct TpCorpus **out);

// # Safety
// `corpus` must come from this library and not be used afterwards.
// Null is ignored.
void tp_corpus_free(struct TpCorpus *corpus);

// # Safety
// `corpus` must be a live handle and `out` writable.
enum TpStatus tp_corpus_phrase_count(const struct TpCorpus *corpus, size_t *out);

// Number of tags, the outside tag included.
//
// # Safety
// `corpus` must be a live handle and `out` writable.
enum TpStatus tp_corpus_tag_count(const struct TpCorpus *corpus, size_t *out);

// Distinct words on one side (`TP_SIDE_SOURCE` or `TP_SIDE_TARGET`).
//
// # Safety
// `corpus` must be a live handle and `out` writable.
enum TpStatus tp_corpus_vocabulary_size(const struct TpCorpus *corpus, uint32_t side, size_t *out);

// # Safety
// `corpus` must be a live handle and `out` writable.
enum TpStatus tp_matrix_build(const struct TpCorpus *corpus,
                              uint32_t side,
                              uint32_t mode,
                              struct TpMatrix **out);

// # Safety
// `matrix` must come from this library and not be used afterwards.
// Null is ignored.
void tp_matrix_free(struct TpMatrix *matrix);

// Number of rows (distinct words).
//
// # Safety
// `matrix` must be a live handle and `out` writable.
enum TpStatus tp_matrix_word_count(const struct TpMatrix *matrix, size_t *out);

// Row length, equal to the number of aligned phrases.
//
// # Safety
// `matrix` must be a live handle and `out` writable.
enum TpStatus tp_matrix_dimension(const struct TpMatrix *matrix, size_t *out);

// Row index of `word`; fails with `UnknownWord` if absent.
//
// # Safety
// `matrix` must be a live handle, `word` NUL-terminated, `out` writable.
enum TpStatus tp_matrix_word_id(const struct TpMatrix *matrix, const char *word, size_t *out);

// Copies row `word_id` into `buffer`, which must hold at least
// `tp_matrix_dimension` values; `capacity` is its length.
//
// # Safety
// `matrix` must be a live handle and `buffer` valid for `capacity` writes.
enum TpStatus tp_matrix_row(const struct TpMatrix *matrix,
                            size_t word_id,
                            double *buffer,
                            size_t capacity);

// Inverse term frequency weight of a word seen `term_frequency` times.
//
// # Safety
// `out` must be writable.
enum TpStatus tp_itf(uint64_t term_frequency, double *out);

// Precision, recall and F1 from outcome counts; zero denominators give 0.
//
// # Safety
// `out` must be writable.
enum TpStatus tp_prf(uint64_t true_positives,
                     uint64_t false_positives,
                     uint64_t false_negatives,
                     struct TpRunMetrics *out);

// Fills `out` with the library's baseline settings.
//
// # Safety
// `out` must be writable.
enum TpStatus tp_hyperparams_default(struct TpHyperParams *out);

// Runs the repeated k-fold protocol. Deterministic for a given seed.
//
// # Safety
// `corpus` must be a live handle, `params` readable and `out` writable.
enum TpStatus tp_run_protocol(const struct TpCorpus *corpus,
                              const struct TpHyperParams *params,
                              struct TpMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAGPROJ_H */
