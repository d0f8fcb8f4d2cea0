/* C interface for the lasenn toolkit. Generated; do not edit. */

#ifndef LASENN_H
#define LASENN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of a fallible call.
typedef enum LasennStatus {
  LASENN_STATUS_OK = 0,
  LASENN_STATUS_NULL_ARGUMENT = 1,
  LASENN_STATUS_INVALID_ARGUMENT = 2,
  LASENN_STATUS_IO_ERROR = 3,
  LASENN_STATUS_FORMAT_ERROR = 4,
  LASENN_STATUS_RUNTIME_ERROR = 5,
} LasennStatus;

// Distance used for neighbor lookup.
typedef enum LasennMetric {
  LASENN_METRIC_SQUARED_L2 = 0,
  LASENN_METRIC_COSINE = 1,
} LasennMetric;

// Labeled training corpus (embeddings, outputs, labels).
typedef struct LasennCorpus LasennCorpus;

// Exact nearest-neighbor index over corpus embeddings.
typedef struct LasennIndex LasennIndex;

// Trained classifier checkpoint.
typedef struct LasennModel LasennModel;

// Outcome of one combined prediction.
typedef struct LasennPrediction {
  uint32_t predicted_class;
  uint32_t native_class;
  // Nonzero when the neighbor average changed the predicted class.
  uint8_t changed;
} LasennPrediction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failing call on this thread. The pointer
// stays valid until the next failing call on the same thread. Never null.
const char *lasenn_last_error_message(void);

// Toolkit version as a static NUL-terminated string.
const char *lasenn_version(void);

// Loads a corpus from its three artifact files.
//
// # Safety
// The path arguments must be valid NUL-terminated strings and `out` a
// valid pointer.
enum LasennStatus lasenn_corpus_load(const char *embeddings_path,
                                     const char *outputs_path,
                                     const char *labels_path,
                                     struct LasennCorpus **out);

// # Safety
// `corpus` must be a pointer returned by `lasenn_corpus_load` (or null).
void lasenn_corpus_free(struct LasennCorpus *corpus);

// # Safety
// `corpus` must be a valid corpus handle.
uint64_t lasenn_corpus_rows(const struct LasennCorpus *corpus);

// # Safety
// `corpus` must be a valid corpus handle.
uint32_t lasenn_corpus_num_classes(const struct LasennCorpus *corpus);

// Builds an exact nearest-neighbor index over the corpus embeddings.
//
// # Safety
// `corpus` must be a valid corpus handle and `out` a valid pointer.
enum LasennStatus lasenn_index_build(const struct LasennCorpus *corpus,
                                     enum LasennMetric metric,
                                     struct LasennIndex **out);

// # Safety
// `index` must be a pointer returned by `lasenn_index_build` (or null).
void lasenn_index_free(struct LasennIndex *index);

// Loads a trained classifier checkpoint.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid pointer.
enum LasennStatus lasenn_model_load(const char *path, struct LasennModel **out);

// # Safety
// `model` must be a pointer returned by `lasenn_model_load` (or null).
void lasenn_model_free(struct LasennModel *model);

// Convex combination of a query output vector with the mean of its
// neighbors' output vectors: `out[i] = w_q*query[i] + (1-w_q)*mean_i`.
// `neighbor_outputs` holds `num_neighbors` rows of `len` floats each,
// row-major. `out_combined` receives `len` doubles.
//
// # Safety
// All pointers must reference buffers of the stated sizes.
enum LasennStatus lasenn_combine(const float *query_outputs,
                                 size_t len,
                                 const float *neighbor_outputs,
                                 size_t num_neighbors,
                                 double w_q,
                                 double *out_combined);

// Runs the full prediction rule for one query given its embedding and
// the model's output vector for it.
//
// # Safety
// Handles must be valid; `embedding` and `outputs` must reference
// buffers of the stated lengths; `out` must be a valid pointer.
enum LasennStatus lasenn_predict(const struct LasennCorpus *corpus,
                                 const struct LasennIndex *index,
                                 const float *embedding,
                                 size_t embedding_len,
                                 const float *outputs,
                                 size_t outputs_len,
                                 size_t k,
                                 double w_q,
                                 struct LasennPrediction *out);

// Embeds raw features through the model, finds neighbors, and combines.
// `layer` is the 1-based hidden layer; 0 selects the last hidden layer.
// With `raw_logits` nonzero the pre-softmax outputs are combined.
//
// # Safety
// Handles must be valid; `features` must reference `features_len`
// doubles; `out` must be a valid pointer.
enum LasennStatus lasenn_pipeline_predict(const struct LasennModel *model,
                                          const struct LasennCorpus *corpus,
                                          const struct LasennIndex *index,
                                          const double *features,
                                          size_t features_len,
                                          size_t k,
                                          double w_q,
                                          size_t layer,
                                          uint8_t raw_logits,
                                          struct LasennPrediction *out);

// Monte-Carlo check of the 1-D toy model: estimates the probability that
// the nearest neighbor at the shifted boundary is blue, with its
// binomial standard error and the analytic value (`0.5 + c` for the
// skewed-triangular distribution, 0.5 for the uniform one).
//
// # Safety
// The three out-pointers must be valid.
enum LasennStatus lasenn_toy_estimate(double c,
                                      double d,
                                      double a,
                                      uint64_t n,
                                      uint64_t trials,
                                      uint64_t seed,
                                      uint8_t uniform,
                                      double *out_estimate,
                                      double *out_stderr,
                                      double *out_analytic);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LASENN_H */
