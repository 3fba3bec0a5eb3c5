#ifndef NTOPICS_H
#define NTOPICS_H

/* Generated by cbindgen; run `cargo build -p ntopics-ffi` to regenerate. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this API.
 */
typedef enum NtStatus {
  /**
   * The call succeeded.
   */
  NT_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  NT_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  NT_STATUS_INVALID_UTF8 = 2,
  /**
   * The model file could not be opened or read.
   */
  NT_STATUS_IO = 3,
  /**
   * The model file is not a valid serialized model.
   */
  NT_STATUS_PARSE = 4,
  /**
   * The model or a derived value failed an internal consistency check.
   */
  NT_STATUS_DATA = 5,
  /**
   * An argument value is out of range for this model.
   */
  NT_STATUS_INVALID_ARGUMENT = 6,
  /**
   * A caller-provided buffer has the wrong length.
   */
  NT_STATUS_BUFFER_TOO_SMALL = 7,
  /**
   * An internal panic was caught at the boundary.
   */
  NT_STATUS_PANIC = 8,
} NtStatus;

/**
 * An opened topic model plus the text-preprocessing policy applied to
 * inference queries.
 */
typedef struct NtModel NtModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Opens a model file written by the `ntopics` trainer and stores a handle
 * in `*out_model`. On failure `*out_model` is untouched.
 *
 * # Safety
 * `path` must point to a NUL-terminated string and `out_model` to writable
 * memory for one pointer. The returned handle must be released exactly
 * once with [`nt_model_free`].
 */
enum NtStatus nt_model_open(const char *path, struct NtModel **out_model);

/**
 * Releases a handle returned by [`nt_model_open`]. NULL is a no-op.
 *
 * # Safety
 * `model` must be NULL or a handle from [`nt_model_open`] that has not
 * been freed before, and no other thread may be using it.
 */
void nt_model_free(struct NtModel *model);

/**
 * Number of topics in the model; 0 if `model` is NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle from [`nt_model_open`].
 */
uint32_t nt_model_num_topics(const struct NtModel *model);

/**
 * Number of vocabulary terms in the model; 0 if `model` is NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle from [`nt_model_open`].
 */
uint32_t nt_model_vocab_size(const struct NtModel *model);

/**
 * Infers the topic mixture of one raw narrative and writes it to
 * `out_theta[0..theta_len]`.
 *
 * The text goes through the same preprocessing as training input; tokens
 * outside the model vocabulary are skipped. When nothing usable remains,
 * the mixture is uniform at 1/K. `theta_len` must equal the model's topic
 * count. `sweeps` sets the length of the sampling chain; 0 means the
 * model's training default. Equal inputs with equal `seed` give
 * bit-identical output.
 *
 * # Safety
 * `model` must be a live handle, `text` a NUL-terminated string, and
 * `out_theta` writable for `theta_len` doubles.
 */
enum NtStatus nt_infer_text(const struct NtModel *model,
                            const char *text,
                            uint32_t sweeps,
                            uint64_t seed,
                            double *out_theta,
                            size_t theta_len);

/**
 * Writes the `num_terms` most probable terms of one topic to `*out_json`
 * as a JSON array of `{"term": ..., "probability": ...}` objects in
 * descending probability order. `num_terms` larger than the vocabulary
 * returns the whole vocabulary.
 *
 * # Safety
 * `model` must be a live handle and `out_json` writable for one pointer.
 * The returned string must be released with [`nt_string_free`].
 */
enum NtStatus nt_top_terms_json(const struct NtModel *model,
                                uint32_t topic,
                                size_t num_terms,
                                char **out_json);

/**
 * Releases a string returned through an out-parameter of this API. NULL
 * is a no-op.
 *
 * # Safety
 * `s` must be NULL or a string returned by this API that has not been
 * freed before.
 */
void nt_string_free(char *s);

/**
 * Message of the most recent failing call on this thread, NUL-terminated;
 * the empty string if nothing failed yet. The pointer stays valid until
 * the next failing call on the same thread.
 */
const char *nt_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NTOPICS_H */
