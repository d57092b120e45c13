#ifndef SEMFIELD_H
#define SEMFIELD_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_NULL_ARGUMENT = 1,
  SF_STATUS_INVALID_UTF8 = 2,
  SF_STATUS_IO = 3,
  SF_STATUS_PARSE = 4,
  SF_STATUS_INVALID_PARAMETER = 5,
  SF_STATUS_OUT_OF_RANGE = 6,
  SF_STATUS_BUFFER_TOO_SMALL = 7,
  SF_STATUS_EMPTY_SEMANTIC_COLUMN = 8,
  SF_STATUS_NO_CONVERGENCE = 9,
  SF_STATUS_PANIC = 10,
} SfStatus;

typedef enum SfPolysemy {
  SF_POLYSEMY_FULL = 0,
  SF_POLYSEMY_FRACTIONAL = 1,
} SfPolysemy;

typedef enum SfReducedCoords {
  SF_REDUCED_COORDS_WHITENED = 0,
  SF_REDUCED_COORDS_SCALED = 1,
} SfReducedCoords;

typedef struct SfCorpus SfCorpus;

typedef struct SfDendrogram SfDendrogram;

typedef struct SfLexicon SfLexicon;

typedef struct SfMatrix SfMatrix;

typedef struct SfSvd SfSvd;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call on this thread.
const char *sf_last_error_message(void);

// Releases a string returned by a `*_to_json` function.
//
// # Safety
// `s` must come from this library and not have been freed.
void sf_string_free(char *s);

// Number of semantic fields (41).
size_t sf_field_count(void);

// Static name of field `id`, or null when out of range.
const char *sf_field_name(uint8_t id);

// Loads a `field_name<TAB>word word ...` file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum SfStatus sf_lexicon_load_plain(const char *path, struct SfLexicon **out);

// Builds a lexicon from the `data.noun` and `data.verb` files in `dir`.
//
// # Safety
// `dir` must be a NUL-terminated string; `out` must be writable.
enum SfStatus sf_lexicon_build_wordnet(const char *dir, struct SfLexicon **out);

// Number of word forms.
//
// # Safety
// `lexicon` must be a live handle or null (which yields 0).
size_t sf_lexicon_len(const struct SfLexicon *lexicon);

// Field ids of `token`, ascending. An unknown token yields length 0.
//
// # Safety
// `fields` must hold `cap` bytes (or be null with `cap == 0`).
enum SfStatus sf_lexicon_lookup(const struct SfLexicon *lexicon,
                                const char *token,
                                uint8_t *fields,
                                size_t cap,
                                size_t *out_len);

// # Safety
// See [`sf_string_free`]; `out` receives a caller-owned string.
enum SfStatus sf_lexicon_to_json(const struct SfLexicon *lexicon, char **out);

// # Safety
// `lexicon` must come from this library and not have been freed.
void sf_lexicon_free(struct SfLexicon *lexicon);

// Ingests `root/<author>/<title>.txt`.
//
// # Safety
// `root` must be a NUL-terminated string; `out` must be writable.
enum SfStatus sf_corpus_ingest(const char *root, struct SfCorpus **out);

// Number of documents.
//
// # Safety
// `corpus` must be a live handle or null (which yields 0).
size_t sf_corpus_len(const struct SfCorpus *corpus);

// # Safety
// See [`sf_string_free`]; `out` receives a caller-owned string.
enum SfStatus sf_corpus_to_json(const struct SfCorpus *corpus, char **out);

// # Safety
// `corpus` must come from this library and not have been freed.
void sf_corpus_free(struct SfCorpus *corpus);

// Builds the column-normalized field × document matrix.
//
// # Safety
// Handles must be live; `out` must be writable.
enum SfStatus sf_matrix_build(const struct SfCorpus *corpus,
                              const struct SfLexicon *lexicon,
                              enum SfPolysemy polysemy,
                              struct SfMatrix **out);

// Writes the number of fields (rows) and documents (columns).
//
// # Safety
// `matrix` must be live; `rows` and `cols` must be writable.
enum SfStatus sf_matrix_dims(const struct SfMatrix *matrix, size_t *rows, size_t *cols);

// Copies column `j` (one document's field frequencies).
//
// # Safety
// `values` must hold `cap` doubles.
enum SfStatus sf_matrix_column(const struct SfMatrix *matrix,
                               size_t j,
                               double *values,
                               size_t cap,
                               size_t *out_len);

// # Safety
// See [`sf_string_free`]; `out` receives a caller-owned string.
enum SfStatus sf_matrix_to_json(const struct SfMatrix *matrix, char **out);

// # Safety
// `matrix` must come from this library and not have been freed.
void sf_matrix_free(struct SfMatrix *matrix);

// Factors the matrix to its numerical rank.
//
// # Safety
// `matrix` must be live; `out` must be writable.
enum SfStatus sf_svd_compute(const struct SfMatrix *matrix, struct SfSvd **out);

// Numerical rank.
//
// # Safety
// `svd` must be a live handle or null (which yields 0).
size_t sf_svd_rank(const struct SfSvd *svd);

// Copies the singular values, descending.
//
// # Safety
// `sigma` must hold `cap` doubles.
enum SfStatus sf_svd_sigma(const struct SfSvd *svd, double *sigma, size_t cap, size_t *out_len);

// Projects a field-space vector of length `len` onto the `k` leading
// singular directions, writing `k` coordinates.
//
// # Safety
// `vector` must hold `len` doubles and `coords` `cap` doubles.
enum SfStatus sf_svd_project(const struct SfSvd *svd,
                             size_t k,
                             enum SfReducedCoords mode,
                             const double *vector,
                             size_t len,
                             double *coords,
                             size_t cap,
                             size_t *out_len);

// # Safety
// `svd` must come from this library and not have been freed.
void sf_svd_free(struct SfSvd *svd);

// Clusters `n` row-major points of dimension `dim` down to one cluster.
//
// # Safety
// `points` must hold `n * dim` doubles; `out` must be writable.
enum SfStatus sf_ward_cluster(const double *points,
                              size_t n,
                              size_t dim,
                              struct SfDendrogram **out);

// Number of leaves.
//
// # Safety
// `dendrogram` must be a live handle or null (which yields 0).
size_t sf_dendrogram_leaves(const struct SfDendrogram *dendrogram);

// Number of merges.
//
// # Safety
// `dendrogram` must be a live handle or null (which yields 0).
size_t sf_dendrogram_merges(const struct SfDendrogram *dendrogram);

// Merge `i`: it joins nodes `left < right` into node `n_leaves + i` of
// `size` leaves at merge cost `height`.
//
// # Safety
// All out-pointers must be writable.
enum SfStatus sf_dendrogram_merge(const struct SfDendrogram *dendrogram,
                                  size_t i,
                                  size_t *left,
                                  size_t *right,
                                  double *height,
                                  size_t *size);

// Cuts into `n_clusters` and writes one cluster id per leaf.
//
// # Safety
// `labels` must hold `cap` values.
enum SfStatus sf_dendrogram_cut(const struct SfDendrogram *dendrogram,
                                size_t n_clusters,
                                size_t *labels,
                                size_t cap,
                                size_t *out_len);

// # Safety
// See [`sf_string_free`]; `out` receives a caller-owned string.
enum SfStatus sf_dendrogram_to_json(const struct SfDendrogram *dendrogram, char **out);

// # Safety
// `dendrogram` must come from this library and not have been freed.
void sf_dendrogram_free(struct SfDendrogram *dendrogram);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMFIELD_H */
