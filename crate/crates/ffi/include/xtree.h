#ifndef XTREE_H
#define XTREE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum XtStatus {
  XT_STATUS_OK = 0,
  XT_STATUS_NULL_POINTER = 1,
  XT_STATUS_INVALID_ARGUMENT = 2,
  XT_STATUS_INVALID_NODE = 3,
  XT_STATUS_DOMAIN = 4,
  XT_STATUS_MALFORMED = 5,
  XT_STATUS_PARSE = 6,
  XT_STATUS_IO = 7,
  XT_STATUS_BUDGET_EXCEEDED = 8,
  XT_STATUS_ARITY_MISMATCH = 9,
  XT_STATUS_BUFFER_TOO_SMALL = 10,
  XT_STATUS_UTF8 = 11,
  XT_STATUS_PANIC = 12,
} XtStatus;

/**
 * Level order of a canonical tree.
 */
typedef enum XtOrder {
  XT_ORDER_LEX = 0,
  XT_ORDER_REVERSED = 1,
  XT_ORDER_SEEDED_SHUFFLE = 2,
} XtOrder;

/**
 * Opaque coloring.
 */
typedef struct XtColoring XtColoring;

/**
 * Opaque expanded tree.
 */
typedef struct XtTree XtTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on this thread.
 */
const char *xt_last_error_message(void);

/**
 * Build the full canonical tree of the given height and branching.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum XtStatus xt_tree_canonical(size_t height,
                                size_t branching,
                                enum XtOrder order,
                                uint64_t seed,
                                struct XtTree **out);

/**
 * Parse a tree from the text file format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum XtStatus xt_tree_from_text(const char *text, struct XtTree **out);

/**
 * Load a tree file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum XtStatus xt_tree_load(const char *path, struct XtTree **out);

/**
 * # Safety
 * `tree` must be null or a handle from this library not yet freed.
 */
void xt_tree_free(struct XtTree *tree);

/**
 * Serialize a tree; release the string with [`xt_string_free`].
 *
 * # Safety
 * `tree` must be a live handle and `out` a valid pointer.
 */
enum XtStatus xt_tree_to_text(const struct XtTree *tree, char **out);

/**
 * # Safety
 * `tree` must be a live handle and `out` a valid pointer.
 */
enum XtStatus xt_tree_node_count(const struct XtTree *tree, size_t *out);

/**
 * # Safety
 * `tree` must be a live handle and `out` a valid pointer.
 */
enum XtStatus xt_tree_meet(const struct XtTree *tree, size_t s, size_t t, size_t *out);

/**
 * The ancestor of `t` on `level`.
 *
 * # Safety
 * `tree` must be a live handle and `out` a valid pointer.
 */
enum XtStatus xt_tree_restrict(const struct XtTree *tree, size_t t, size_t level, size_t *out);

/**
 * # Safety
 * `tree` must be a live handle and `out` a valid pointer.
 */
enum XtStatus xt_tree_lex_less(const struct XtTree *tree, size_t s, size_t t, bool *out);

/**
 * Number of axiom violations.
 *
 * # Safety
 * `tree` must be a live handle and `out` a valid pointer.
 */
enum XtStatus xt_tree_validate(const struct XtTree *tree, bool strict, size_t *out);

/**
 * Closure of a node set, written to `out_nodes` in `<*` order. `out_len`
 * receives the closure size even when `capacity` is too small.
 *
 * # Safety
 * `nodes` must point to `len` readable values, `out_nodes` to `capacity`
 * writable values, and `tree`, `out_len` must be valid.
 */
enum XtStatus xt_closure(const struct XtTree *tree,
                         const size_t *nodes,
                         size_t len,
                         size_t *out_nodes,
                         size_t capacity,
                         size_t *out_len);

/**
 * Canonical string of the similarity type of a node sequence.
 *
 * # Safety
 * `nodes` must point to `len` readable values; `tree`, `out` must be valid.
 */
enum XtStatus xt_sim_type_string(const struct XtTree *tree,
                                 const size_t *nodes,
                                 size_t len,
                                 char **out);

/**
 * Number of similarity types of embedded sequences of length `n`.
 *
 * # Safety
 * `tree` must be a live handle and `out` a valid pointer.
 */
enum XtStatus xt_census_total(const struct XtTree *tree, size_t n, uint64_t budget, uint64_t *out);

/**
 * Parse a coloring from the coloring file format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum XtStatus xt_coloring_from_text(const char *text, struct XtColoring **out);

/**
 * # Safety
 * `coloring` must be null or a handle from this library not yet freed.
 */
void xt_coloring_free(struct XtColoring *coloring);

/**
 * Whether some embedding of `small` into `big` makes `coloring` depend only
 * on the similarity type of `n`-sequences.
 *
 * # Safety
 * Handles must be live and `out_holds` valid.
 */
enum XtStatus xt_check_arrow(const struct XtTree *big,
                             const struct XtTree *small,
                             size_t n,
                             const struct XtColoring *coloring,
                             bool *out_holds);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void xt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XTREE_H */
