/* C ABI for the repstab library.
 *
 * Generated with cbindgen from crates/repstab-ffi (see cbindgen.toml); kept
 * in sync by hand when the mirror has no cbindgen available.
 *
 * Conventions:
 *   - constructors write through an out-pointer and return RepstabStatus;
 *     a non-zero status means failure and *out is untouched,
 *   - handles are opaque and freed by the matching *_free function,
 *   - rich results come back as JSON strings owned by the library; release
 *     them with repstab_string_free,
 *   - repstab_last_error_message() describes the most recent failure on the
 *     calling thread, valid until the next repstab call on that thread.
 */

#ifndef REPSTAB_H
#define REPSTAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum RepstabStatus {
  REPSTAB_OK = 0,
  REPSTAB_NULL_POINTER = 1,
  REPSTAB_INVALID_ARGUMENT = 2,
  REPSTAB_INVALID_SPEC = 3,
  REPSTAB_PRECONDITION = 4,
  REPSTAB_NUMERICAL = 5,
  REPSTAB_IO = 6,
  REPSTAB_UTF8 = 7,
  REPSTAB_PANIC = 8,
} RepstabStatus;

typedef struct RepstabGroup RepstabGroup;

typedef struct RepstabIrrepTable RepstabIrrepTable;

typedef struct RepstabMatrixFn RepstabMatrixFn;

#ifdef __cplusplus
extern "C" {
#endif  /* __cplusplus */

/**
 * Thread-local message describing the most recent failure on this thread.
 * Valid until the next repstab call from the same thread.
 */
const char *repstab_last_error_message(void);

/**
 * Frees a string allocated by this library.
 */
void repstab_string_free(char *s);

/**
 * Builds a validated group from a spec string such as "quaternion" or
 * "product(cyclic:2,symmetric:3)".
 */
RepstabStatus repstab_group_build(const char *spec, RepstabGroup **out);

size_t repstab_group_order(const RepstabGroup *group);

void repstab_group_free(RepstabGroup *group);

/**
 * Parses a MatrixFn from its JSON wire form
 * { "group": spec, "n": n, "values": [matrix, ...] }.
 */
RepstabStatus repstab_matrixfn_load_json(const char *json, RepstabMatrixFn **out);

/**
 * Loads a MatrixFn from a JSON file on disk.
 */
RepstabStatus repstab_matrixfn_load_file(const char *path, RepstabMatrixFn **out);

/**
 * Serializes a MatrixFn back to its JSON wire form.
 */
RepstabStatus repstab_matrixfn_to_json(const RepstabMatrixFn *f, char **out);

size_t repstab_matrixfn_dim(const RepstabMatrixFn *f);

void repstab_matrixfn_free(RepstabMatrixFn *f);

/**
 * Decomposes the regular representation; deterministic for a fixed seed.
 */
RepstabStatus repstab_irreps_compute(const RepstabGroup *group,
                                     uint64_t seed,
                                     RepstabIrrepTable **out);

size_t repstab_irrep_table_len(const RepstabIrrepTable *table);

/**
 * Dimension of the idx-th irrep; 0 when idx is out of range.
 */
size_t repstab_irrep_table_dim(const RepstabIrrepTable *table, size_t idx);

/**
 * Schur delta residual certifying completeness; NaN for a null handle.
 */
double repstab_irrep_table_schur_residual(const RepstabIrrepTable *table);

void repstab_irrep_table_free(RepstabIrrepTable *table);

/**
 * Fourth power of the U2 norm. Pass a table to use the Fourier route
 * (required for groups of order above the direct-path cap); pass NULL to
 * average over the constrained quadruples directly.
 */
RepstabStatus repstab_u2_norm4(const RepstabMatrixFn *f,
                               const RepstabIrrepTable *table,
                               double *out);

/**
 * Exact defect maximum; `affine` selects the quadruple flavor and
 * `relaxed` admits non-unitary contractions.
 */
RepstabStatus repstab_defect(const RepstabMatrixFn *f,
                             int32_t affine,
                             double p,
                             int32_t relaxed,
                             double *out);

/**
 * Runs the inverse theorem at threshold c and returns a JSON payload
 * {"m", "correlation", "tau4_bound", "m_window", "u", "v", "p"}.
 */
RepstabStatus repstab_inverse_theorem_json(const RepstabMatrixFn *f,
                                           const RepstabIrrepTable *table,
                                           double c,
                                           char **out);

/**
 * Runs the stabilization pipeline and returns the report JSON
 * {"epsilon","p","m","n","bound","max_distance","per_element","window","passed"}.
 */
RepstabStatus repstab_stabilize_json(const RepstabMatrixFn *f,
                                     const RepstabIrrepTable *table,
                                     double p,
                                     int32_t affine,
                                     int32_t relaxed,
                                     int32_t force,
                                     char **out);

/**
 * Certifies approximate uniqueness for two nearby representations and
 * returns {"epsilon","common_dim","t_prime_dist","three_eps",
 * "intertwining_residual","cluster_gap_ratio"}.
 */
RepstabStatus repstab_uniqueness_json(const RepstabMatrixFn *rho,
                                      const RepstabMatrixFn *sigma,
                                      double p,
                                      char **out);

#ifdef __cplusplus
}  /* extern "C" */
#endif  /* __cplusplus */

#endif  /* REPSTAB_H */
