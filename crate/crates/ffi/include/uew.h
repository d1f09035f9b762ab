#ifndef UEW_H
#define UEW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/**
 * Result codes. The first four match the command-line exit codes.
 */
typedef enum UewStatus {
  UEW_STATUS_OK = 0,
  UEW_STATUS_INVALID_INPUT = 1,
  UEW_STATUS_NO_CONVERGENCE = 2,
  UEW_STATUS_INFEASIBLE = 3,
  UEW_STATUS_NULL_POINTER = 4,
  UEW_STATUS_PANIC = 5,
} UewStatus;

/**
 * Half-space selector for [`uew_pc`].
 */
typedef enum UewSide {
  UEW_SIDE_LEQ = 0,
  UEW_SIDE_GEQ = 1,
} UewSide;

/**
 * Measurement reading for the worked example builders.
 */
typedef enum UewPovm {
  UEW_POVM_COMPLETE = 0,
  UEW_POVM_PRINTED = 1,
} UewPovm;

/**
 * Opaque Hermitian operator on a bipartite space.
 */
typedef struct UewOperator UewOperator;

/**
 * Opaque density matrix on a bipartite space.
 */
typedef struct UewState UewState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *uew_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len - 1` bytes) and returns the full length
 * in bytes without the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t uew_last_error_message(char *buf, size_t len);

/**
 * Parses an operator from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out_op` must be writable.
 */
enum UewStatus uew_operator_from_json(const char *json, struct UewOperator **out_op);

/**
 * Builds an operator from row-major real and imaginary parts of length
 * `(d_a·d_b)²`. `im` may be null for a real matrix.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `(d_a·d_b)²` doubles.
 */
enum UewStatus uew_operator_from_arrays(size_t d_a,
                                        size_t d_b,
                                        const double *re,
                                        const double *im,
                                        struct UewOperator **out_op);

/**
 * Releases an operator handle. Null is ignored.
 *
 * # Safety
 * `op` must come from this library and not be used afterwards.
 */
void uew_operator_free(struct UewOperator *op);

/**
 * Writes the two local dimensions of an operator.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UewStatus uew_operator_dims(const struct UewOperator *op, size_t *d_a, size_t *d_b);

/**
 * Parses a density matrix from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out_state` must be writable.
 */
enum UewStatus uew_state_from_json(const char *json, struct UewState **out_state);

/**
 * Builds a density matrix from row-major parts; checked for unit trace
 * and positivity.
 *
 * # Safety
 * As for [`uew_operator_from_arrays`].
 */
enum UewStatus uew_state_from_arrays(size_t d_a,
                                     size_t d_b,
                                     const double *re,
                                     const double *im,
                                     struct UewState **out_state);

/**
 * Releases a state handle. Null is ignored.
 *
 * # Safety
 * `state` must come from this library and not be used afterwards.
 */
void uew_state_free(struct UewState *state);

/**
 * `Tr(op·state)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UewStatus uew_expectation(const struct UewOperator *op,
                               const struct UewState *state,
                               double *value);

/**
 * Supremum of `⟨a,b|L|a,b⟩` over product states. `restarts = 0` selects
 * the default. `converged` may be null.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UewStatus uew_gs(const struct UewOperator *test,
                      uint32_t restarts,
                      uint64_t seed,
                      double *value,
                      bool *converged);

/**
 * Supremum over product states with `Tr(Cρ) ≤ c` or `≥ c`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UewStatus uew_pc(const struct UewOperator *test,
                      const struct UewOperator *constraint,
                      double c,
                      enum UewSide side,
                      uint32_t restarts,
                      uint64_t seed,
                      double *value);

/**
 * Test and constraint operators of the two-qubit worked example.
 *
 * # Safety
 * Output pointers must be writable.
 */
enum UewStatus uew_example31_operators(double x,
                                       enum UewPovm povm,
                                       struct UewOperator **out_test,
                                       struct UewOperator **out_constraint);

/**
 * Member `(p/4)·I + (1-p)|φ⟩⟨φ|` of the worked example's noisy family.
 *
 * # Safety
 * `out_state` must be writable.
 */
enum UewStatus uew_example31_state(double p, struct UewState **out_state);

/**
 * Applies the witness pair to `state`. `alpha` selects the rotation: NaN
 * for the plain pair, `-INFINITY` for the limit witness, otherwise a
 * finite value below 1. `entangled` and `witness_value` may be null.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UewStatus uew_detect(const struct UewState *state,
                          const struct UewOperator *test,
                          const struct UewOperator *constraint,
                          double c,
                          double alpha,
                          uint64_t seed,
                          bool *entangled,
                          double *witness_value);

/**
 * Noise thresholds of the worked example for `n` rotation parameters
 * (`-INFINITY` for the limit witness). Writes one threshold per entry of
 * `alphas`, NaN where even the noiseless state escapes detection.
 *
 * # Safety
 * `alphas` and `thresholds` must each hold `n` doubles.
 */
enum UewStatus uew_scan_example31(double x,
                                  double c,
                                  const double *alphas,
                                  size_t n,
                                  uint64_t seed,
                                  double *thresholds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UEW_H */
