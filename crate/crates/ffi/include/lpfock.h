#ifndef LPFOCK_H
#define LPFOCK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LpfockStatus {
  LPFOCK_STATUS_OK = 0,
  LPFOCK_STATUS_NULL_POINTER = 1,
  LPFOCK_STATUS_INVALID_ARGUMENT = 2,
  LPFOCK_STATUS_INVALID_UTF8 = 3,
  // The library rejected the input; see the last error message.
  LPFOCK_STATUS_LIBRARY = 4,
  LPFOCK_STATUS_PANIC = 5,
} LpfockStatus;

// Truncated crossed-product Fock space of a dynamical system.
typedef struct LpfockCrossed LpfockCrossed;

// Truncated Cuntz-type Fock space with a fixed exponent.
typedef struct LpfockFock LpfockFock;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *lpfock_version(void);

// Copies the last error message of this thread into `buf`, NUL-terminated.
// Returns the message length without the terminator, 0 when there is no
// error, or -1 when `buf` is too small (nothing is written then).
//
// # Safety
// `buf` must point to `len` writable bytes, or be null when `len` is 0.
intptr_t lpfock_last_error_message(char *buf, uintptr_t len);

// Certified bracket for the `p → p` operator norm of a `rows × cols` complex
// matrix given row-major. `im` may be null for a real matrix.
//
// # Safety
// `re` (and `im` when non-null) must point to `rows * cols` readable doubles.
enum LpfockStatus lpfock_matrix_norm(uintptr_t rows,
                                     uintptr_t cols,
                                     const double *re,
                                     const double *im,
                                     double p,
                                     double *lower,
                                     double *upper);

// Creates the truncation of the Fock space over `ℓ^p_d` with levels
// `0..=levels`.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum LpfockStatus lpfock_fock_new(uintptr_t d, uintptr_t levels, double p, struct LpfockFock **out);

// # Safety
// `h` must come from [`lpfock_fock_new`] and not be used afterwards. Null is
// ignored.
void lpfock_fock_free(struct LpfockFock *h);

// Dimension of the truncated space, or 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
uintptr_t lpfock_fock_dim(const struct LpfockFock *h);

// Largest residual of the three Leavitt relations on the valid window and
// the rank of the defect of the third relation.
//
// # Safety
// `h` must be a live handle; the outputs must be writable.
enum LpfockStatus lpfock_fock_leavitt(const struct LpfockFock *h,
                                      double *residual,
                                      uintptr_t *defect_rank);

// Norm bracket of the creation operator `c(x)` (or the annihilation
// operator `v(x)` when `annihilation` is true) with `x ∈ ℂ^d`.
//
// # Safety
// `h` must be a live handle; `re` (and `im` when non-null) must point to
// `d` readable doubles; the outputs must be writable.
enum LpfockStatus lpfock_fock_operator_norm(const struct LpfockFock *h,
                                            const double *re,
                                            const double *im,
                                            bool annihilation,
                                            double *lower,
                                            double *upper);

// Creates a crossed truncation from a built-in system: `m2-swap`,
// `diag2-swap` or `diag3-cyclic`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum LpfockStatus lpfock_crossed_builtin(const char *name,
                                         double p,
                                         uintptr_t levels,
                                         struct LpfockCrossed **out);

// Creates a crossed truncation from JSON documents: the algebra as
// `{"basis": [{"name", "matrix"}], "mu"?}` and the automorphism as
// `{"permutation": [...]}` or `{"matrix": ...}`.
//
// # Safety
// Both strings must be NUL-terminated; `out` must be writable.
enum LpfockStatus lpfock_crossed_from_json(const char *algebra,
                                           const char *phi,
                                           double p,
                                           uintptr_t levels,
                                           struct LpfockCrossed **out);

// # Safety
// `h` must come from one of the `lpfock_crossed_*` constructors and not be
// used afterwards. Null is ignored.
void lpfock_crossed_free(struct LpfockCrossed *h);

// Dimension of the truncated space, or 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
uintptr_t lpfock_crossed_dim(const struct LpfockCrossed *h);

// Largest residual of the covariance relations for two seeded random
// elements of the algebra.
//
// # Safety
// `h` must be a live handle; `residual` must be writable.
enum LpfockStatus lpfock_crossed_relations(const struct LpfockCrossed *h,
                                           uint64_t seed,
                                           double *residual);

// Full JSON report of the crossed truncation, the same document the
// `fock-crossed` subcommand prints. Free the string with
// [`lpfock_string_free`].
//
// # Safety
// `h` must be a live handle; `out` must be writable.
enum LpfockStatus lpfock_crossed_report(const struct LpfockCrossed *h, uint64_t seed, char **out);

// # Safety
// `s` must come from this library and not be used afterwards. Null is
// ignored.
void lpfock_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LPFOCK_H */
