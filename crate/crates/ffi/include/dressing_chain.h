#ifndef DRESSING_CHAIN_H
#define DRESSING_CHAIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DcStatus {
  DC_STATUS_OK = 0,
  DC_STATUS_NULL_POINTER = 1,
  DC_STATUS_INVALID_ARGUMENT = 2,
  DC_STATUS_SHAPE_MISMATCH = 3,
  DC_STATUS_SINGULAR = 4,
  DC_STATUS_DEGENERATE = 5,
  DC_STATUS_NUMERICAL = 6,
  DC_STATUS_PANIC = 7,
} DcStatus;

typedef enum DcDirection {
  DC_DIRECTION_PLUS = 0,
  DC_DIRECTION_MINUS = 1,
} DcDirection;

/*
 Opaque ring element.
 */
typedef struct DcElement DcElement;

/*
 Opaque difference operator.
 */
typedef struct DcOperator DcOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. The pointer is
 valid until the next failing call on the same thread.
 */
const char *dc_last_error(void);

/*
 Builds an element from `len = sites * dim * dim * 2` interleaved doubles.

 # Safety
 `data` must point to `len` readable doubles and `out` must be writable.
 */
enum DcStatus dc_element_new(size_t sites,
                             size_t dim,
                             const double *data,
                             size_t len,
                             struct DcElement **out);

/*
 # Safety
 `e` must come from this library and not have been freed; null is ignored.
 */
void dc_element_free(struct DcElement *e);

/*
 Number of sites, or 0 for a null handle.

 # Safety
 `e` must be null or a live handle.
 */
size_t dc_element_sites(const struct DcElement *e);

/*
 Matrix size, or 0 for a null handle.

 # Safety
 `e` must be null or a live handle.
 */
size_t dc_element_dim(const struct DcElement *e);

/*
 Copies the element into `buf`, which must hold exactly
 `sites * dim * dim * 2` doubles.

 # Safety
 `e` must be a live handle and `buf` must point to `len` writable doubles.
 */
enum DcStatus dc_element_copy_data(const struct DcElement *e, double *buf, size_t len);

/*
 `(T^m f)(n) = f(n + m)`.

 # Safety
 `e` must be a live handle and `out` writable.
 */
enum DcStatus dc_element_shift(const struct DcElement *e, int64_t m, struct DcElement **out);

/*
 Sitewise inverse; fails with `Singular` if any site is ill-conditioned.

 # Safety
 `e` must be a live handle and `out` writable.
 */
enum DcStatus dc_element_inverse(const struct DcElement *e, struct DcElement **out);

/*
 Operator `sum_m coeffs[m - low] T^m`. The coefficient handles are copied
 and stay owned by the caller.

 # Safety
 `coeffs` must point to `count` live element handles and `out` be writable.
 */
enum DcStatus dc_operator_new(int64_t low,
                              const struct DcElement *const *coeffs,
                              size_t count,
                              struct DcOperator **out);

/*
 # Safety
 `op` must come from this library and not have been freed; null is ignored.
 */
void dc_operator_free(struct DcOperator *op);

/*
 # Safety
 `op` and `psi` must be live handles and `out` writable.
 */
enum DcStatus dc_operator_apply(const struct DcOperator *op,
                                const struct DcElement *psi,
                                struct DcElement **out);

/*
 Dresses `op` with the seed `(phi, mu)` in a stationary frame and writes
 `|| L1 psi1 - psi1 lambda || / max(1, ||psi1||)` for a second solution
 `(psi, lambda)` of `L psi = psi lambda`.

 # Safety
 All handles must be live and `residual` writable.
 */
enum DcStatus dc_dt_covariance(const struct DcOperator *op,
                               const struct DcElement *phi,
                               const struct DcElement *mu,
                               enum DcDirection direction,
                               const struct DcElement *psi,
                               const struct DcElement *lambda,
                               double *residual);

/*
 Runs the verification suite with default settings except for `sites`,
 `dim` and `seed`, and returns the JSON report in `out` (free it with
 [`dc_string_free`]). `passed` receives 1 if every check passed, else 0.

 # Safety
 `out` and `passed` must be writable.
 */
enum DcStatus dc_verify_json(size_t sites, size_t dim, uint64_t seed, char **out, int32_t *passed);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void dc_string_free(char *s);

/*
 Library version as a static nul-terminated string.
 */
const char *dc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRESSING_CHAIN_H */
