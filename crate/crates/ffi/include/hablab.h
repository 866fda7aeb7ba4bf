#ifndef HABLAB_H
#define HABLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Values below 100 mirror the library's error classes.
typedef enum HablabStatus {
  HABLAB_STATUS_OK = 0,
  HABLAB_STATUS_NULL_POINTER = 1,
  HABLAB_STATUS_INVALID_UTF8 = 2,
  HABLAB_STATUS_BUFFER_TOO_SMALL = 3,
  HABLAB_STATUS_PARSE = 10,
  HABLAB_STATUS_GEOMETRY = 11,
  HABLAB_STATUS_INVALID_PARAMETER = 12,
  HABLAB_STATUS_PRECONDITION = 13,
  HABLAB_STATUS_NON_CONVERGENCE = 20,
  HABLAB_STATUS_LINEAR_SOLVE = 21,
  HABLAB_STATUS_UNSTABLE = 22,
  HABLAB_STATUS_NOT_SIGN_DEFINITE = 23,
  HABLAB_STATUS_CLASSIFICATION_MISMATCH = 24,
  HABLAB_STATUS_NOT_BRACKETED = 25,
  HABLAB_STATUS_IO = 30,
  HABLAB_STATUS_PANIC = 100,
} HablabStatus;

// Opaque grid handle. Keeps its own copy of the landscape.
typedef struct HablabGrid HablabGrid;

// Opaque landscape handle.
typedef struct HablabLandscape HablabLandscape;

typedef struct HablabThreshold {
  bool exists;
  // NaN when no threshold exists.
  double c0;
  double mu_infinity;
  double c_star;
  size_t iterations;
} HablabThreshold;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer stays
// valid until the next call into this library from the same thread.
const char *hablab_last_error(void);

// Library version as a static NUL-terminated string.
const char *hablab_version(void);

// Parse a TOML scenario.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a writable pointer.
enum HablabStatus hablab_landscape_from_toml(const char *toml, struct HablabLandscape **out);

// # Safety
// `l` must come from [`hablab_landscape_from_toml`] and not be used afterwards.
void hablab_landscape_free(struct HablabLandscape *l);

// `(1/|B|) ∫_{Ω∖B} m`, the lower bound for any extinction threshold.
//
// # Safety
// `l` must be a live landscape handle and `out` writable.
enum HablabStatus hablab_landscape_c_star(const struct HablabLandscape *l, double *out);

// # Safety
// `l` must be a live landscape handle and `out` writable.
enum HablabStatus hablab_landscape_fraction_removed(const struct HablabLandscape *l, double *out);

// Discretize with `nodes_per_axis` nodes along every axis.
//
// # Safety
// `l` must be a live landscape handle and `out` writable.
enum HablabStatus hablab_grid_new(const struct HablabLandscape *l,
                                  size_t nodes_per_axis,
                                  struct HablabGrid **out);

// # Safety
// `g` must come from [`hablab_grid_new`] and not be used afterwards.
void hablab_grid_free(struct HablabGrid *g);

// Total node count, 0 for a null handle.
//
// # Safety
// `g` must be null or a live grid handle.
size_t hablab_grid_len(const struct HablabGrid *g);

// Node coordinates, `dim` values per node in node order.
//
// # Safety
// `g` must be a live grid handle and `out` point to `len` writable doubles.
enum HablabStatus hablab_grid_coords(const struct HablabGrid *g, double *out, size_t len);

// Principal eigenvalue `μ₁` of `−dΔ − m_c`; `c = INFINITY` selects the
// destruction problem. The L²-normalized eigenfunction is copied to
// `eigenfunction` unless it is null.
//
// # Safety
// `g` must be a live grid handle, `mu` writable, and `eigenfunction` null or
// valid for `len` doubles.
enum HablabStatus hablab_mu(const struct HablabGrid *g,
                            double d,
                            double c,
                            double *mu,
                            double *eigenfunction,
                            size_t len);

// Positive principal eigenvalue of `Δψ + λ m_c ψ = 0`; `c = INFINITY`
// selects the problem with the hole removed.
//
// # Safety
// As for [`hablab_mu`].
enum HablabStatus hablab_lambda(const struct HablabGrid *g,
                                double c,
                                double *lambda,
                                double *eigenfunction,
                                size_t len);

// Steady state at rate `c` (`INFINITY` for destruction). `persistent` is set
// to 1 or 0; the profile is copied to `values` unless it is null.
//
// # Safety
// `g` must be a live grid handle, `persistent` writable, and `values` null
// or valid for `len` doubles.
enum HablabStatus hablab_steady_state(const struct HablabGrid *g,
                                      double d,
                                      double c,
                                      int32_t *persistent,
                                      double *values,
                                      size_t len);

// Extinction threshold in `c` for diffusion `d`.
//
// # Safety
// `g` must be a live grid handle and `out` writable.
enum HablabStatus hablab_threshold(const struct HablabGrid *g,
                                   double d,
                                   struct HablabThreshold *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HABLAB_H */
