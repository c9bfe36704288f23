#ifndef FRACLIM_H
#define FRACLIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes shared by every entry point.
typedef enum FraclimStatus {
  FRACLIM_STATUS_OK = 0,
  FRACLIM_STATUS_NULL_POINTER = 1,
  FRACLIM_STATUS_INVALID_ARGUMENT = 2,
  FRACLIM_STATUS_DIMENSION_MISMATCH = 3,
  FRACLIM_STATUS_NOT_INTEGRABLE = 4,
  FRACLIM_STATUS_BUDGET_TOO_SMALL = 5,
  FRACLIM_STATUS_UNSUPPORTED_DIMENSION = 6,
  FRACLIM_STATUS_NON_CONVERGENT = 7,
  FRACLIM_STATUS_NUMERICAL = 8,
  FRACLIM_STATUS_PANIC = 9,
} FraclimStatus;

// Opaque engine configuration.
typedef struct FraclimEngine FraclimEngine;

// Opaque scalar field.
typedef struct FraclimField FraclimField;

// Opaque vector potential.
typedef struct FraclimPotential FraclimPotential;

// Energy estimate with its error budget.
typedef struct FraclimEstimate {
  double value;
  // One standard error; zero for the deterministic engine.
  double stat_error;
  // Bound on the far-field mass omitted beyond `r_max`.
  double trunc_error;
  double r_min;
  double r_max;
  uint64_t samples;
  uint64_t evaluations;
} FraclimEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *fraclim_last_error(void);

// Library version as a static NUL-terminated string.
const char *fraclim_version(void);

// Parses a field spec such as `gaussian:w=1` or `indicator:ball:r=1` in
// dimension `n`.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum FraclimStatus fraclim_field_parse(const char *spec, size_t n, struct FraclimField **out);

// Gaussian e^{−|x|²/w²} in dimension `n`.
//
// # Safety
// `out` must be writable.
enum FraclimStatus fraclim_field_gaussian(size_t n, double width, struct FraclimField **out);

// Indicator of the ball of `radius` about `center[0..n]`.
//
// # Safety
// `center` must point to `n` doubles; `out` must be writable.
enum FraclimStatus fraclim_field_indicator_ball(size_t n,
                                                const double *center,
                                                double radius,
                                                struct FraclimField **out);

// Indicator of the box with corners `lower[0..n]` and `upper[0..n]`.
//
// # Safety
// `lower` and `upper` must point to `n` doubles; `out` must be writable.
enum FraclimStatus fraclim_field_indicator_box(size_t n,
                                               const double *lower,
                                               const double *upper,
                                               struct FraclimField **out);

// Releases a field; null is ignored.
//
// # Safety
// `field` must come from this library and not be used afterwards.
void fraclim_field_free(struct FraclimField *field);

// Parses a potential spec such as `potential:rotational:b=2`.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum FraclimStatus fraclim_potential_parse(const char *spec,
                                           size_t n,
                                           struct FraclimPotential **out);

// A ≡ 0 in dimension `n`.
//
// # Safety
// `out` must be writable.
enum FraclimStatus fraclim_potential_zero(size_t n, struct FraclimPotential **out);

// Constant potential `a[0..n]`.
//
// # Safety
// `a` must point to `n` doubles; `out` must be writable.
enum FraclimStatus fraclim_potential_constant(size_t n,
                                              const double *a,
                                              struct FraclimPotential **out);

// Releases a potential; null is ignored.
//
// # Safety
// `potential` must come from this library and not be used afterwards.
void fraclim_potential_free(struct FraclimPotential *potential);

// Deterministic engine with default cutoffs.
//
// # Safety
// `out` must be writable.
enum FraclimStatus fraclim_engine_det(struct FraclimEngine **out);

// Monte Carlo engine; results depend only on (`budget`, `seed`, `shards`).
//
// # Safety
// `out` must be writable.
enum FraclimStatus fraclim_engine_mc(uint64_t budget,
                                     uint64_t seed,
                                     size_t shards,
                                     struct FraclimEngine **out);

// Sets the outer truncation radius.
//
// # Safety
// `engine` must be a live handle.
enum FraclimStatus fraclim_engine_set_r_max(struct FraclimEngine *engine, double r_max);

// Releases an engine; null is ignored.
//
// # Safety
// `engine` must come from this library and not be used afterwards.
void fraclim_engine_free(struct FraclimEngine *engine);

// Magnetic Gagliardo energy of `field` under `potential` at (p, s).
//
// # Safety
// Handles must be live; `out` must be writable.
enum FraclimStatus fraclim_energy(const struct FraclimField *field,
                                  const struct FraclimPotential *potential,
                                  double p,
                                  double s,
                                  const struct FraclimEngine *engine,
                                  struct FraclimEstimate *out);

// s-perimeter of the region behind an indicator field.
//
// # Safety
// Handles must be live; `out` must be writable.
enum FraclimStatus fraclim_perimeter(const struct FraclimField *field,
                                     const struct FraclimPotential *potential,
                                     double s,
                                     const struct FraclimEngine *engine,
                                     struct FraclimEstimate *out);

// 4π^{n/2}/(pΓ(n/2)).
//
// # Safety
// `out` must be writable.
enum FraclimStatus fraclim_ms_constant(size_t n, double p, double *out);

// ∫_{S^{n−1}}|ω·σ|^p dσ / p.
//
// # Safety
// `out` must be writable.
enum FraclimStatus fraclim_bbm_constant(double p, size_t n, double *out);

// Fractional Laplacian normalization c(n, s).
//
// # Safety
// `out` must be writable.
enum FraclimStatus fraclim_cns_normalization(size_t n, double s, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACLIM_H */
