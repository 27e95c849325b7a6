#ifndef DWELL4_H
#define DWELL4_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Dwell4Status {
  DWELL4_STATUS_OK = 0,
  DWELL4_STATUS_NULL_POINTER = 1,
  DWELL4_STATUS_INVALID_ARGUMENT = 2,
  DWELL4_STATUS_NUMERICAL = 3,
  DWELL4_STATUS_BUFFER_TOO_SMALL = 4,
  DWELL4_STATUS_PANIC = 5,
} Dwell4Status;

typedef enum Dwell4Regime {
  DWELL4_REGIME_RABI = 0,
  DWELL4_REGIME_MIXED = 1,
  DWELL4_REGIME_JOSEPHSON = 2,
  DWELL4_REGIME_FOCK = 3,
  DWELL4_REGIME_INVALID = 4,
} Dwell4Regime;

typedef enum Dwell4Model {
  DWELL4_MODEL_FULL = 0,
  DWELL4_MODEL_AVERAGED = 1,
  DWELL4_MODEL_TWO_MODE = 2,
} Dwell4Model;

typedef enum Dwell4Termination {
  DWELL4_TERMINATION_COMPLETED = 0,
  DWELL4_TERMINATION_BOUNDARY_HIT = 1,
  DWELL4_TERMINATION_STEP_FAILURE = 2,
  DWELL4_TERMINATION_ENERGY_DRIFT = 3,
} Dwell4Termination;

/**
 * Opaque trajectory handle.
 */
typedef struct Dwell4Trajectory Dwell4Trajectory;

/**
 * Model coefficients in recoil units; interaction terms include the atom number.
 */
typedef struct Dwell4Params {
  double e0;
  double e1;
  double j0;
  double j1;
  double nu0;
  double nu1;
  double nu01;
  double delta_e;
} Dwell4Params;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next `dwell4_` call on the same thread.
 */
const char *dwell4_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dwell4_version(void);

/**
 * Solves the double-well eigenproblem and fills `out` with the coefficients
 * at interaction strength `gamma`. Pass 0 for `grid_points` or
 * `domain_halfwidth` to use the defaults.
 *
 * # Safety
 * `out` must point to writable memory for one `Dwell4Params`.
 */
enum Dwell4Status dwell4_coefficients(double v0,
                                      double gamma,
                                      size_t grid_points,
                                      double domain_halfwidth,
                                      struct Dwell4Params *out);

/**
 * Writes `chi0`, `chi1`, `chi01` to `chi[0..3]` and the regime to `regime`.
 * `v0` enables the barrier check when positive; `n_atoms` enables the Fock
 * check when positive.
 *
 * # Safety
 * `params` must be readable, `chi` writable for three doubles and `regime`
 * writable for one value.
 */
enum Dwell4Status dwell4_classify(const struct Dwell4Params *params,
                                  double v0,
                                  double n_atoms,
                                  double *chi,
                                  enum Dwell4Regime *regime);

/**
 * Renormalized energy of `state = [z0, θ0, z1, θ1, z2, θ2]`.
 *
 * # Safety
 * `params` and `state` (six doubles) must be readable, `out` writable.
 */
enum Dwell4Status dwell4_hamiltonian(const struct Dwell4Params *params,
                                     const double *state,
                                     double *out);

/**
 * Integrates from `initial` (six doubles). Non-positive `t_end`,
 * `sample_interval`, `rel_tol` or `abs_tol` select the defaults. A run that
 * stops early still yields a handle; query its termination.
 *
 * # Safety
 * `params` and `initial` must be readable; `out` must be writable. The
 * handle written to `out` must be released with `dwell4_trajectory_free`.
 */
enum Dwell4Status dwell4_integrate(const struct Dwell4Params *params,
                                   const double *initial,
                                   enum Dwell4Model model,
                                   double t_end,
                                   double sample_interval,
                                   double rel_tol,
                                   double abs_tol,
                                   struct Dwell4Trajectory **out);

/**
 * Number of stored samples, or 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t dwell4_trajectory_len(const struct Dwell4Trajectory *traj);

/**
 * # Safety
 * `traj` must be a live handle and `out` writable.
 */
enum Dwell4Status dwell4_trajectory_termination(const struct Dwell4Trajectory *traj,
                                                enum Dwell4Termination *out);

/**
 * Copies the samples out. `times` and `energy` need `capacity` doubles,
 * `states` needs `6 * capacity`; any of them may be null to skip it.
 *
 * # Safety
 * `traj` must be a live handle; non-null buffers must be writable for the
 * sizes above.
 */
enum Dwell4Status dwell4_trajectory_copy(const struct Dwell4Trajectory *traj,
                                         double *times,
                                         double *states,
                                         double *energy,
                                         size_t capacity);

/**
 * Releases a trajectory. Null is ignored.
 *
 * # Safety
 * `traj` must be null or a handle not yet freed.
 */
void dwell4_trajectory_free(struct Dwell4Trajectory *traj);

/**
 * Fixed points of the (z1, θ1) pendulum with z0 frozen. Each root fills
 * three doubles of `out`: θ1, z1 and 1.0 (stable) or 0.0 (unstable).
 * `count` receives the number of roots even when `capacity` is too small.
 *
 * # Safety
 * `params` must be readable, `count` writable and `out` writable for
 * `3 * capacity` doubles.
 */
enum Dwell4Status dwell4_effective_fixed_points(const struct Dwell4Params *params,
                                                double z2,
                                                double z0,
                                                double *out,
                                                size_t capacity,
                                                size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DWELL4_H */
