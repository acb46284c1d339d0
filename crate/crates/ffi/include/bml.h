#ifndef BML_H
#define BML_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes. Values 2 and 4 agree with the command-line exit codes.
 */
typedef enum BmlStatus {
  BML_STATUS_OK = 0,
  /*
   A required pointer was null or a buffer too short.
   */
  BML_STATUS_NULL_ARGUMENT = 1,
  /*
   Invalid parameter, grid, configuration or input data.
   */
  BML_STATUS_INVALID_ARGUMENT = 2,
  /*
   The solver aborted (CFL failure, non-finite values).
   */
  BML_STATUS_NUMERICAL = 4,
  /*
   Any other library error.
   */
  BML_STATUS_FAILURE = 5,
  /*
   A Rust panic was caught at the boundary.
   */
  BML_STATUS_PANIC = 6,
} BmlStatus;

/*
 Opaque finite atomic measure.
 */
typedef struct BmlMeasure BmlMeasure;

/*
 Opaque solver session: a preset scenario on a fixed grid plus the result
 of its latest run.
 */
typedef struct BmlSolver BmlSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length without the NUL.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
uintptr_t bml_last_error(char *buf, uintptr_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *bml_version(void);

/*
 Builds a measure from `count` atoms at `(xs[i], ys[i])` with weights `ws[i]`.

 # Safety
 The three arrays must hold `count` values; `out_measure` must be writable.
 */
enum BmlStatus bml_measure_new(const double *xs,
                               const double *ys,
                               const double *ws,
                               uintptr_t count,
                               struct BmlMeasure **out_measure);

/*
 # Safety
 `measure` must be null or a handle from [`bml_measure_new`] not yet freed.
 */
void bml_measure_free(struct BmlMeasure *measure);

/*
 Number of atoms; 0 for a null handle.

 # Safety
 `measure` must be null or a live handle.
 */
uintptr_t bml_measure_len(const struct BmlMeasure *measure);

/*
 Total variation `sum |w_i|`.

 # Safety
 `measure` must be a live handle and `out_tv` writable.
 */
enum BmlStatus bml_measure_total_variation(const struct BmlMeasure *measure, double *out_tv);

/*
 Bounded-Lipschitz distance between two measures.

 # Safety
 Both handles must be live and `out_distance` writable.
 */
enum BmlStatus bml_bl_distance(const struct BmlMeasure *first,
                               const struct BmlMeasure *second,
                               double *out_distance);

/*
 Besov norm `B^s_{p,r}` of a grid field stored row-major (`n * n` values)
 on the box `[-half_length, half_length)^2`. Pass `INFINITY` for `p` or `r`
 to select the sup norm.

 # Safety
 `values` must hold `n * n` doubles and `out_norm` be writable.
 */
enum BmlStatus bml_besov_norm(const double *values,
                              uintptr_t n,
                              double half_length,
                              double s,
                              double p,
                              double r,
                              double *out_norm);

/*
 Creates a solver for a named scenario (`single_atom`, `two_atom`,
 `rotation_test`).

 # Safety
 `scenario` must be a NUL-terminated string and `out_solver` writable.
 */
enum BmlStatus bml_solver_new(const char *scenario,
                              uintptr_t n,
                              double half_length,
                              double dt,
                              uint32_t n_mollify,
                              double sigma,
                              struct BmlSolver **out_solver);

/*
 # Safety
 `solver` must be null or a handle from [`bml_solver_new`] not yet freed.
 */
void bml_solver_free(struct BmlSolver *solver);

/*
 Runs the scenario from its initial data to `t_final`, replacing any
 earlier result.

 # Safety
 `solver` must be a live handle.
 */
enum BmlStatus bml_solver_run(struct BmlSolver *solver, double t_final);

/*
 Number of diagnostics rows of the latest run (steps + 1); 0 before a run.

 # Safety
 `solver` must be null or a live handle.
 */
uintptr_t bml_solver_row_count(const struct BmlSolver *solver);

/*
 Number of values per diagnostics row.
 */
uintptr_t bml_diagnostics_width(void);

/*
 Copies diagnostics row `index` (columns in `diagnostics.csv` order) into
 `out_values`, which must hold [`bml_diagnostics_width`] doubles.

 # Safety
 `solver` must be a live handle and `out_values` hold `len` doubles.
 */
enum BmlStatus bml_solver_row(const struct BmlSolver *solver,
                              uintptr_t index,
                              double *out_values,
                              uintptr_t len);

/*
 Copies the final temperature (`n * n` values, row-major) into `out_values`.

 # Safety
 `solver` must be a live handle and `out_values` hold `len` doubles.
 */
enum BmlStatus bml_solver_theta(const struct BmlSolver *solver, double *out_values, uintptr_t len);

/*
 Final atom measure of the latest run as a new handle owned by the caller.

 # Safety
 `solver` must be a live handle and `out_measure` writable.
 */
enum BmlStatus bml_solver_atoms(const struct BmlSolver *solver, struct BmlMeasure **out_measure);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BML_H */
