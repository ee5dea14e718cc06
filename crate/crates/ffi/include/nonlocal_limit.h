#ifndef NONLOCAL_LIMIT_H
#define NONLOCAL_LIMIT_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum NlStatus {
  NL_STATUS_OK = 0,
  NL_STATUS_NULL_POINTER = 1,
  NL_STATUS_INVALID_UTF8 = 2,
  NL_STATUS_BUFFER_TOO_SMALL = 3,
  NL_STATUS_OUT_OF_RANGE = 4,
  NL_STATUS_DOMAIN = 10,
  NL_STATUS_MODEL = 11,
  NL_STATUS_ILL_CONDITIONED = 12,
  NL_STATUS_MODE_VIOLATION = 13,
  NL_STATUS_BLOWUP = 14,
  NL_STATUS_INCOMPATIBLE_GRIDS = 15,
  NL_STATUS_MISMATCHED_SCHEDULES = 16,
  NL_STATUS_INSUFFICIENT_SNAPSHOTS = 17,
  NL_STATUS_NEGATIVE_TEST_FUNCTION = 18,
  NL_STATUS_CONFIG = 19,
  NL_STATUS_MISSING_FILES = 20,
  NL_STATUS_IO = 21,
  NL_STATUS_PANIC = 99,
} NlStatus;

/*
 Velocity laws; `p0`, `p1` are `(v_max, s_max)` for `LINEAR` and
 `QUADRATIC`, `(v, unused)` for `CONSTANT`, `(intercept, slope)` for `AFFINE`.
 */
typedef enum NlVelocityLaw {
  NL_VELOCITY_LAW_LINEAR = 0,
  NL_VELOCITY_LAW_QUADRATIC = 1,
  NL_VELOCITY_LAW_CONSTANT = 2,
  NL_VELOCITY_LAW_AFFINE = 3,
} NlVelocityLaw;

typedef enum NlMonotonicity {
  NL_MONOTONICITY_DECREASING = 0,
  NL_MONOTONICITY_INCREASING = 1,
  NL_MONOTONICITY_SIGNED_PRODUCT = 2,
} NlMonotonicity;

typedef enum NlKernelFamily {
  NL_KERNEL_FAMILY_EXPONENTIAL = 0,
  NL_KERNEL_FAMILY_CONSTANT = 1,
} NlKernelFamily;

typedef enum NlOrientation {
  NL_ORIENTATION_DOWNSTREAM = 0,
  NL_ORIENTATION_UPSTREAM = 1,
} NlOrientation;

/*
 Per-step series of a report; each has `steps + 1` entries. `TV_W` is
 empty for local runs.
 */
typedef enum NlSeries {
  NL_SERIES_TV_Q = 0,
  NL_SERIES_TV_W = 1,
  NL_SERIES_MASS = 2,
  NL_SERIES_MIN = 3,
  NL_SERIES_MAX = 4,
  NL_SERIES_OUTFLOW = 5,
} NlSeries;

typedef struct NlCellField NlCellField;

typedef struct NlConfig NlConfig;

typedef struct NlInterfaceField NlInterfaceField;

typedef struct NlReport NlReport;

typedef struct NlVelocity NlVelocity;

/*
 One row of a sweep.
 */
typedef struct NlSweepRow {
  double eta;
  double sup_time_l1_q_vs_ref;
  double sup_time_l1_w_vs_ref;
  double tv_w_max;
  double tv_q_final;
  double wq_identity_gap;
} NlSweepRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the calling thread's last error message into `buf` (NUL
 terminated, truncated to `len`) and returns the full message length
 including the terminator. `buf` may be null to query the length.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t nl_last_error_message(char *buf, size_t len);

/*
 Cell field on `[x_min, x_max]` with `n_cells` values and far-field states.

 # Safety
 `values` must point to `n_cells` doubles; `out` must be writable.
 */
enum NlStatus nl_cell_field_new(double x_min,
                                double x_max,
                                size_t n_cells,
                                double left_farfield,
                                double right_farfield,
                                const double *values,
                                struct NlCellField **out);

/*
 Exact cell averages of a piecewise-constant profile; far-fields are the
 profile's outer levels. `levels` has `n_breakpoints + 1` entries.

 # Safety
 Array pointers must be valid for their lengths; `out` must be writable.
 */
enum NlStatus nl_cell_field_sample_profile(double x_min,
                                           double x_max,
                                           size_t n_cells,
                                           const double *breakpoints,
                                           size_t n_breakpoints,
                                           const double *levels,
                                           struct NlCellField **out);

/*
 Number of cells; 0 for a null handle.

 # Safety
 `field` must be null or a live handle.
 */
size_t nl_cell_field_len(const struct NlCellField *field);

/*
 Copies the cell values into `dst`, which must hold at least `len` cells.

 # Safety
 `field` must be a live handle and `dst` valid for `capacity` doubles.
 */
enum NlStatus nl_cell_field_values(const struct NlCellField *field, double *dst, size_t capacity);

/*
 Total variation including the seams to both far-field states.

 # Safety
 `field` must be a live handle; `out` must be writable.
 */
enum NlStatus nl_cell_field_total_variation(const struct NlCellField *field, double *out);

/*
 # Safety
 `field` must be null or a handle not freed before.
 */
void nl_cell_field_free(struct NlCellField *field);

/*
 Number of interfaces (`n_cells + 1`); 0 for a null handle.

 # Safety
 `field` must be null or a live handle.
 */
size_t nl_interface_field_len(const struct NlInterfaceField *field);

/*
 # Safety
 `field` must be a live handle and `dst` valid for `capacity` doubles.
 */
enum NlStatus nl_interface_field_values(const struct NlInterfaceField *field,
                                        double *dst,
                                        size_t capacity);

/*
 # Safety
 `field` must be a live handle; `out` must be writable.
 */
enum NlStatus nl_interface_field_total_variation(const struct NlInterfaceField *field, double *out);

/*
 # Safety
 `field` must be null or a handle not freed before.
 */
void nl_interface_field_free(struct NlInterfaceField *field);

/*
 Downstream exponential-kernel average of `q` at every interface.

 # Safety
 `q` must be a live handle; `out` must be writable.
 */
enum NlStatus nl_nonlocal_exponential(const struct NlCellField *q,
                                      double eta,
                                      struct NlInterfaceField **out);

/*
 Downstream constant-kernel average of `q` at every interface.

 # Safety
 `q` must be a live handle; `out` must be writable.
 */
enum NlStatus nl_nonlocal_constant(const struct NlCellField *q,
                                   double eta,
                                   struct NlInterfaceField **out);

/*
 Inverse of [`nl_nonlocal_exponential`].

 # Safety
 `w` must be a live handle; `out` must be writable.
 */
enum NlStatus nl_reconstruct_density(const struct NlInterfaceField *w,
                                     double eta,
                                     struct NlCellField **out);

/*
 `V(s) = 1 - s` on `[0, 1]`.

 # Safety
 `out` must be writable.
 */
enum NlStatus nl_velocity_greenshields(struct NlVelocity **out);

/*
 Velocity model on the admissible range `[s_min, s_max]`; the declared
 monotonicity is checked.

 # Safety
 `out` must be writable.
 */
enum NlStatus nl_velocity_new(enum NlVelocityLaw law,
                              double p0,
                              double p1,
                              double s_min,
                              double s_max,
                              enum NlMonotonicity mode,
                              struct NlVelocity **out);

/*
 # Safety
 `velocity` must be null or a handle not freed before.
 */
void nl_velocity_free(struct NlVelocity *velocity);

/*
 Upwind run of the nonlocal law from `q0` to `t_end`, recording snapshots
 at the `n_times` sorted `times`.

 # Safety
 Handles must be live, `times` valid for `n_times` doubles and `out` writable.
 */
enum NlStatus nl_solve_nonlocal(const struct NlCellField *q0,
                                const struct NlVelocity *velocity,
                                enum NlKernelFamily family,
                                enum NlOrientation orientation,
                                double eta,
                                double cfl,
                                double t_end,
                                const double *times,
                                size_t n_times,
                                struct NlReport **out);

/*
 Godunov run of the local law `q_t + (V(q) q)_x = 0`.

 # Safety
 Handles must be live, `times` valid for `n_times` doubles and `out` writable.
 */
enum NlStatus nl_solve_local(const struct NlCellField *q0,
                             const struct NlVelocity *velocity,
                             double cfl,
                             double t_end,
                             const double *times,
                             size_t n_times,
                             struct NlReport **out);

/*
 Number of time steps taken; 0 for a null handle.

 # Safety
 `report` must be null or a live handle.
 */
size_t nl_report_steps(const struct NlReport *report);

/*
 Time step used; NaN for a null handle.

 # Safety
 `report` must be null or a live handle.
 */
double nl_report_dt(const struct NlReport *report);

/*
 Accumulated `∫ (F_out - F_in) dt` over the run; NaN for a null handle.

 # Safety
 `report` must be null or a live handle.
 */
double nl_report_boundary_flux_integral(const struct NlReport *report);

/*
 # Safety
 `report` must be null or a live handle.
 */
size_t nl_report_snapshot_count(const struct NlReport *report);

/*
 Time of the step at which snapshot `index` was recorded.

 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum NlStatus nl_report_snapshot_time(const struct NlReport *report, size_t index, double *out);

/*
 New handle holding the density of snapshot `index`.

 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum NlStatus nl_report_snapshot_q(const struct NlReport *report,
                                   size_t index,
                                   struct NlCellField **out);

/*
 New handle holding the nonlocal term of snapshot `index`; fails with
 `NL_STATUS_DOMAIN` for local runs.

 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum NlStatus nl_report_snapshot_w(const struct NlReport *report,
                                   size_t index,
                                   struct NlInterfaceField **out);

/*
 Length of a per-step series.

 # Safety
 `report` must be null or a live handle.
 */
size_t nl_report_series_len(const struct NlReport *report, enum NlSeries which);

/*
 Copies a per-step series into `dst`.

 # Safety
 `report` must be a live handle and `dst` valid for `capacity` doubles.
 */
enum NlStatus nl_report_series(const struct NlReport *report,
                               enum NlSeries which,
                               double *dst,
                               size_t capacity);

/*
 # Safety
 `report` must be null or a handle not freed before.
 */
void nl_report_free(struct NlReport *report);

/*
 Parses a TOML experiment description (NUL-terminated UTF-8).

 # Safety
 `document` must be a NUL-terminated string; `out` must be writable.
 */
enum NlStatus nl_config_parse(const char *document, struct NlConfig **out);

/*
 Number of entries in the config's eta_list.

 # Safety
 `config` must be null or a live handle.
 */
size_t nl_config_eta_count(const struct NlConfig *config);

/*
 # Safety
 `config` must be null or a handle not freed before.
 */
void nl_config_free(struct NlConfig *config);

/*
 Runs the sweep, writing its CSV files below `out_dir`, and copies one
 row per η into `rows` (which must hold `nl_config_eta_count` rows).
 `written` receives the number of rows.

 # Safety
 `config` must be a live handle, `out_dir` a NUL-terminated path, `rows`
 valid for `capacity` rows and `written` writable.
 */
enum NlStatus nl_run_sweep(const struct NlConfig *config,
                           const char *out_dir,
                           struct NlSweepRow *rows,
                           size_t capacity,
                           size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NONLOCAL_LIMIT_H */
