//! C ABI over `nonlocal-limit`.
//!
//! Objects cross the boundary as opaque handles created by `nl_*_new` style
//! functions and released with the matching `nl_*_free`. Every fallible call
//! returns an [`NlStatus`]; on failure the message is available from
//! [`nl_last_error_message`] on the same thread. Results are written through
//! out-pointers, which are left untouched on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nonlocal_limit::diagnostics::total_variation;
use nonlocal_limit::harness::{parse_config, run_sweep, ExperimentConfig};
use nonlocal_limit::{
    nonlocal_constant, nonlocal_exponential, reconstruct_density, sample_profile, solve_local,
    solve_nonlocal, CellField, Error, FluxModel, Grid1D, InterfaceField, KernelFamily, KernelSpec,
    Monotonicity, NonlocalSchemeConfig, Orientation, PiecewiseConstantProfile, RunReport,
    VelocityLaw, VelocityModel,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    BufferTooSmall = 3,
    OutOfRange = 4,
    Domain = 10,
    Model = 11,
    IllConditioned = 12,
    ModeViolation = 13,
    Blowup = 14,
    IncompatibleGrids = 15,
    MismatchedSchedules = 16,
    InsufficientSnapshots = 17,
    NegativeTestFunction = 18,
    Config = 19,
    MissingFiles = 20,
    Io = 21,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlKernelFamily {
    Exponential = 0,
    Constant = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlOrientation {
    Downstream = 0,
    Upstream = 1,
}

/// Velocity laws; `p0`, `p1` are `(v_max, s_max)` for `LINEAR` and
/// `QUADRATIC`, `(v, unused)` for `CONSTANT`, `(intercept, slope)` for `AFFINE`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlVelocityLaw {
    Linear = 0,
    Quadratic = 1,
    Constant = 2,
    Affine = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlMonotonicity {
    Decreasing = 0,
    Increasing = 1,
    SignedProduct = 2,
}

/// Per-step series of a report; each has `steps + 1` entries. `TV_W` is
/// empty for local runs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlSeries {
    TvQ = 0,
    TvW = 1,
    Mass = 2,
    Min = 3,
    Max = 4,
    Outflow = 5,
}

/// One row of a sweep.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NlSweepRow {
    pub eta: f64,
    pub sup_time_l1_q_vs_ref: f64,
    pub sup_time_l1_w_vs_ref: f64,
    pub tv_w_max: f64,
    pub tv_q_final: f64,
    pub wq_identity_gap: f64,
}

pub struct NlCellField(CellField);
pub struct NlInterfaceField(InterfaceField);
pub struct NlVelocity(VelocityModel);
pub struct NlReport(RunReport);
pub struct NlConfig(ExperimentConfig);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Utf8(&'static str),
    TooSmall { needed: usize, given: usize },
    OutOfRange { index: usize, len: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn status_of(e: &Error) -> NlStatus {
    match e {
        Error::Domain(_) => NlStatus::Domain,
        Error::Model(_) => NlStatus::Model,
        Error::IllConditioned { .. } => NlStatus::IllConditioned,
        Error::ModeViolation { .. } => NlStatus::ModeViolation,
        Error::Blowup { .. } => NlStatus::Blowup,
        Error::Run { source, .. } => status_of(source),
        Error::IncompatibleGrids(_) => NlStatus::IncompatibleGrids,
        Error::MismatchedSchedules(_) => NlStatus::MismatchedSchedules,
        Error::InsufficientSnapshots(_) => NlStatus::InsufficientSnapshots,
        Error::NegativeTestFunction { .. } => NlStatus::NegativeTestFunction,
        Error::Config { .. } => NlStatus::Config,
        Error::MissingFiles(_) => NlStatus::MissingFiles,
        Error::Io { .. } => NlStatus::Io,
        // The core error enum may grow; report unknown kinds as domain errors.
        #[allow(unreachable_patterns)]
        _ => NlStatus::Domain,
    }
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            NlStatus::Ok
        }
        Ok(Err(failure)) => {
            let (status, msg) = match failure {
                Failure::Core(e) => (status_of(&e), e.to_string()),
                Failure::Null(what) => (NlStatus::NullPointer, format!("{what} is null")),
                Failure::Utf8(what) => (NlStatus::InvalidUtf8, format!("{what} is not UTF-8")),
                Failure::TooSmall { needed, given } => (
                    NlStatus::BufferTooSmall,
                    format!("buffer holds {given} values, {needed} needed"),
                ),
                Failure::OutOfRange { index, len } => (
                    NlStatus::OutOfRange,
                    format!("index {index} out of range for length {len}"),
                ),
            };
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NlStatus::Panic
        }
    }
}

unsafe fn obj<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, capacity: usize) -> Result<(), Failure> {
    if capacity < src.len() {
        return Err(Failure::TooSmall {
            needed: src.len(),
            given: capacity,
        });
    }
    if src.is_empty() {
        return Ok(());
    }
    if dst.is_null() {
        return Err(Failure::Null("dst"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(what))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`) and returns the full message length
/// including the terminator. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn nl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Cell field on `[x_min, x_max]` with `n_cells` values and far-field states.
///
/// # Safety
/// `values` must point to `n_cells` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_cell_field_new(
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    left_farfield: f64,
    right_farfield: f64,
    values: *const f64,
    out: *mut *mut NlCellField,
) -> NlStatus {
    guard(|| {
        let grid = Grid1D::new(x_min, x_max, n_cells, left_farfield, right_farfield)?;
        let values = slice(values, n_cells, "values")?.to_vec();
        put(out, NlCellField(CellField::new(grid, values)?))
    })
}

/// Exact cell averages of a piecewise-constant profile; far-fields are the
/// profile's outer levels. `levels` has `n_breakpoints + 1` entries.
///
/// # Safety
/// Array pointers must be valid for their lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_cell_field_sample_profile(
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    breakpoints: *const f64,
    n_breakpoints: usize,
    levels: *const f64,
    out: *mut *mut NlCellField,
) -> NlStatus {
    guard(|| {
        let profile = PiecewiseConstantProfile::new(
            slice(breakpoints, n_breakpoints, "breakpoints")?.to_vec(),
            slice(levels, n_breakpoints + 1, "levels")?.to_vec(),
        )?;
        let grid = Grid1D::new(
            x_min,
            x_max,
            n_cells,
            profile.left_level(),
            profile.right_level(),
        )?;
        put(out, NlCellField(sample_profile(&profile, &grid)))
    })
}

/// Number of cells; 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_cell_field_len(field: *const NlCellField) -> usize {
    field.as_ref().map_or(0, |f| f.0.len())
}

/// Copies the cell values into `dst`, which must hold at least `len` cells.
///
/// # Safety
/// `field` must be a live handle and `dst` valid for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn nl_cell_field_values(
    field: *const NlCellField,
    dst: *mut f64,
    capacity: usize,
) -> NlStatus {
    guard(|| copy_out(obj(field, "field")?.0.values(), dst, capacity))
}

/// Total variation including the seams to both far-field states.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_cell_field_total_variation(
    field: *const NlCellField,
    out: *mut f64,
) -> NlStatus {
    guard(|| write_scalar(out, total_variation(&obj(field, "field")?.0)))
}

/// # Safety
/// `field` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn nl_cell_field_free(field: *mut NlCellField) {
    free(field)
}

/// Number of interfaces (`n_cells + 1`); 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_interface_field_len(field: *const NlInterfaceField) -> usize {
    field.as_ref().map_or(0, |f| f.0.len())
}

/// # Safety
/// `field` must be a live handle and `dst` valid for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn nl_interface_field_values(
    field: *const NlInterfaceField,
    dst: *mut f64,
    capacity: usize,
) -> NlStatus {
    guard(|| copy_out(obj(field, "field")?.0.values(), dst, capacity))
}

/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_interface_field_total_variation(
    field: *const NlInterfaceField,
    out: *mut f64,
) -> NlStatus {
    guard(|| write_scalar(out, total_variation(&obj(field, "field")?.0)))
}

/// # Safety
/// `field` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn nl_interface_field_free(field: *mut NlInterfaceField) {
    free(field)
}

unsafe fn write_scalar<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = value;
    Ok(())
}

/// Downstream exponential-kernel average of `q` at every interface.
///
/// # Safety
/// `q` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_nonlocal_exponential(
    q: *const NlCellField,
    eta: f64,
    out: *mut *mut NlInterfaceField,
) -> NlStatus {
    guard(|| {
        put(
            out,
            NlInterfaceField(nonlocal_exponential(&obj(q, "q")?.0, eta)?),
        )
    })
}

/// Downstream constant-kernel average of `q` at every interface.
///
/// # Safety
/// `q` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_nonlocal_constant(
    q: *const NlCellField,
    eta: f64,
    out: *mut *mut NlInterfaceField,
) -> NlStatus {
    guard(|| {
        put(
            out,
            NlInterfaceField(nonlocal_constant(&obj(q, "q")?.0, eta)?),
        )
    })
}

/// Inverse of [`nl_nonlocal_exponential`].
///
/// # Safety
/// `w` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_reconstruct_density(
    w: *const NlInterfaceField,
    eta: f64,
    out: *mut *mut NlCellField,
) -> NlStatus {
    guard(|| put(out, NlCellField(reconstruct_density(&obj(w, "w")?.0, eta)?)))
}

/// `V(s) = 1 - s` on `[0, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_velocity_greenshields(out: *mut *mut NlVelocity) -> NlStatus {
    guard(|| put(out, NlVelocity(VelocityModel::greenshields())))
}

/// Velocity model on the admissible range `[s_min, s_max]`; the declared
/// monotonicity is checked.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_velocity_new(
    law: NlVelocityLaw,
    p0: f64,
    p1: f64,
    s_min: f64,
    s_max: f64,
    mode: NlMonotonicity,
    out: *mut *mut NlVelocity,
) -> NlStatus {
    guard(|| {
        let law = match law {
            NlVelocityLaw::Linear => VelocityLaw::Linear {
                v_max: p0,
                s_max: p1,
            },
            NlVelocityLaw::Quadratic => VelocityLaw::Quadratic {
                v_max: p0,
                s_max: p1,
            },
            NlVelocityLaw::Constant => VelocityLaw::Constant { v: p0 },
            NlVelocityLaw::Affine => VelocityLaw::Affine {
                intercept: p0,
                slope: p1,
            },
        };
        let mode = match mode {
            NlMonotonicity::Decreasing => Monotonicity::Decreasing,
            NlMonotonicity::Increasing => Monotonicity::Increasing,
            NlMonotonicity::SignedProduct => Monotonicity::SignedProduct,
        };
        put(
            out,
            NlVelocity(VelocityModel::new(law, s_min, s_max, mode)?),
        )
    })
}

/// # Safety
/// `velocity` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn nl_velocity_free(velocity: *mut NlVelocity) {
    free(velocity)
}

/// Upwind run of the nonlocal law from `q0` to `t_end`, recording snapshots
/// at the `n_times` sorted `times`.
///
/// # Safety
/// Handles must be live, `times` valid for `n_times` doubles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nl_solve_nonlocal(
    q0: *const NlCellField,
    velocity: *const NlVelocity,
    family: NlKernelFamily,
    orientation: NlOrientation,
    eta: f64,
    cfl: f64,
    t_end: f64,
    times: *const f64,
    n_times: usize,
    out: *mut *mut NlReport,
) -> NlStatus {
    guard(|| {
        let family = match family {
            NlKernelFamily::Exponential => KernelFamily::Exponential,
            NlKernelFamily::Constant => KernelFamily::Constant,
        };
        let orientation = match orientation {
            NlOrientation::Downstream => Orientation::Downstream,
            NlOrientation::Upstream => Orientation::Upstream,
        };
        let cfg = NonlocalSchemeConfig::new(
            KernelSpec::new(family, eta, orientation)?,
            obj(velocity, "velocity")?.0,
            cfl,
            t_end,
            slice(times, n_times, "times")?.to_vec(),
        )?;
        put(out, NlReport(solve_nonlocal(&obj(q0, "q0")?.0, &cfg)?))
    })
}

/// Godunov run of the local law `q_t + (V(q) q)_x = 0`.
///
/// # Safety
/// Handles must be live, `times` valid for `n_times` doubles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nl_solve_local(
    q0: *const NlCellField,
    velocity: *const NlVelocity,
    cfl: f64,
    t_end: f64,
    times: *const f64,
    n_times: usize,
    out: *mut *mut NlReport,
) -> NlStatus {
    guard(|| {
        let flux = FluxModel::new(obj(velocity, "velocity")?.0)?;
        let times = slice(times, n_times, "times")?;
        put(
            out,
            NlReport(solve_local(&obj(q0, "q0")?.0, &flux, cfl, t_end, times)?),
        )
    })
}

/// Number of time steps taken; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_report_steps(report: *const NlReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.steps)
}

/// Time step used; NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_report_dt(report: *const NlReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.dt_used)
}

/// Accumulated `∫ (F_out - F_in) dt` over the run; NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_report_boundary_flux_integral(report: *const NlReport) -> f64 {
    report
        .as_ref()
        .map_or(f64::NAN, |r| r.0.boundary_flux_integral)
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_report_snapshot_count(report: *const NlReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.snapshots.len())
}

/// Time of the step at which snapshot `index` was recorded.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_report_snapshot_time(
    report: *const NlReport,
    index: usize,
    out: *mut f64,
) -> NlStatus {
    guard(|| {
        let snaps = &obj(report, "report")?.0.snapshots;
        let snap = snaps.get(index).ok_or(Failure::OutOfRange {
            index,
            len: snaps.len(),
        })?;
        write_scalar(out, snap.time)
    })
}

/// New handle holding the density of snapshot `index`.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_report_snapshot_q(
    report: *const NlReport,
    index: usize,
    out: *mut *mut NlCellField,
) -> NlStatus {
    guard(|| {
        let snaps = &obj(report, "report")?.0.snapshots;
        let snap = snaps.get(index).ok_or(Failure::OutOfRange {
            index,
            len: snaps.len(),
        })?;
        put(out, NlCellField(snap.q.clone()))
    })
}

/// New handle holding the nonlocal term of snapshot `index`; fails with
/// `NL_STATUS_DOMAIN` for local runs.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_report_snapshot_w(
    report: *const NlReport,
    index: usize,
    out: *mut *mut NlInterfaceField,
) -> NlStatus {
    guard(|| {
        let snaps = &obj(report, "report")?.0.snapshots;
        let snap = snaps.get(index).ok_or(Failure::OutOfRange {
            index,
            len: snaps.len(),
        })?;
        let w = snap
            .w
            .clone()
            .ok_or_else(|| Error::Domain("local runs carry no nonlocal term".into()))?;
        put(out, NlInterfaceField(w))
    })
}

fn series(report: &RunReport, which: NlSeries) -> &[f64] {
    match which {
        NlSeries::TvQ => &report.tv_q_series,
        NlSeries::TvW => &report.tv_w_series,
        NlSeries::Mass => &report.mass_series,
        NlSeries::Min => &report.min_series,
        NlSeries::Max => &report.max_series,
        NlSeries::Outflow => &report.outflow_series,
    }
}

/// Length of a per-step series.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_report_series_len(report: *const NlReport, which: NlSeries) -> usize {
    report.as_ref().map_or(0, |r| series(&r.0, which).len())
}

/// Copies a per-step series into `dst`.
///
/// # Safety
/// `report` must be a live handle and `dst` valid for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn nl_report_series(
    report: *const NlReport,
    which: NlSeries,
    dst: *mut f64,
    capacity: usize,
) -> NlStatus {
    guard(|| copy_out(series(&obj(report, "report")?.0, which), dst, capacity))
}

/// # Safety
/// `report` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn nl_report_free(report: *mut NlReport) {
    free(report)
}

/// Parses a TOML experiment description (NUL-terminated UTF-8).
///
/// # Safety
/// `document` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_config_parse(
    document: *const c_char,
    out: *mut *mut NlConfig,
) -> NlStatus {
    guard(|| put(out, NlConfig(parse_config(text(document, "document")?)?)))
}

/// Number of entries in the config's eta_list.
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_config_eta_count(config: *const NlConfig) -> usize {
    config.as_ref().map_or(0, |c| c.0.eta_list.len())
}

/// # Safety
/// `config` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn nl_config_free(config: *mut NlConfig) {
    free(config)
}

/// Runs the sweep, writing its CSV files below `out_dir`, and copies one
/// row per η into `rows` (which must hold `nl_config_eta_count` rows).
/// `written` receives the number of rows.
///
/// # Safety
/// `config` must be a live handle, `out_dir` a NUL-terminated path, `rows`
/// valid for `capacity` rows and `written` writable.
#[no_mangle]
pub unsafe extern "C" fn nl_run_sweep(
    config: *const NlConfig,
    out_dir: *const c_char,
    rows: *mut NlSweepRow,
    capacity: usize,
    written: *mut usize,
) -> NlStatus {
    guard(|| {
        let cfg = &obj(config, "config")?.0;
        let out = Path::new(text(out_dir, "out_dir")?);
        if written.is_null() {
            return Err(Failure::Null("written"));
        }
        if capacity < cfg.eta_list.len() {
            return Err(Failure::TooSmall {
                needed: cfg.eta_list.len(),
                given: capacity,
            });
        }
        if rows.is_null() {
            return Err(Failure::Null("rows"));
        }
        let outcome = run_sweep(cfg, out)?;
        for (k, r) in outcome.rows.iter().enumerate() {
            *rows.add(k) = NlSweepRow {
                eta: r.eta,
                sup_time_l1_q_vs_ref: r.sup_time_l1_q_vs_ref,
                sup_time_l1_w_vs_ref: r.sup_time_l1_w_vs_ref,
                tv_w_max: r.tv_w_max,
                tv_q_final: r.tv_q_final,
                wq_identity_gap: r.wq_identity_gap,
            };
        }
        *written = outcome.rows.len();
        Ok(())
    })
}
