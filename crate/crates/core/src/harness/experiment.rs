//! Single runs, η-sweeps against a local reference, and the stability probe.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use super::config::ExperimentConfig;
use super::output::{
    write_snapshots, write_tv_series, Table, DIAGNOSTICS_HEADER, PROBE_HEADER, SWEEP_HEADER,
};
use crate::diagnostics::{
    entropy_residual, sup_time_l1, sup_time_l1_nonlocal_term, transport_residual_w, weak_residual,
    wq_identity_gap, FluxMode, TensorBump, Window,
};
use crate::error::{Error, Result};
use crate::grid::{sample_profile, CellField, Grid1D};
use crate::kernel::{KernelFamily, Orientation};
use crate::local::{solve_local, FluxModel};
use crate::nonlocal::{cfl_dt, solve_nonlocal, NonlocalSchemeConfig};
use crate::report::RunReport;

/// Grids finer than this are refused rather than attempted.
const MAX_CELLS: usize = 1 << 24;

/// Target number of snapshot intervals over `[0, t_end]` for the residual
/// diagnostics.
const DIAGNOSTIC_INTERVALS: usize = 100;

/// Fractions of the initial density range used as Kruzhkov constants.
const ENTROPY_LEVELS: [f64; 3] = [0.25, 0.5, 0.75];

/// Directory name of one η run inside an output directory.
pub fn eta_dir_name(eta: f64) -> String {
    format!("eta_{eta}")
}

/// Number of solver invocations, for checking that sweeps reuse work.
#[derive(Debug, Default)]
pub struct RunCounter {
    nonlocal: AtomicUsize,
    local: AtomicUsize,
}

impl RunCounter {
    pub fn nonlocal_runs(&self) -> usize {
        self.nonlocal.load(Ordering::Relaxed)
    }

    pub fn local_runs(&self) -> usize {
        self.local.load(Ordering::Relaxed)
    }

    fn nonlocal(&self, q0: &CellField, cfg: &NonlocalSchemeConfig) -> Result<RunReport> {
        self.nonlocal.fetch_add(1, Ordering::Relaxed);
        solve_nonlocal(q0, cfg)
    }

    fn local(
        &self,
        q0: &CellField,
        flux: &FluxModel,
        cfl: f64,
        t_end: f64,
        times: &[f64],
    ) -> Result<RunReport> {
        self.local.fetch_add(1, Ordering::Relaxed);
        solve_local(q0, flux, cfl, t_end, times)
    }
}

/// Values written to `diagnostics.csv`. Entries that do not apply to the
/// configured kernel are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunDiagnostics {
    /// Largest W–q identity gap over the configured snapshots.
    pub wq_identity_gap: f64,
    pub weak_residual: f64,
    pub transport_residual_w: f64,
    /// Smallest entropy residual over the Kruzhkov constants tried.
    pub entropy_residual_min: f64,
    pub max_principle_violation: f64,
}

impl RunDiagnostics {
    pub fn rows(&self) -> [(&'static str, f64); 5] {
        [
            ("wq_identity_gap", self.wq_identity_gap),
            ("weak_residual", self.weak_residual),
            ("transport_residual_W", self.transport_residual_w),
            ("entropy_residual_min", self.entropy_residual_min),
            ("max_principle_violation", self.max_principle_violation),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SingleRun {
    pub eta: f64,
    pub grid: Grid1D,
    /// Report restricted to the configured snapshot times.
    pub report: RunReport,
    pub diagnostics: RunDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    pub sup_time_l1_q_vs_ref: f64,
    pub sup_time_l1_w_vs_ref: f64,
    pub tv_w_max: f64,
    pub tv_q_final: f64,
    pub wq_identity_gap: f64,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub reference: RunReport,
    pub runs: RunCounter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub delta: f64,
    pub sup_time_l1: f64,
}

/// Grid for one η: the base grid refined by the smallest power of two that
/// brings `dx` down to `eta / 10`.
pub fn grid_for_eta(cfg: &ExperimentConfig, eta: f64) -> Result<Grid1D> {
    let base = cfg.base_grid()?;
    let mut factor = 1;
    while base.dx() / factor as f64 > eta / 10.0 {
        factor *= 2;
        if base.n_cells() * factor > MAX_CELLS {
            return Err(Error::config(
                "eta_list",
                format!("eta = {eta} would need more than {MAX_CELLS} cells"),
            ));
        }
    }
    base.refined(factor)
}

pub fn reference_grid(cfg: &ExperimentConfig) -> Result<Grid1D> {
    cfg.base_grid()?.refined(cfg.reference_refinement)
}

fn window(cfg: &ExperimentConfig) -> Result<Window> {
    Window::new(cfg.window[0], cfg.window[1])
}

fn scheme(cfg: &ExperimentConfig, eta: f64, times: Vec<f64>) -> Result<NonlocalSchemeConfig> {
    NonlocalSchemeConfig::new(
        cfg.kernel_spec(eta)?,
        cfg.velocity_model()?,
        cfg.cfl,
        cfg.t_end,
        times,
    )
}

/// Configured times merged with an evenly spaced schedule of about
/// [`DIAGNOSTIC_INTERVALS`] intervals aligned to whole steps.
fn dense_schedule(cfg: &ExperimentConfig, dt: f64) -> Vec<f64> {
    let steps = ((cfg.t_end / dt).round() as usize).max(1);
    let stride = (steps / DIAGNOSTIC_INTERVALS).max(1);
    let mut times: Vec<f64> = (0..=steps).step_by(stride).map(|k| k as f64 * dt).collect();
    if steps % stride != 0 {
        times.push(cfg.t_end);
    }
    times.extend_from_slice(&cfg.snapshot_times);
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    // Keep the configured values exactly where they coincide with grid times.
    for t in times.iter_mut() {
        if let Some(c) = cfg
            .snapshot_times
            .iter()
            .find(|c| (**c - *t).abs() <= 1e-9 * (1.0 + c.abs()))
        {
            *t = *c;
        }
    }
    times
}

/// Test function covering most of the window and `[0, 0.9 t_end)`, reaching
/// back before `t = 0` so that the initial-datum term contributes.
fn diagnostic_test_function(cfg: &ExperimentConfig) -> Result<TensorBump> {
    let [lo, hi] = cfg.window;
    let margin = 0.1 * (hi - lo);
    TensorBump::on(
        1.0,
        -0.5 * cfg.t_end,
        0.9 * cfg.t_end,
        lo + margin,
        hi - margin,
    )
}

fn compute_diagnostics(
    cfg: &ExperimentConfig,
    eta: f64,
    dense: &RunReport,
    configured: &RunReport,
    q0: &CellField,
) -> Result<RunDiagnostics> {
    let velocity = cfg.velocity_model()?;
    let exponential = cfg.kernel_family() == KernelFamily::Exponential;
    let downstream = cfg.kernel_orientation() == Orientation::Downstream;
    let phi = diagnostic_test_function(cfg)?;

    let wq_identity_gap = if exponential {
        configured
            .snapshots
            .iter()
            .map(|s| wq_identity_gap(&s.q, s.w.as_ref().expect("nonlocal run"), eta))
            .fold(0.0, f64::max)
    } else {
        f64::NAN
    };
    let weak = weak_residual(dense, &velocity, FluxMode::Nonlocal, &phi)?;
    let transport = if exponential && downstream {
        transport_residual_w(dense, &velocity, eta)?
    } else {
        f64::NAN
    };
    let (lo, hi) = datum_range(q0);
    let entropy_residual_min = match FluxModel::new(velocity) {
        Ok(flux) => {
            let mut worst = f64::INFINITY;
            for frac in ENTROPY_LEVELS {
                worst = worst.min(entropy_residual(dense, &flux, lo + frac * (hi - lo), &phi)?);
            }
            worst
        }
        Err(_) => f64::NAN,
    };
    Ok(RunDiagnostics {
        wq_identity_gap,
        weak_residual: weak,
        transport_residual_w: transport,
        entropy_residual_min,
        max_principle_violation: dense.bound_violation(lo, hi),
    })
}

/// `[min, max]` of the initial datum including its far-field states.
fn datum_range(q0: &CellField) -> (f64, f64) {
    let g = q0.grid();
    (
        q0.min().min(g.left_farfield()).min(g.right_farfield()),
        q0.max().max(g.left_farfield()).max(g.right_farfield()),
    )
}

fn check_eta_listed(cfg: &ExperimentConfig, eta: f64) -> Result<()> {
    if cfg
        .eta_list
        .iter()
        .any(|e| (e - eta).abs() <= 1e-12 * e.abs())
    {
        Ok(())
    } else {
        Err(Error::config(
            "eta",
            format!("{eta} is not in eta_list {:?}", cfg.eta_list),
        ))
    }
}

fn single(cfg: &ExperimentConfig, eta: f64, out: &Path, runs: &RunCounter) -> Result<SingleRun> {
    let grid = grid_for_eta(cfg, eta)?;
    let q0 = sample_profile(&cfg.profile()?, &grid);
    let dt = cfl_dt(&q0, &scheme(cfg, eta, Vec::new())?)?;
    let dense = runs.nonlocal(&q0, &scheme(cfg, eta, dense_schedule(cfg, dt))?)?;
    let configured = dense.with_snapshots_at(&cfg.snapshot_times)?;
    let diagnostics = compute_diagnostics(cfg, eta, &dense, &configured, &q0)?;

    write_snapshots(&configured, &out.join("snapshots.csv"))?;
    write_tv_series(&configured, &out.join("tv_series.csv"))?;
    let mut table = Table::new(&DIAGNOSTICS_HEADER);
    for (name, value) in diagnostics.rows() {
        table.row([name.into(), value.into()]);
    }
    table.write(&out.join("diagnostics.csv"))?;
    Ok(SingleRun {
        eta,
        grid,
        report: configured,
        diagnostics,
    })
}

/// Runs the nonlocal solver for one listed `eta` and writes
/// `snapshots.csv`, `tv_series.csv` and `diagnostics.csv` into `out`.
pub fn run_single(cfg: &ExperimentConfig, eta: f64, out: &Path) -> Result<SingleRun> {
    check_eta_listed(cfg, eta)?;
    single(cfg, eta, out, &RunCounter::default()).map_err(|e| with_eta(e, eta))
}

fn with_eta(e: Error, eta: f64) -> Error {
    match e {
        Error::Run { .. } | Error::Config { .. } | Error::Io { .. } => e,
        other => Error::Run {
            eta,
            source: Box::new(other),
        },
    }
}

/// Fine-grid Godunov solution on the configured schedule.
fn reference_run(cfg: &ExperimentConfig, runs: &RunCounter) -> Result<RunReport> {
    let grid = reference_grid(cfg)?;
    let q0 = sample_profile(&cfg.profile()?, &grid);
    let flux = FluxModel::new(cfg.velocity_model()?)
        .map_err(|e| Error::config("velocity", e.to_string()))?;
    runs.local(&q0, &flux, cfg.cfl, cfg.t_end, &cfg.snapshot_times)
}

/// Computes the local reference once, runs every η (concurrently when the
/// machine allows) and writes `sweep.csv` plus one directory per η and
/// `reference/` into `out`.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<SweepOutcome> {
    let runs = RunCounter::default();
    let reference = reference_run(cfg, &runs)?;
    write_snapshots(&reference, &out.join("reference").join("snapshots.csv"))?;
    write_tv_series(&reference, &out.join("reference").join("tv_series.csv"))?;
    let w = window(cfg)?;

    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(cfg.eta_list.len());
    let compare = |eta: f64| -> Result<SweepRow> {
        let run = single(cfg, eta, &out.join(eta_dir_name(eta)), &runs)?;
        Ok(SweepRow {
            eta,
            sup_time_l1_q_vs_ref: sup_time_l1(&run.report, &reference, &w)?,
            sup_time_l1_w_vs_ref: sup_time_l1_nonlocal_term(&run.report, &reference, &w)?,
            tv_w_max: run.report.tv_w_series.iter().copied().fold(0.0, f64::max),
            tv_q_final: *run.report.tv_q_series.last().unwrap(),
            wq_identity_gap: run.diagnostics.wq_identity_gap,
        })
    };
    let compare = &compare;
    let mut rows = Vec::with_capacity(cfg.eta_list.len());
    for chunk in cfg.eta_list.chunks(workers.max(1)) {
        let results: Vec<Result<SweepRow>> = if chunk.len() == 1 {
            vec![compare(chunk[0])]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|&eta| s.spawn(move || compare(eta)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("sweep worker panicked"))
                    .collect()
            })
        };
        for (r, &eta) in results.into_iter().zip(chunk) {
            rows.push(r.map_err(|e| with_eta(e, eta))?);
        }
    }

    let mut table = Table::new(&SWEEP_HEADER);
    for r in &rows {
        table.row([
            r.eta.into(),
            r.sup_time_l1_q_vs_ref.into(),
            r.sup_time_l1_w_vs_ref.into(),
            r.tv_w_max.into(),
            r.tv_q_final.into(),
            r.wq_identity_gap.into(),
        ]);
    }
    table.write(&out.join("sweep.csv"))?;
    Ok(SweepOutcome {
        rows,
        reference,
        runs,
    })
}

/// `cos²` bump of half-width `half` centred at `c`.
fn bump(x: f64, c: f64, half: f64) -> f64 {
    let u = (x - c) / half;
    if u.abs() >= 1.0 {
        0.0
    } else {
        let v = (0.5 * std::f64::consts::PI * u).cos();
        v * v
    }
}

/// Adds a clipped `cos²` bump of L¹ size `delta` to `q0`.
///
/// The bump has width one eighth of the window and sits where the room
/// below `max q0` is largest; its amplitude is found by bisection so that the
/// clipped perturbation has L¹ norm `delta`.
pub fn perturb_datum(cfg: &ExperimentConfig, q0: &CellField, delta: f64) -> Result<CellField> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::domain(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(q0.clone());
    }
    let g = *q0.grid();
    let (lo_level, hi_level) = datum_range(q0);
    let [w_lo, w_hi] = cfg.window;
    let half = (w_hi - w_lo) / 16.0;
    let room: Vec<f64> = q0.values().iter().map(|v| hi_level - v).collect();
    let mut prefix = Vec::with_capacity(room.len() + 1);
    prefix.push(0.0);
    for r in &room {
        prefix.push(prefix.last().unwrap() + r);
    }
    // Candidate centres are cell centres whose bump stays inside the window.
    let reach = (half / g.dx()).ceil() as usize;
    let candidates: Vec<(usize, f64)> = (0..g.n_cells())
        .filter(|&i| g.center(i) - half >= w_lo && g.center(i) + half <= w_hi)
        .filter(|&i| i >= reach && i + reach < g.n_cells())
        .map(|i| (i, prefix[i + reach + 1] - prefix[i - reach]))
        .collect();
    let best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let plateau: Vec<usize> = candidates
        .iter()
        .filter(|c| c.1 >= best - 1e-9 * best.abs().max(1.0))
        .map(|c| c.0)
        .collect();
    let Some(&centre) = plateau.get(plateau.len() / 2) else {
        return Err(Error::domain("window too small for the perturbation bump"));
    };
    let c = g.center(centre);

    let perturbed = |a: f64| -> Vec<f64> {
        q0.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| (v + a * bump(g.center(i), c, half)).clamp(lo_level, hi_level))
            .collect()
    };
    let size = |a: f64| -> f64 {
        perturbed(a)
            .iter()
            .zip(q0.values())
            .map(|(p, v)| (p - v).abs())
            .sum::<f64>()
            * g.dx()
    };
    let mut hi = hi_level - lo_level;
    if size(hi) < delta {
        return Err(Error::domain(format!(
            "delta = {delta} exceeds the largest clipped bump ({})",
            size(hi)
        )));
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if size(mid) < delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    CellField::new(g, perturbed(0.5 * (lo + hi)))
}

/// Reruns `eta_list[0]` from perturbed data and writes `probe.csv` with the
/// sup-in-time L¹ distance to the unperturbed run for each `delta`.
pub fn run_stability_probe(
    cfg: &ExperimentConfig,
    deltas: &[f64],
    out: &Path,
) -> Result<Vec<ProbeRow>> {
    if deltas.is_empty() {
        return Err(Error::domain("at least one delta is required"));
    }
    let eta = cfg.eta_list[0];
    let grid = grid_for_eta(cfg, eta)?;
    let q0 = sample_profile(&cfg.profile()?, &grid);
    let sch = scheme(cfg, eta, cfg.snapshot_times.clone())?;
    let w = window(cfg)?;
    let base = solve_nonlocal(&q0, &sch).map_err(|e| with_eta(e, eta))?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let p0 = perturb_datum(cfg, &q0, delta)?;
        let run = solve_nonlocal(&p0, &sch).map_err(|e| with_eta(e, eta))?;
        rows.push(ProbeRow {
            delta,
            sup_time_l1: sup_time_l1(&base, &run, &w)?,
        });
    }
    let mut table = Table::new(&PROBE_HEADER);
    for r in &rows {
        table.row([r.delta.into(), r.sup_time_l1.into()]);
    }
    table.write(&out.join("probe.csv"))?;
    Ok(rows)
}

/// CSV files a completed sweep leaves in `out`, relative to `out`.
pub fn sweep_outputs(cfg: &ExperimentConfig) -> Vec<PathBuf> {
    let mut files = vec![
        PathBuf::from("sweep.csv"),
        PathBuf::from("reference/snapshots.csv"),
        PathBuf::from("reference/tv_series.csv"),
    ];
    for &eta in &cfg.eta_list {
        let dir = PathBuf::from(eta_dir_name(eta));
        for name in ["snapshots.csv", "tv_series.csv", "diagnostics.csv"] {
            files.push(dir.join(name));
        }
    }
    files
}
