use crate::error::{Error, Result};
use crate::grid::{CellField, InterfaceField};
use crate::kernel::KernelSpec;

/// State recorded at one requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// The time asked for in the schedule.
    pub requested_time: f64,
    /// Time of the completed step the snapshot was taken at.
    pub time: f64,
    pub step: usize,
    pub q: CellField,
    /// Nonlocal term; `None` for local runs.
    pub w: Option<InterfaceField>,
}

/// Output of one solver run.
///
/// Every per-step series has `steps + 1` entries: index 0 is the initial
/// state, index `n` the state after step `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub snapshots: Vec<Snapshot>,
    pub tv_q_series: Vec<f64>,
    /// Empty for local runs.
    pub tv_w_series: Vec<f64>,
    pub mass_series: Vec<f64>,
    pub min_series: Vec<f64>,
    pub max_series: Vec<f64>,
    /// Cumulative `∫ (F_out - F_in) dt` through the window boundaries.
    pub outflow_series: Vec<f64>,
    pub boundary_flux_integral: f64,
    pub dt_used: f64,
    pub steps: usize,
    pub kernel: Option<KernelSpec>,
}

impl RunReport {
    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("report holds at least one snapshot")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |n| n as f64 * self.dt_used)
    }

    /// `|Δmass + outflow|` after the last step, relative to `max(1, mass_0)`.
    pub fn conservation_defect(&self) -> f64 {
        let m0 = self.mass_series[0];
        let m1 = *self.mass_series.last().unwrap();
        (m1 - m0 + self.boundary_flux_integral).abs() / m0.abs().max(1.0)
    }

    /// Largest excursion of the solution outside `[lo, hi]` over all steps.
    pub fn bound_violation(&self, lo: f64, hi: f64) -> f64 {
        let below = self
            .min_series
            .iter()
            .map(|m| (lo - m).max(0.0))
            .fold(0.0, f64::max);
        let above = self
            .max_series
            .iter()
            .map(|m| (m - hi).max(0.0))
            .fold(0.0, f64::max);
        below.max(above)
    }

    /// Sum of all step-to-step increases of `series`.
    pub fn cumulative_increase(series: &[f64]) -> f64 {
        series.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum()
    }

    pub fn snapshot_at(&self, requested_time: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| {
            (s.requested_time - requested_time).abs() <= 1e-9 * (1.0 + requested_time.abs())
        })
    }

    /// Copy restricted to the snapshots whose requested times appear in `times`.
    pub fn with_snapshots_at(&self, times: &[f64]) -> Result<RunReport> {
        let mut out = self.clone();
        out.snapshots = times
            .iter()
            .map(|t| {
                self.snapshot_at(*t)
                    .cloned()
                    .ok_or_else(|| Error::MismatchedSchedules(format!("no snapshot for t = {t}")))
            })
            .collect::<Result<_>>()?;
        Ok(out)
    }
}

/// Per-step bookkeeping of a cell field in one pass.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellStats {
    pub sum: f64,
    pub variation: f64,
    pub min: f64,
    pub max: f64,
}

impl CellStats {
    /// Sum, total variation including far-field seams, and extrema.
    pub(crate) fn of(values: &[f64], left: f64, right: f64) -> Self {
        let (mut sum, mut tv) = (0.0, 0.0);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut prev = left;
        for &v in values {
            sum += v;
            tv += (v - prev).abs();
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
            prev = v;
        }
        tv += (right - prev).abs();
        Self {
            sum,
            variation: tv,
            min: lo,
            max: hi,
        }
    }
}

/// Maps requested times onto step indices (nearest completed step).
pub(crate) fn snapshot_steps(times: &[f64], dt: f64, steps: usize) -> Vec<usize> {
    times
        .iter()
        .map(|t| ((t / dt).round() as usize).min(steps))
        .collect()
}

/// Splits `t_end` into an integer number of steps no longer than `dt_max`.
pub(crate) fn fit_steps(t_end: f64, dt_max: f64) -> (f64, usize) {
    let steps = ((t_end / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (t_end / steps as f64, steps)
}

pub(crate) fn check_schedule(t_end: f64, snapshot_times: &[f64]) -> Result<()> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::domain(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if snapshot_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::domain(
            "snapshot times must be finite and nonnegative",
        ));
    }
    if snapshot_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("snapshot times must be sorted"));
    }
    if let Some(last) = snapshot_times.last() {
        if *last > t_end * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "snapshot time {last} lies beyond t_end = {t_end}"
            )));
        }
    }
    Ok(())
}
