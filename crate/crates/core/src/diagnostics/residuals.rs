//! Space-time residuals of recorded runs.
//!
//! All quadratures share one layout: the state is taken piecewise linear in
//! time between consecutive snapshots and piecewise constant in space, and
//! the test function is evaluated at cell centres. The `φ_t` term uses the
//! exact increment `φ(t_{k+1}, x) - φ(t_k, x)`, so constant states telescope
//! against the initial-datum term without quadrature error.

use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::grid::{CellField, Grid1D, InterfaceField};
use crate::kernel::nonlocal_exponential;
use crate::local::FluxModel;
use crate::report::{RunReport, Snapshot};
use crate::velocity::VelocityModel;

/// Flux used in the weak form: `V(W) q` or `V(q) q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxMode {
    Nonlocal,
    Local,
}

/// Minimum number of snapshot intervals across a test function's time support.
const MIN_INTERVALS: f64 = 50.0;

fn check_coverage(report: &RunReport, phi: &dyn TestFunction) -> Result<bool> {
    let snaps = &report.snapshots;
    let s = phi.support();
    let first = snaps
        .first()
        .ok_or_else(|| Error::InsufficientSnapshots("report has no snapshots".into()))?;
    if first.time != 0.0 {
        return Err(Error::InsufficientSnapshots(format!(
            "first snapshot is at t = {}, the initial state is needed",
            first.time
        )));
    }
    if s.t_hi <= 0.0 {
        return Ok(false);
    }
    let last = snaps.last().unwrap().time;
    if last < s.t_hi * (1.0 - 1e-12) {
        return Err(Error::InsufficientSnapshots(format!(
            "snapshots end at t = {last} but the test function lives until {}",
            s.t_hi
        )));
    }
    let duration = s.t_hi - s.t_lo.max(0.0);
    let spacing = snaps
        .windows(2)
        .filter(|p| p[1].time > s.t_lo && p[0].time < s.t_hi)
        .map(|p| p[1].time - p[0].time)
        .fold(0.0, f64::max);
    if spacing > duration / MIN_INTERVALS * (1.0 + 1e-9) {
        return Err(Error::InsufficientSnapshots(format!(
            "snapshot spacing {spacing} exceeds {duration}/{MIN_INTERVALS}"
        )));
    }
    let g = first.q.grid();
    let tol = 1e-12 * (1.0 + g.x_min().abs().max(g.x_max().abs()));
    if s.x_lo < g.x_min() - tol || s.x_hi > g.x_max() + tol {
        return Err(Error::domain(format!(
            "test function support [{}, {}] leaves the grid [{}, {}]",
            s.x_lo,
            s.x_hi,
            g.x_min(),
            g.x_max()
        )));
    }
    Ok(true)
}

/// Cell range whose centres may lie in the spatial support.
fn cell_range(grid: &Grid1D, x_lo: f64, x_hi: f64) -> std::ops::Range<usize> {
    let first = ((x_lo - grid.x_min()) / grid.dx()).floor().max(0.0) as usize;
    let last = (((x_hi - grid.x_min()) / grid.dx()).ceil().max(0.0) as usize).min(grid.n_cells());
    first.min(last)..last
}

/// `∬ a φ_t + b φ_x dx dt + ∫ a_0 φ(0, ·) dx` for cellwise densities `a`
/// and fluxes `b` computed per snapshot.
fn space_time_form<D>(report: &RunReport, phi: &dyn TestFunction, density_flux: D) -> Result<f64>
where
    D: Fn(&Snapshot) -> Result<(Vec<f64>, Vec<f64>)>,
{
    if !check_coverage(report, phi)? {
        return Ok(0.0);
    }
    let s = phi.support();
    let grid = *report.snapshots[0].q.grid();
    let dx = grid.dx();
    let cells = cell_range(&grid, s.x_lo, s.x_hi);
    let centres: Vec<f64> = cells.clone().map(|i| grid.center(i)).collect();

    let (mut a_prev, mut b_prev) = density_flux(&report.snapshots[0])?;
    let mut total: f64 = cells
        .clone()
        .zip(&centres)
        .map(|(i, &x)| a_prev[i] * phi.eval(0.0, x))
        .sum::<f64>()
        * dx;

    for pair in report.snapshots.windows(2) {
        let (t0, t1) = (pair[0].time, pair[1].time);
        if t1 <= s.t_lo || t0 >= s.t_hi || t1 == t0 {
            if t1 > t0 {
                (a_prev, b_prev) = density_flux(&pair[1])?;
            }
            continue;
        }
        let (a_next, b_next) = density_flux(&pair[1])?;
        let tm = 0.5 * (t0 + t1);
        let h = t1 - t0;
        let mut acc = 0.0;
        for (i, &x) in cells.clone().zip(&centres) {
            let a = 0.5 * (a_prev[i] + a_next[i]);
            let b = 0.5 * (b_prev[i] + b_next[i]);
            acc += a * (phi.eval(t1, x) - phi.eval(t0, x)) + h * b * phi.dx_eval(tm, x);
        }
        total += acc * dx;
        (a_prev, b_prev) = (a_next, b_next);
    }
    Ok(total)
}

fn velocity_in_range(velocity: &VelocityModel, values: &[f64], what: &str) -> Result<()> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if !velocity.covers(lo, hi) {
        return Err(Error::domain(format!(
            "{what} range [{lo}, {hi}] leaves the admissible range"
        )));
    }
    Ok(())
}

/// Absolute weak-form residual of `report` against `phi`.
pub fn weak_residual(
    report: &RunReport,
    velocity: &VelocityModel,
    mode: FluxMode,
    phi: &dyn TestFunction,
) -> Result<f64> {
    let pair = |snap: &Snapshot| -> Result<(Vec<f64>, Vec<f64>)> {
        let q = snap.q.values();
        let carrier: Vec<f64> = match mode {
            FluxMode::Local => q.to_vec(),
            FluxMode::Nonlocal => snap
                .w
                .as_ref()
                .ok_or_else(|| Error::domain("nonlocal weak form needs W in every snapshot"))?
                .cell_average()
                .into_values(),
        };
        velocity_in_range(velocity, &carrier, "velocity argument")?;
        let flux = carrier
            .iter()
            .zip(q)
            .map(|(c, qi)| velocity.eval(*c) * qi)
            .collect();
        Ok((q.to_vec(), flux))
    };
    Ok(space_time_form(report, phi, pair)?.abs())
}

/// Signed Kruzhkov residual for the entropy pair `(|q - k|, sgn(q - k)(f(q) - f(k)))`.
///
/// Entropy solutions give a value `>= 0` for every nonnegative `phi`.
pub fn entropy_residual(
    report: &RunReport,
    flux: &FluxModel,
    k: f64,
    phi: &dyn TestFunction,
) -> Result<f64> {
    if !k.is_finite() {
        return Err(Error::domain(format!(
            "entropy constant must be finite, got {k}"
        )));
    }
    check_nonnegative(report, phi)?;
    let fk = flux.f(k);
    let pair = |snap: &Snapshot| -> Result<(Vec<f64>, Vec<f64>)> {
        let q = snap.q.values();
        velocity_in_range(flux.velocity(), q, "density")?;
        let eta = q.iter().map(|v| (v - k).abs()).collect();
        let psi = q
            .iter()
            .map(|&v| {
                let d = flux.f(v) - fk;
                if v > k {
                    d
                } else if v < k {
                    -d
                } else {
                    0.0
                }
            })
            .collect();
        Ok((eta, psi))
    };
    space_time_form(report, phi, pair)
}

/// Rejects test functions that are negative at any quadrature node.
fn check_nonnegative(report: &RunReport, phi: &dyn TestFunction) -> Result<()> {
    let Some(first) = report.snapshots.first() else {
        return Ok(());
    };
    let s = phi.support();
    let grid = first.q.grid();
    let cells = cell_range(grid, s.x_lo, s.x_hi);
    let mut times: Vec<f64> = report.snapshots.iter().map(|sn| sn.time).collect();
    times.extend(
        report
            .snapshots
            .windows(2)
            .map(|p| 0.5 * (p[0].time + p[1].time)),
    );
    for t in times {
        if t < s.t_lo || t > s.t_hi {
            continue;
        }
        for i in cells.clone() {
            let x = grid.center(i);
            let value = phi.eval(t, x);
            if value < 0.0 {
                return Err(Error::NegativeTestFunction { t, x, value });
            }
        }
    }
    Ok(())
}

/// `max_k ‖∂_t W + V(W) ∂_x W + K_η[V'(W) ∂_x W · W]‖_{L¹}` over consecutive
/// snapshot pairs, with `K_η` the downstream exponential kernel.
///
/// The time derivative is a forward difference, `∂_x W` is centred (one-sided
/// at the window edges) and the source is evaluated by the kernel recursion
/// on cell averages of `V'(W) ∂_x W · W` with zero far-fields.
pub fn transport_residual_w(report: &RunReport, velocity: &VelocityModel, eta: f64) -> Result<f64> {
    let snaps = &report.snapshots;
    if snaps.len() < 2 {
        return Err(Error::InsufficientSnapshots(
            "transport residual needs at least two snapshots".into(),
        ));
    }
    let span = snaps.last().unwrap().time - snaps[0].time;
    let spacing = snaps
        .windows(2)
        .map(|p| p[1].time - p[0].time)
        .fold(0.0, f64::max);
    if !(span > 0.0) || spacing > span / MIN_INTERVALS * (1.0 + 1e-9) {
        return Err(Error::InsufficientSnapshots(format!(
            "snapshot spacing {spacing} exceeds {span}/{MIN_INTERVALS}"
        )));
    }
    let fields: Vec<&InterfaceField> = snaps
        .iter()
        .map(|s| {
            s.w.as_ref()
                .ok_or_else(|| Error::domain("transport residual needs W in every snapshot"))
        })
        .collect::<Result<_>>()?;

    let grid = *fields[0].grid();
    let dx = grid.dx();
    let n = grid.n_cells();
    let source_grid = grid.with_farfields(0.0, 0.0)?;
    let mut wx = vec![0.0; n + 1];
    let mut worst: f64 = 0.0;
    for (k, pair) in fields.windows(2).enumerate() {
        let h = snaps[k + 1].time - snaps[k].time;
        if h <= 0.0 {
            continue;
        }
        let (w0, w1) = (pair[0].values(), pair[1].values());
        velocity_in_range(velocity, w0, "W")?;
        wx[0] = (w0[1] - w0[0]) / dx;
        wx[n] = (w0[n] - w0[n - 1]) / dx;
        for j in 1..n {
            wx[j] = (w0[j + 1] - w0[j - 1]) / (2.0 * dx);
        }
        let g = |j: usize| velocity.deriv(w0[j]) * wx[j] * w0[j];
        let g_bar = (0..n).map(|i| 0.5 * (g(i) + g(i + 1))).collect();
        let source =
            nonlocal_exponential(&CellField::from_parts_unchecked(source_grid, g_bar), eta)?;
        let r: f64 = (1..n)
            .map(|j| {
                let wt = (w1[j] - w0[j]) / h;
                (wt + velocity.eval(w0[j]) * wx[j] + source.values()[j]).abs()
            })
            .sum::<f64>()
            * dx;
        worst = worst.max(r);
    }
    Ok(worst)
}
