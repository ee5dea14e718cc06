//! First-order upwind finite-volume scheme for
//! `∂t q + ∂x (V(W[q]) q) = 0`.
//!
//! Fluxes live on interfaces: `F_j = V(W_j) q_up`, where `q_up` is the cell
//! the flow comes from (left in downstream mode, right in upstream mode) and
//! the far-field state stands in for the missing neighbour at the window
//! edges. The update `q_i -= dt/dx (F_{i+1} - F_i)` is in flux form, so the
//! mass change over a run equals the accumulated boundary flux.

use crate::diagnostics::variation;
use crate::error::{Error, Result};
use crate::grid::{total_mass, CellField, Grid1D, InterfaceField};
use crate::kernel::{flush_subnormal, KernelSpec, Orientation};
use crate::report::{check_schedule, fit_steps, snapshot_steps, CellStats, RunReport, Snapshot};
use crate::velocity::{Monotonicity, VelocityModel};

/// Tolerated wrong-sign speed before a step is rejected as a mode violation.
const SPEED_SIGN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalSchemeConfig {
    pub kernel: KernelSpec,
    pub velocity: VelocityModel,
    pub cfl: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
}

impl NonlocalSchemeConfig {
    pub fn new(
        kernel: KernelSpec,
        velocity: VelocityModel,
        cfl: f64,
        t_end: f64,
        snapshot_times: Vec<f64>,
    ) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::domain(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        check_schedule(t_end, &snapshot_times)?;
        kernel.check_pairing(&velocity)?;
        Ok(Self {
            kernel,
            velocity,
            cfl,
            t_end,
            snapshot_times,
        })
    }
}

/// Frozen time step `cfl dx / max|V|`, shortened so that `t_end / dt` is an
/// integer. A velocity that vanishes identically gives `dt = t_end`.
pub fn cfl_dt(q0: &CellField, cfg: &NonlocalSchemeConfig) -> Result<f64> {
    check_range(q0, &cfg.velocity)?;
    let vmax = cfg.velocity.max_abs_speed();
    if vmax == 0.0 {
        return Ok(cfg.t_end);
    }
    Ok(fit_steps(cfg.t_end, cfg.cfl * q0.grid().dx() / vmax).0)
}

fn check_range(q: &CellField, velocity: &VelocityModel) -> Result<()> {
    let g = q.grid();
    let lo = q.min().min(g.left_farfield()).min(g.right_farfield());
    let hi = q.max().max(g.left_farfield()).max(g.right_farfield());
    if !velocity.covers(lo, hi) {
        let (a, b) = velocity.admissible_range();
        return Err(Error::domain(format!(
            "density range [{lo}, {hi}] is not inside the admissible range [{a}, {b}]"
        )));
    }
    if velocity.mode() != Monotonicity::SignedProduct && lo < 0.0 {
        return Err(Error::domain(format!(
            "negative density {lo} requires a signed-product velocity"
        )));
    }
    Ok(())
}

/// Scratch buffers for repeated steps on one grid.
struct Upwind<'a> {
    cfg: &'a NonlocalSchemeConfig,
    grid: Grid1D,
    w: Vec<f64>,
    flux: Vec<f64>,
    prefix: Vec<f64>,
}

impl<'a> Upwind<'a> {
    fn new(cfg: &'a NonlocalSchemeConfig, grid: Grid1D) -> Self {
        let n = grid.n_cells();
        Self {
            cfg,
            grid,
            w: vec![0.0; n + 1],
            flux: vec![0.0; n + 1],
            prefix: Vec::with_capacity(n + 1),
        }
    }

    fn refresh_w(&mut self, q: &[f64]) {
        self.cfg
            .kernel
            .apply_into(&self.grid, q, &mut self.w, &mut self.prefix);
    }

    /// Advances `q` by `dt` using the current `self.w`; returns the net
    /// boundary outflux rate `F_n - F_0`.
    fn advance(&mut self, q: &mut [f64], dt: f64) -> Result<f64> {
        let n = q.len();
        let v = &self.cfg.velocity;
        let (lf, rf) = (self.grid.left_farfield(), self.grid.right_farfield());
        match self.cfg.kernel.orientation() {
            Orientation::Downstream => {
                for j in 0..=n {
                    let speed = v.eval(self.w[j]);
                    if speed < -SPEED_SIGN_TOLERANCE {
                        return Err(Error::ModeViolation {
                            interface: j,
                            speed,
                            orientation: "downstream",
                        });
                    }
                    let upwind = if j == 0 { lf } else { q[j - 1] };
                    self.flux[j] = speed * upwind;
                }
            }
            Orientation::Upstream => {
                for j in 0..=n {
                    let speed = v.eval(self.w[j]);
                    if speed > SPEED_SIGN_TOLERANCE {
                        return Err(Error::ModeViolation {
                            interface: j,
                            speed,
                            orientation: "upstream",
                        });
                    }
                    let upwind = if j == n { rf } else { q[j] };
                    self.flux[j] = speed * upwind;
                }
            }
        }
        let lambda = dt / self.grid.dx();
        for (i, qi) in q.iter_mut().enumerate() {
            *qi = flush_subnormal(*qi - lambda * (self.flux[i + 1] - self.flux[i]));
        }
        Ok(self.flux[n] - self.flux[0])
    }
}

/// One upwind step of length `dt` from `q`.
pub fn step_upwind(q: &CellField, cfg: &NonlocalSchemeConfig, dt: f64) -> Result<CellField> {
    let mut stepper = Upwind::new(cfg, *q.grid());
    let mut values = q.values().to_vec();
    stepper.refresh_w(&values);
    stepper.advance(&mut values, dt)?;
    CellField::new(*q.grid(), values).map_err(|_| Error::Blowup { step: 1, time: dt })
}

/// Integrates from `q0` to `cfg.t_end` with the frozen CFL step.
pub fn solve_nonlocal(q0: &CellField, cfg: &NonlocalSchemeConfig) -> Result<RunReport> {
    let dt = cfl_dt(q0, cfg)?;
    let steps = ((cfg.t_end / dt).round() as usize).max(1);
    let grid = *q0.grid();
    let (lf, rf) = (grid.left_farfield(), grid.right_farfield());
    let targets = snapshot_steps(&cfg.snapshot_times, dt, steps);

    let mut stepper = Upwind::new(cfg, grid);
    let mut q = q0.values().to_vec();
    stepper.refresh_w(&q);

    let mut report = RunReport {
        snapshots: Vec::with_capacity(targets.len()),
        tv_q_series: Vec::with_capacity(steps + 1),
        tv_w_series: Vec::with_capacity(steps + 1),
        mass_series: Vec::with_capacity(steps + 1),
        min_series: Vec::with_capacity(steps + 1),
        max_series: Vec::with_capacity(steps + 1),
        outflow_series: Vec::with_capacity(steps + 1),
        boundary_flux_integral: 0.0,
        dt_used: dt,
        steps,
        kernel: Some(cfg.kernel),
    };
    let mut outflow = 0.0;
    let mut next = 0;
    for n in 0..=steps {
        if n > 0 {
            outflow += dt * stepper.advance(&mut q, dt)?;
            stepper.refresh_w(&q);
        }
        let stats = CellStats::of(&q, lf, rf);
        let mass = grid.dx() * stats.sum;
        let tv_q = stats.variation;
        let tv_w = variation(&stepper.w, lf, rf);
        if !(mass.is_finite() && tv_q.is_finite() && tv_w.is_finite()) {
            return Err(Error::Blowup {
                step: n,
                time: n as f64 * dt,
            });
        }
        let (lo, hi) = (stats.min, stats.max);
        report.mass_series.push(mass);
        report.tv_q_series.push(tv_q);
        report.tv_w_series.push(tv_w);
        report.min_series.push(lo);
        report.max_series.push(hi);
        report.outflow_series.push(outflow);
        while next < targets.len() && targets[next] == n {
            report.snapshots.push(Snapshot {
                requested_time: cfg.snapshot_times[next],
                time: n as f64 * dt,
                step: n,
                q: CellField::from_parts_unchecked(grid, q.clone()),
                w: Some(InterfaceField::from_parts_unchecked(
                    grid,
                    stepper.w.clone(),
                )),
            });
            next += 1;
        }
    }
    report.boundary_flux_integral = outflow;
    debug_assert!((report.mass_series[0] - total_mass(q0)).abs() < 1e-12);
    Ok(report)
}
