//! Godunov reference solver for the local law `∂t q + ∂x f(q) = 0`,
//! `f(s) = V(s) s`.
//!
//! Only fluxes that are unimodal on the admissible range are accepted, so the
//! Godunov flux reduces to endpoint comparisons plus the value at the peak.

use crate::error::{Error, Result};
use crate::grid::CellField;
use crate::kernel::flush_subnormal;
use crate::report::{check_schedule, fit_steps, snapshot_steps, CellStats, RunReport, Snapshot};
use crate::velocity::{VelocityModel, VALIDATION_SAMPLES};

const GOLDEN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxModel {
    velocity: VelocityModel,
    critical_density: f64,
    max_flux: f64,
    max_wave_speed: f64,
}

impl FluxModel {
    pub fn new(velocity: VelocityModel) -> Result<Self> {
        let critical = critical_density(&velocity)?;
        let f = |s: f64| velocity.eval(s) * s;
        let (lo, hi) = velocity.admissible_range();
        let max_wave_speed = (0..VALIDATION_SAMPLES)
            .map(|k| {
                let s = lo + (hi - lo) * k as f64 / (VALIDATION_SAMPLES - 1) as f64;
                (velocity.deriv(s) * s + velocity.eval(s)).abs()
            })
            .fold(0.0, f64::max);
        Ok(Self {
            velocity,
            critical_density: critical,
            max_flux: f(critical),
            max_wave_speed,
        })
    }

    pub fn velocity(&self) -> &VelocityModel {
        &self.velocity
    }

    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        self.velocity.eval(s) * s
    }

    /// `f'(s) = V'(s) s + V(s)`.
    pub fn df(&self, s: f64) -> f64 {
        self.velocity.deriv(s) * s + self.velocity.eval(s)
    }

    pub fn critical_density(&self) -> f64 {
        self.critical_density
    }

    /// Largest sampled `|f'|` on the admissible range.
    pub fn max_wave_speed(&self) -> f64 {
        self.max_wave_speed
    }

    #[inline]
    fn godunov_unchecked(&self, a: f64, b: f64) -> f64 {
        if a <= b {
            self.f(a).min(self.f(b))
        } else if b <= self.critical_density && self.critical_density <= a {
            self.max_flux
        } else {
            self.f(a).max(self.f(b))
        }
    }
}

/// Argmax of `f(s) = V(s) s` on the admissible range by golden-section
/// search, after checking that `f` is unimodal there.
pub fn critical_density(velocity: &VelocityModel) -> Result<f64> {
    let f = |s: f64| velocity.eval(s) * s;
    let (lo, hi) = velocity.admissible_range();
    let samples: Vec<f64> = (0..VALIDATION_SAMPLES)
        .map(|k| f(lo + (hi - lo) * k as f64 / (VALIDATION_SAMPLES - 1) as f64))
        .collect();
    let scale = samples.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let slack = 1e-12 * scale;
    // Nondecreasing then nonincreasing.
    let mut descending = false;
    for w in samples.windows(2) {
        if w[1] < w[0] - slack {
            descending = true;
        } else if descending && w[1] > w[0] + slack {
            return Err(Error::Model(
                "flux V(s) s is not unimodal on the admissible range".into(),
            ));
        }
    }

    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // The bracket may have collapsed onto an endpoint maximum.
    Ok([lo, mid, hi]
        .into_iter()
        .fold(mid, |best, s| if f(s) > f(best) { s } else { best }))
}

/// Godunov flux: `min f` on `[a, b]` if `a <= b`, otherwise `max f` on `[b, a]`.
pub fn godunov_flux(a: f64, b: f64, flux: &FluxModel) -> Result<f64> {
    let v = flux.velocity();
    if !v.covers(a.min(b), a.max(b)) {
        let (lo, hi) = v.admissible_range();
        return Err(Error::domain(format!(
            "states ({a}, {b}) leave the admissible range [{lo}, {hi}]"
        )));
    }
    Ok(flux.godunov_unchecked(a, b))
}

/// Time-explicit Godunov scheme with `dt = cfl dx / max|f'|`.
pub fn solve_local(
    q0: &CellField,
    flux: &FluxModel,
    cfl: f64,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<RunReport> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::domain(format!("cfl must lie in (0, 1], got {cfl}")));
    }
    check_schedule(t_end, snapshot_times)?;
    let grid = *q0.grid();
    let (lf, rf) = (grid.left_farfield(), grid.right_farfield());
    let lo = q0.min().min(lf).min(rf);
    let hi = q0.max().max(lf).max(rf);
    if !flux.velocity().covers(lo, hi) {
        return Err(Error::domain(format!(
            "density range [{lo}, {hi}] is not inside the admissible range"
        )));
    }
    let (dt, steps) = if flux.max_wave_speed() == 0.0 {
        (t_end, 1)
    } else {
        fit_steps(t_end, cfl * grid.dx() / flux.max_wave_speed())
    };
    let targets = snapshot_steps(snapshot_times, dt, steps);
    let lambda = dt / grid.dx();
    let n = grid.n_cells();

    let mut q = q0.values().to_vec();
    let mut fluxes = vec![0.0; n + 1];
    let mut report = RunReport {
        snapshots: Vec::with_capacity(targets.len()),
        tv_q_series: Vec::with_capacity(steps + 1),
        tv_w_series: Vec::new(),
        mass_series: Vec::with_capacity(steps + 1),
        min_series: Vec::with_capacity(steps + 1),
        max_series: Vec::with_capacity(steps + 1),
        outflow_series: Vec::with_capacity(steps + 1),
        boundary_flux_integral: 0.0,
        dt_used: dt,
        steps,
        kernel: None,
    };
    let mut outflow = 0.0;
    let mut next = 0;
    for step in 0..=steps {
        if step > 0 {
            fluxes[0] = flux.godunov_unchecked(lf, q[0]);
            for j in 1..n {
                fluxes[j] = flux.godunov_unchecked(q[j - 1], q[j]);
            }
            fluxes[n] = flux.godunov_unchecked(q[n - 1], rf);
            for (i, qi) in q.iter_mut().enumerate() {
                *qi = flush_subnormal(*qi - lambda * (fluxes[i + 1] - fluxes[i]));
            }
            outflow += dt * (fluxes[n] - fluxes[0]);
        }
        let stats = CellStats::of(&q, lf, rf);
        let (mass, tv) = (grid.dx() * stats.sum, stats.variation);
        if !(mass.is_finite() && tv.is_finite()) {
            return Err(Error::Blowup {
                step,
                time: step as f64 * dt,
            });
        }
        let (mn, mx) = (stats.min, stats.max);
        report.mass_series.push(mass);
        report.tv_q_series.push(tv);
        report.min_series.push(mn);
        report.max_series.push(mx);
        report.outflow_series.push(outflow);
        while next < targets.len() && targets[next] == step {
            report.snapshots.push(Snapshot {
                requested_time: snapshot_times[next],
                time: step as f64 * dt,
                step,
                q: CellField::from_parts_unchecked(grid, q.clone()),
                w: None,
            });
            next += 1;
        }
    }
    report.boundary_flux_integral = outflow;
    Ok(report)
}
