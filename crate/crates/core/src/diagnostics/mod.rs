//! Measured quantities: total variation, windowed L¹ distances, the
//! sup-in-time distance between runs, the W–q identity gap and the
//! space-time residuals in [`residuals`].

mod residuals;
mod test_function;

pub use residuals::{entropy_residual, transport_residual_w, weak_residual, FluxMode};
pub use test_function::{validate_test_function, Support, TensorBump, TestFunction};

use crate::error::{Error, Result};
use crate::grid::{CellField, Grid1D, InterfaceField};
use crate::report::{RunReport, Snapshot};

/// Fields whose variation can be measured against the grid's far-fields.
pub trait GridValues {
    fn grid(&self) -> &Grid1D;
    fn values(&self) -> &[f64];
}

impl GridValues for CellField {
    fn grid(&self) -> &Grid1D {
        CellField::grid(self)
    }
    fn values(&self) -> &[f64] {
        CellField::values(self)
    }
}

impl GridValues for InterfaceField {
    fn grid(&self) -> &Grid1D {
        InterfaceField::grid(self)
    }
    fn values(&self) -> &[f64] {
        InterfaceField::values(self)
    }
}

/// `|v_0 - left| + Σ |v_{i+1} - v_i| + |right - v_last|`.
#[inline]
pub fn variation(values: &[f64], left: f64, right: f64) -> f64 {
    let (Some(first), Some(last)) = (values.first(), values.last()) else {
        return (right - left).abs();
    };
    let inner: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    (first - left).abs() + inner + (right - last).abs()
}

/// Total variation including the seam jumps to both far-field states.
pub fn total_variation<F: GridValues + ?Sized>(field: &F) -> f64 {
    let g = field.grid();
    variation(field.values(), g.left_farfield(), g.right_farfield())
}

/// Spatial window of the L¹_loc metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    lo: f64,
    hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::domain(format!(
                "window needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn whole(grid: &Grid1D) -> Self {
        Self {
            lo: grid.x_min(),
            hi: grid.x_max(),
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    fn check_inside(&self, grid: &Grid1D) -> Result<()> {
        let tol = 1e-12 * (1.0 + grid.x_max().abs().max(grid.x_min().abs()));
        if self.lo < grid.x_min() - tol || self.hi > grid.x_max() + tol {
            return Err(Error::domain(format!(
                "window [{}, {}] leaves the grid [{}, {}]",
                self.lo,
                self.hi,
                grid.x_min(),
                grid.x_max()
            )));
        }
        Ok(())
    }

    /// Overlap length of cell `i` with the window.
    fn overlap(&self, grid: &Grid1D, i: usize) -> f64 {
        (grid.interface(i + 1).min(self.hi) - grid.interface(i).max(self.lo)).max(0.0)
    }
}

/// Brings two fields onto the coarser of their grids; the cell counts must
/// differ by an integer factor.
fn common_grid(a: &CellField, b: &CellField) -> Result<(CellField, CellField)> {
    let (ga, gb) = (a.grid(), b.grid());
    if ga.x_min() != gb.x_min() || ga.x_max() != gb.x_max() {
        return Err(Error::IncompatibleGrids(format!(
            "windows [{}, {}] and [{}, {}] differ",
            ga.x_min(),
            ga.x_max(),
            gb.x_min(),
            gb.x_max()
        )));
    }
    let (na, nb) = (ga.n_cells(), gb.n_cells());
    if na == nb {
        Ok((a.clone(), b.clone()))
    } else if nb > na && nb % na == 0 {
        Ok((a.clone(), b.coarsened(nb / na)?))
    } else if na > nb && na % nb == 0 {
        Ok((a.coarsened(na / nb)?, b.clone()))
    } else {
        Err(Error::IncompatibleGrids(format!(
            "{na} and {nb} cells are not related by an integer refinement"
        )))
    }
}

/// `∫_w |a - b| dx` for piecewise-constant fields, with fractional weights
/// for the cells cut by the window edges.
pub fn l1_distance(a: &CellField, b: &CellField, w: &Window) -> Result<f64> {
    let (a, b) = common_grid(a, b)?;
    let g = *a.grid();
    w.check_inside(&g)?;
    let first = (((w.lo - g.x_min()) / g.dx()).floor().max(0.0)) as usize;
    let last = ((((w.hi - g.x_min()) / g.dx()).ceil()) as usize).min(g.n_cells());
    Ok((first..last)
        .map(|i| w.overlap(&g, i) * (a.values()[i] - b.values()[i]).abs())
        .sum())
}

fn matched_pairs<'a>(
    ra: &'a RunReport,
    rb: &'a RunReport,
) -> Result<impl Iterator<Item = (&'a Snapshot, &'a Snapshot)>> {
    if ra.snapshots.len() != rb.snapshots.len() {
        return Err(Error::MismatchedSchedules(format!(
            "{} vs {} snapshots",
            ra.snapshots.len(),
            rb.snapshots.len()
        )));
    }
    for (sa, sb) in ra.snapshots.iter().zip(&rb.snapshots) {
        let t = sa.requested_time;
        if (t - sb.requested_time).abs() > 1e-9 * (1.0 + t.abs()) {
            return Err(Error::MismatchedSchedules(format!(
                "requested times {t} and {} differ",
                sb.requested_time
            )));
        }
    }
    Ok(ra.snapshots.iter().zip(&rb.snapshots))
}

/// `max_t ∫_w |q_a(t) - q_b(t)| dx` over the shared snapshot schedule.
pub fn sup_time_l1(ra: &RunReport, rb: &RunReport, w: &Window) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (sa, sb) in matched_pairs(ra, rb)? {
        worst = worst.max(l1_distance(&sa.q, &sb.q, w)?);
    }
    Ok(worst)
}

/// Like [`sup_time_l1`], comparing the cell-averaged nonlocal term of
/// `nonlocal` against the density of `reference`.
pub fn sup_time_l1_nonlocal_term(
    nonlocal: &RunReport,
    reference: &RunReport,
    w: &Window,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (sa, sb) in matched_pairs(nonlocal, reference)? {
        let term =
            sa.w.as_ref()
                .ok_or_else(|| Error::domain("report carries no nonlocal term"))?;
        worst = worst.max(l1_distance(&term.cell_average(), &sb.q, w)?);
    }
    Ok(worst)
}

/// `| ‖W - q‖_{L¹} - eta TV(W) |` with `W` averaged onto cells for the
/// L¹ term.
pub fn wq_identity_gap(q: &CellField, w: &InterfaceField, eta: f64) -> f64 {
    let dx = q.grid().dx();
    let l1: f64 = w
        .values()
        .windows(2)
        .zip(q.values())
        .map(|(p, qi)| (0.5 * (p[0] + p[1]) - qi).abs())
        .sum::<f64>()
        * dx;
    (l1 - eta * total_variation(w)).abs()
}
