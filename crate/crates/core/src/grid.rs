//! Uniform one-dimensional grids, the fields that live on them, and
//! piecewise-constant initial profiles.
//!
//! The real line is truncated to `[x_min, x_max]`. Outside the window the
//! density is continued by the constant far-field states stored on the grid.

use crate::error::{Error, Result};

/// Uniform cell partition of `[x_min, x_max]` with far-field states.
///
/// Cell `i` occupies `[x_min + i dx, x_min + (i+1) dx)`; interface `j`
/// (`0..=n_cells`) sits at `x_min + j dx`, so interface `j` is the left
/// edge of cell `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    dx: f64,
    left_farfield: f64,
    right_farfield: f64,
}

impl Grid1D {
    pub fn new(
        x_min: f64,
        x_max: f64,
        n_cells: usize,
        left_farfield: f64,
        right_farfield: f64,
    ) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::domain(format!(
                "grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_cells < 2 {
            return Err(Error::domain(format!(
                "grid needs at least 2 cells, got {n_cells}"
            )));
        }
        if !(left_farfield.is_finite() && right_farfield.is_finite()) {
            return Err(Error::domain("far-field states must be finite"));
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            dx: (x_max - x_min) / n_cells as f64,
            left_farfield,
            right_farfield,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn left_farfield(&self) -> f64 {
        self.left_farfield
    }

    pub fn right_farfield(&self) -> f64 {
        self.right_farfield
    }

    /// Position of interface `j`; the last interface is exactly `x_max`.
    pub fn interface(&self, j: usize) -> f64 {
        if j == self.n_cells {
            self.x_max
        } else {
            self.x_min + j as f64 * self.dx
        }
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    pub fn with_farfields(&self, left: f64, right: f64) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.n_cells, left, right)
    }

    /// Same window and far-fields with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::domain("refinement factor must be positive"));
        }
        Self::new(
            self.x_min,
            self.x_max,
            self.n_cells * factor,
            self.left_farfield,
            self.right_farfield,
        )
    }

    /// Reflection `x -> -x`: the window becomes `[-x_max, -x_min]` and the
    /// far-field states swap sides.
    pub fn mirrored(&self) -> Self {
        Self {
            x_min: -self.x_max,
            x_max: -self.x_min,
            n_cells: self.n_cells,
            dx: self.dx,
            left_farfield: self.right_farfield,
            right_farfield: self.left_farfield,
        }
    }

    /// True when both grids cover the same window with the same far-fields.
    pub fn same_window(&self, other: &Grid1D) -> bool {
        self.x_min == other.x_min
            && self.x_max == other.x_max
            && self.left_farfield == other.left_farfield
            && self.right_farfield == other.right_farfield
    }
}

/// Cell-averaged density on a grid at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::domain(format!(
                "cell field has {} values for {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at cell {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid1D, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.n_cells()])
    }

    pub(crate) fn from_parts_unchecked(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_cells());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cell values in reflected order on the mirrored grid.
    pub fn mirrored(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            grid: self.grid.mirrored(),
            values,
        }
    }

    /// Averages groups of `factor` consecutive cells onto a grid with
    /// `n_cells / factor` cells.
    pub fn coarsened(&self, factor: usize) -> Result<Self> {
        let n = self.grid.n_cells();
        if factor == 0 || n % factor != 0 || n / factor < 2 {
            return Err(Error::IncompatibleGrids(format!(
                "cannot coarsen {n} cells by a factor of {factor}"
            )));
        }
        let grid = Grid1D::new(
            self.grid.x_min(),
            self.grid.x_max(),
            n / factor,
            self.grid.left_farfield(),
            self.grid.right_farfield(),
        )?;
        let values = self
            .values
            .chunks_exact(factor)
            .map(|chunk| chunk.iter().sum::<f64>() / factor as f64)
            .collect();
        Ok(Self { grid, values })
    }
}

/// Nonlocal-term values at the `n_cells + 1` cell interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl InterfaceField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() + 1 {
            return Err(Error::domain(format!(
                "interface field has {} values for {} interfaces",
                values.len(),
                grid.n_cells() + 1
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at interface {j}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts_unchecked(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_cells() + 1);
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mirrored(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            grid: self.grid.mirrored(),
            values,
        }
    }

    /// Mean of the two bounding interface values of every cell.
    pub fn cell_average(&self) -> CellField {
        let values = self
            .values
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect();
        CellField::from_parts_unchecked(self.grid, values)
    }
}

/// Piecewise-constant density on the whole real line.
///
/// `levels[0]` holds on `(-inf, b_1)`, `levels[k]` on `[b_k, b_{k+1})` and
/// the last level on `[b_last, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantProfile {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl PiecewiseConstantProfile {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        Self::validated(breakpoints, levels, false)
    }

    /// Like [`new`](Self::new) but allows negative levels, for velocity
    /// models in signed-product mode.
    pub fn new_signed(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        Self::validated(breakpoints, levels, true)
    }

    fn validated(breakpoints: Vec<f64>, levels: Vec<f64>, allow_negative: bool) -> Result<Self> {
        if levels.len() != breakpoints.len() + 1 {
            return Err(Error::domain(format!(
                "profile needs {} levels for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                levels.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::domain(
                "breakpoints must be finite and strictly increasing",
            ));
        }
        if levels
            .iter()
            .any(|l| !l.is_finite() || (!allow_negative && *l < 0.0))
        {
            return Err(Error::domain("levels must be finite and nonnegative"));
        }
        Ok(Self {
            breakpoints,
            levels,
        })
    }

    pub fn constant(level: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![level])
    }

    /// Unit step at `at`: zero on the left, one on the right.
    pub fn step(at: f64) -> Self {
        Self {
            breakpoints: vec![at],
            levels: vec![0.0, 1.0],
        }
    }

    /// A half-density platoon on `(0, 1/3)`, an empty gap on `(1/3, 2/3)`
    /// and a full jam on `(2/3, inf)`.
    pub fn platoon_gap_jam() -> Self {
        Self {
            breakpoints: vec![0.0, 1.0 / 3.0, 2.0 / 3.0],
            levels: vec![0.0, 0.5, 0.0, 1.0],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let k = self.breakpoints.partition_point(|b| *b <= x);
        self.levels[k]
    }

    pub fn left_level(&self) -> f64 {
        self.levels[0]
    }

    pub fn right_level(&self) -> f64 {
        *self.levels.last().expect("profile has at least one level")
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let mut lo = a;
        let mut k = self.breakpoints.partition_point(|bp| *bp <= a);
        while lo < b {
            let hi = self.breakpoints.get(k).map_or(b, |bp| bp.min(b));
            total += self.levels[k] * (hi - lo);
            lo = hi;
            k += 1;
        }
        total
    }

    pub fn total_variation(&self) -> f64 {
        self.levels.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }
}

/// Exact cell averages of `profile` on `grid`; the far-fields of the
/// returned field's grid are the profile's outermost levels.
pub fn sample_profile(profile: &PiecewiseConstantProfile, grid: &Grid1D) -> CellField {
    let grid = Grid1D {
        left_farfield: profile.left_level(),
        right_farfield: profile.right_level(),
        ..*grid
    };
    let n = grid.n_cells();
    let bps = profile.breakpoints();
    let levels = profile.levels();
    let mut k = bps.partition_point(|bp| *bp <= grid.x_min());
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (grid.interface(i), grid.interface(i + 1));
        while k < bps.len() && bps[k] <= a {
            k += 1;
        }
        // Fast path: one level covers the whole cell.
        if k == bps.len() || bps[k] >= b {
            values.push(levels[k]);
            continue;
        }
        let mut acc = 0.0;
        let mut lo = a;
        let mut kk = k;
        while lo < b {
            let hi = bps.get(kk).map_or(b, |bp| bp.min(b));
            acc += levels[kk] * (hi - lo);
            lo = hi;
            kk += 1;
        }
        values.push(acc / (b - a));
    }
    CellField::from_parts_unchecked(grid, values)
}

/// `dx * sum(values)`: the mass inside the truncated window.
pub fn total_mass(q: &CellField) -> f64 {
    q.grid().dx() * q.values().iter().sum::<f64>()
}
