//! Exact evaluation of the nonlocal term at cell interfaces.
//!
//! For piecewise-constant densities both kernels can be integrated in closed
//! form, so the interface values are exact up to rounding:
//!
//! * exponential: `W(x) = (1/eta) ∫_x^∞ exp((x-y)/eta) q(y) dy`, evaluated by a
//!   right-to-left recursion `W_j = q_j + alpha (W_{j+1} - q_j)` with
//!   `alpha = exp(-dx/eta)` seeded by the right far-field;
//! * constant: `W(x) = (1/eta) ∫_x^{x+eta} q(y) dy`, evaluated from prefix
//!   sums with fractional end-cell weights.
//!
//! The upstream orientation looks left instead of right. It is the mirror
//! image of the downstream kernel.

use crate::error::{Error, Result};
use crate::grid::{CellField, Grid1D, InterfaceField};
use crate::velocity::{Monotonicity, VelocityModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Exponential,
    Constant,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Exponential => "exponential",
            KernelFamily::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Averages to the right; pairs with decreasing velocities.
    Downstream,
    /// Averages to the left; pairs with increasing velocities.
    Upstream,
}

impl Orientation {
    pub fn name(&self) -> &'static str {
        match self {
            Orientation::Downstream => "downstream",
            Orientation::Upstream => "upstream",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    eta: f64,
    orientation: Orientation,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, eta: f64, orientation: Orientation) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self {
            family,
            eta,
            orientation,
        })
    }

    pub fn exponential(eta: f64) -> Result<Self> {
        Self::new(KernelFamily::Exponential, eta, Orientation::Downstream)
    }

    pub fn constant(eta: f64) -> Result<Self> {
        Self::new(KernelFamily::Constant, eta, Orientation::Downstream)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.family, eta, self.orientation)
    }

    /// Downstream kernels need a decreasing (or signed-product) velocity,
    /// upstream kernels an increasing one.
    pub fn check_pairing(&self, velocity: &VelocityModel) -> Result<()> {
        let ok = matches!(
            (self.orientation, velocity.mode()),
            (Orientation::Downstream, Monotonicity::Decreasing)
                | (Orientation::Downstream, Monotonicity::SignedProduct)
                | (Orientation::Upstream, Monotonicity::Increasing)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::Model(format!(
                "{} kernel cannot be paired with a {} velocity",
                self.orientation.name(),
                velocity.mode().name()
            )))
        }
    }

    pub fn apply(&self, q: &CellField) -> InterfaceField {
        let mut out = vec![0.0; q.len() + 1];
        let mut prefix = Vec::new();
        self.apply_into(q.grid(), q.values(), &mut out, &mut prefix);
        InterfaceField::from_parts_unchecked(*q.grid(), out)
    }

    /// Allocation-free evaluation used by the time steppers. `prefix` is
    /// scratch space for the constant kernel.
    pub(crate) fn apply_into(
        &self,
        grid: &Grid1D,
        q: &[f64],
        out: &mut [f64],
        prefix: &mut Vec<f64>,
    ) {
        match (self.family, self.orientation) {
            (KernelFamily::Exponential, Orientation::Downstream) => {
                exponential_downstream(q, grid.right_farfield(), decay(grid.dx(), self.eta), out)
            }
            (KernelFamily::Exponential, Orientation::Upstream) => {
                exponential_upstream(q, grid.left_farfield(), decay(grid.dx(), self.eta), out)
            }
            (KernelFamily::Constant, orientation) => {
                constant_window(grid, q, self.eta, orientation, prefix, out)
            }
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "eta must be positive and finite, got {eta}"
        )))
    }
}

/// Per-cell decay factor `exp(-dx/eta)` of the exponential kernel.
#[inline]
pub fn decay(dx: f64, eta: f64) -> f64 {
    (-dx / eta).exp()
}

/// Replaces subnormal values by zero. Exponential tails decay into the
/// subnormal range far from the data, where arithmetic is very slow.
#[inline(always)]
pub(crate) fn flush_subnormal(v: f64) -> f64 {
    if v.abs() < f64::MIN_POSITIVE {
        0.0
    } else {
        v
    }
}

#[inline]
fn exponential_downstream(q: &[f64], right_farfield: f64, alpha: f64, out: &mut [f64]) {
    let n = q.len();
    out[n] = right_farfield;
    let mut w = right_farfield;
    for j in (0..n).rev() {
        let qj = q[j];
        w = flush_subnormal(qj + alpha * (w - qj));
        out[j] = w;
    }
}

#[inline]
fn exponential_upstream(q: &[f64], left_farfield: f64, alpha: f64, out: &mut [f64]) {
    out[0] = left_farfield;
    let mut w = left_farfield;
    for (j, &qj) in q.iter().enumerate() {
        w = flush_subnormal(qj + alpha * (w - qj));
        out[j + 1] = w;
    }
}

fn constant_window(
    grid: &Grid1D,
    q: &[f64],
    eta: f64,
    orientation: Orientation,
    prefix: &mut Vec<f64>,
    out: &mut [f64],
) {
    let n = q.len();
    // Sums are taken over deviations from a far-field level so that flat
    // regions cost no cancellation in the prefix differences.
    let base = match orientation {
        Orientation::Downstream => grid.right_farfield(),
        Orientation::Upstream => grid.left_farfield(),
    };
    let (lf, rf) = (grid.left_farfield() - base, grid.right_farfield() - base);
    prefix.clear();
    prefix.reserve(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in q {
        acc += v - base;
        prefix.push(acc);
    }
    // Window length in cell units.
    let m = eta / grid.dx();
    // Integral of q - base over [x_min, x_min + u dx] in units of dx;
    // far-fields continue the density outside the window.
    let cumulative = |u: f64| -> f64 {
        if u <= 0.0 {
            lf * u
        } else if u >= n as f64 {
            prefix[n] + rf * (u - n as f64)
        } else {
            let k = u.floor();
            let ki = k as usize;
            prefix[ki] + (q[ki] - base) * (u - k)
        }
    };
    match orientation {
        Orientation::Downstream => {
            let whole = m.floor();
            let frac = m - whole;
            let whole = whole as usize;
            for (j, slot) in out.iter_mut().enumerate() {
                let k = j + whole;
                let upper = if k < n {
                    prefix[k] + (q[k] - base) * frac
                } else {
                    prefix[n] + rf * ((k - n) as f64 + frac)
                };
                *slot = base + (upper - prefix[j]) / m;
            }
        }
        Orientation::Upstream => {
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = base + (prefix[j] - cumulative(j as f64 - m)) / m;
            }
        }
    }
}

/// Exponential-kernel nonlocal term at every interface (downstream).
pub fn nonlocal_exponential(q: &CellField, eta: f64) -> Result<InterfaceField> {
    Ok(KernelSpec::exponential(eta)?.apply(q))
}

/// Constant-kernel nonlocal term at every interface (downstream).
pub fn nonlocal_constant(q: &CellField, eta: f64) -> Result<InterfaceField> {
    Ok(KernelSpec::constant(eta)?.apply(q))
}

/// Inverts the exponential recursion: `q_i = (W_i - alpha W_{i+1}) / (1 - alpha)`.
pub fn reconstruct_density(w: &InterfaceField, eta: f64) -> Result<CellField> {
    check_eta(eta)?;
    let dx = w.grid().dx();
    let alpha = decay(dx, eta);
    if alpha >= 1.0 {
        return Err(Error::IllConditioned { ratio: dx / eta });
    }
    let gain = 1.0 / (1.0 - alpha);
    let values = w
        .values()
        .windows(2)
        .map(|p| (p[0] - alpha * p[1]) * gain)
        .collect();
    Ok(CellField::from_parts_unchecked(*w.grid(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_profile, PiecewiseConstantProfile};

    fn grid(x_min: f64, x_max: f64, n: usize) -> Grid1D {
        Grid1D::new(x_min, x_max, n, 0.0, 0.0).unwrap()
    }

    #[test]
    fn constant_field_is_fixed_point() {
        let g = Grid1D::new(-1.0, 1.0, 50, 0.3, 0.3).unwrap();
        let q = CellField::constant(g, 0.3).unwrap();
        for eta in [1e-3, 0.01, 0.37, 5.0] {
            for w in [
                nonlocal_exponential(&q, eta).unwrap(),
                nonlocal_constant(&q, eta).unwrap(),
            ] {
                assert!(w.values().iter().all(|v| (v - 0.3).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn step_at_half_window() {
        // Window [x, x + eta] with x = -eta/2 straddles the step symmetrically.
        let eta = 0.2;
        let g = grid(-1.0, 1.0, 100);
        let q = sample_profile(&PiecewiseConstantProfile::step(0.0), &g);
        let w = nonlocal_constant(&q, eta).unwrap();
        // interface 45 sits at -0.1
        assert!((g.interface(45) + 0.1).abs() < 1e-15);
        assert!((w.values()[45] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_kernel_window_split() {
        // Half of [2/3 - eta/2, 2/3 + eta/2] lies on the gap, half on the jam.
        let eta = 0.1;
        let g = grid(0.0, 1.0, 60);
        let q = sample_profile(&PiecewiseConstantProfile::platoon_gap_jam(), &g);
        let j = 37; // 37/60 = 2/3 - 0.05
        assert!((g.interface(j) - (2.0 / 3.0 - eta / 2.0)).abs() < 1e-15);
        let w = nonlocal_constant(&q, eta).unwrap();
        assert!((w.values()[j] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_kernel_fractional_window() {
        // eta = 2.5 cells: three cells with weights 1, 1, 1/2.
        let g = Grid1D::new(0.0, 5.0, 5, 0.0, 10.0).unwrap();
        let q = CellField::new(g, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let w = nonlocal_constant(&q, 2.5).unwrap();
        assert!((w.values()[0] - (1.0 + 2.0 + 1.5) / 2.5).abs() < 1e-14);
        // near the right end the window reaches into the far-field
        assert!((w.values()[4] - (5.0 + 10.0 * 1.5) / 2.5).abs() < 1e-14);
        assert_eq!(w.values()[5], 10.0);
    }

    #[test]
    fn exponential_recursion_matches_closed_form() {
        let eta = 0.1;
        let g = grid(0.0, 1.0, 30);
        let q = sample_profile(&PiecewiseConstantProfile::platoon_gap_jam(), &g);
        let w = nonlocal_exponential(&q, eta).unwrap();
        // x = 1/2: only the jam on [2/3, inf) contributes.
        let j = 15;
        let expect = ((0.5 - 2.0 / 3.0) / eta).exp();
        assert!((w.values()[j] - expect).abs() < 1e-13);
        assert!((expect - 0.188_875_602_837_562_2).abs() < 1e-12);
    }

    #[test]
    fn upstream_is_mirrored_downstream() {
        let g = Grid1D::new(-1.0, 2.0, 40, 0.25, 0.75).unwrap();
        let values: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64 / 10.0).collect();
        let q = CellField::new(g, values).unwrap();
        for family in [KernelFamily::Exponential, KernelFamily::Constant] {
            let up = KernelSpec::new(family, 0.17, Orientation::Upstream).unwrap();
            let down = KernelSpec::new(family, 0.17, Orientation::Downstream).unwrap();
            let direct = up.apply(&q);
            let via_mirror = down.apply(&q.mirrored()).mirrored();
            for (a, b) in direct.values().iter().zip(via_mirror.values()) {
                assert!((a - b).abs() < 1e-13, "{family:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn reconstruction_limits() {
        let g = Grid1D::new(0.0, 1.0, 10, 0.4, 0.4).unwrap();
        let w = InterfaceField::new(g, vec![0.4; 11]).unwrap();
        let q = reconstruct_density(&w, 0.05).unwrap();
        assert!(q.values().iter().all(|v| (v - 0.4).abs() < 1e-14));

        // eta << dx: alpha vanishes and q_i -> W_i.
        let vals: Vec<f64> = (0..11).map(|j| j as f64).collect();
        let w = InterfaceField::new(g, vals).unwrap();
        let q = reconstruct_density(&w, 1e-6).unwrap();
        for (i, v) in q.values().iter().enumerate() {
            assert_eq!(*v, i as f64);
        }

        assert!(matches!(
            reconstruct_density(&w, 1e30),
            Err(Error::IllConditioned { .. })
        ));
        assert!(reconstruct_density(&w, 0.0).is_err());
        assert!(nonlocal_exponential(&q, -1.0).is_err());
    }

    #[test]
    fn pairing_rules() {
        let dec = VelocityModel::greenshields();
        let inc = VelocityModel::new(
            crate::velocity::VelocityLaw::Affine {
                intercept: -1.0,
                slope: 1.0,
            },
            0.0,
            1.0,
            Monotonicity::Increasing,
        )
        .unwrap();
        let down = KernelSpec::exponential(0.1).unwrap();
        let up = KernelSpec::new(KernelFamily::Exponential, 0.1, Orientation::Upstream).unwrap();
        assert!(down.check_pairing(&dec).is_ok());
        assert!(down.check_pairing(&inc).is_err());
        assert!(up.check_pairing(&inc).is_ok());
        assert!(up.check_pairing(&dec).is_err());
    }
}
