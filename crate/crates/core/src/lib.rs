//! Finite-volume simulation of scalar nonlocal conservation laws
//!
//! ```text
//! ∂t q + ∂x (V(W_η[q]) q) = 0,    W_η[q](x) = (1/η) ∫_x^∞ e^{(x-y)/η} q(y) dy,
//! ```
//!
//! together with a Godunov solver for the local law `∂t q + ∂x (V(q) q) = 0`
//! and the diagnostics used to study the limit `η → 0`.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod kernel;
pub mod local;
pub mod nonlocal;
pub mod report;
pub mod velocity;

pub use error::{Error, Result};
pub use grid::{
    sample_profile, total_mass, CellField, Grid1D, InterfaceField, PiecewiseConstantProfile,
};
pub use kernel::{
    nonlocal_constant, nonlocal_exponential, reconstruct_density, KernelFamily, KernelSpec,
    Orientation,
};
pub use local::{critical_density, godunov_flux, solve_local, FluxModel};
pub use nonlocal::{cfl_dt, solve_nonlocal, step_upwind, NonlocalSchemeConfig};
pub use report::{RunReport, Snapshot};
pub use velocity::{Monotonicity, VelocityLaw, VelocityModel};
