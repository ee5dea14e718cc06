//! Velocity laws `V` and their derivatives.

use crate::error::{Error, Result};

/// Number of sample points used to validate monotonicity and to bound
/// speeds over the admissible range.
pub const VALIDATION_SAMPLES: usize = 1001;

/// Closed-form velocity laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityLaw {
    /// `v_max (1 - s / s_max)`
    Linear { v_max: f64, s_max: f64 },
    /// `v_max (1 - (s / s_max)^2)`
    Quadratic { v_max: f64, s_max: f64 },
    /// `v`
    Constant { v: f64 },
    /// `intercept + slope * s`
    Affine { intercept: f64, slope: f64 },
}

impl VelocityLaw {
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            VelocityLaw::Linear { v_max, s_max } => v_max * (1.0 - s / s_max),
            VelocityLaw::Quadratic { v_max, s_max } => {
                let r = s / s_max;
                v_max * (1.0 - r * r)
            }
            VelocityLaw::Constant { v } => v,
            VelocityLaw::Affine { intercept, slope } => intercept + slope * s,
        }
    }

    #[inline]
    pub fn deriv(&self, s: f64) -> f64 {
        match *self {
            VelocityLaw::Linear { v_max, s_max } => -v_max / s_max,
            VelocityLaw::Quadratic { v_max, s_max } => -2.0 * v_max * s / (s_max * s_max),
            VelocityLaw::Constant { .. } => 0.0,
            VelocityLaw::Affine { slope, .. } => slope,
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            VelocityLaw::Linear { v_max, s_max } | VelocityLaw::Quadratic { v_max, s_max } => {
                v_max.is_finite() && s_max.is_finite() && s_max != 0.0
            }
            VelocityLaw::Constant { v } => v.is_finite(),
            VelocityLaw::Affine { intercept, slope } => intercept.is_finite() && slope.is_finite(),
        }
    }
}

/// Which sign condition on `V'` the model is declared to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    /// `V'(s) <= 0` on the admissible range; pairs with a downstream kernel.
    Decreasing,
    /// `V'(s) >= 0`; pairs with an upstream (left-looking) kernel.
    Increasing,
    /// `V'(s) s <= 0` for every `s`; allows densities of either sign.
    SignedProduct,
}

impl Monotonicity {
    pub fn name(&self) -> &'static str {
        match self {
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::Increasing => "increasing",
            Monotonicity::SignedProduct => "signed-product",
        }
    }
}

/// A velocity law restricted to an admissible density range, with its
/// monotonicity mode checked at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityModel {
    law: VelocityLaw,
    s_min: f64,
    s_max: f64,
    mode: Monotonicity,
    lipschitz: f64,
    max_speed: f64,
}

impl VelocityModel {
    pub fn new(law: VelocityLaw, s_min: f64, s_max: f64, mode: Monotonicity) -> Result<Self> {
        if !law.is_finite() {
            return Err(Error::Model(format!("non-finite parameters in {law:?}")));
        }
        if !(s_min.is_finite() && s_max.is_finite()) || s_min >= s_max {
            return Err(Error::Model(format!(
                "admissible range must satisfy s_min < s_max, got [{s_min}, {s_max}]"
            )));
        }
        let mut lipschitz: f64 = 0.0;
        let mut max_speed: f64 = 0.0;
        for k in 0..VALIDATION_SAMPLES {
            let s = s_min + (s_max - s_min) * k as f64 / (VALIDATION_SAMPLES - 1) as f64;
            let d = law.deriv(s);
            let ok = match mode {
                Monotonicity::Decreasing => d <= 0.0,
                Monotonicity::Increasing => d >= 0.0,
                Monotonicity::SignedProduct => d * s <= 0.0,
            };
            if !ok {
                return Err(Error::Model(format!(
                    "V'({s}) = {d} violates {} mode",
                    mode.name()
                )));
            }
            lipschitz = lipschitz.max(d.abs());
            max_speed = max_speed.max(law.eval(s).abs());
        }
        Ok(Self {
            law,
            s_min,
            s_max,
            mode,
            lipschitz,
            max_speed,
        })
    }

    /// `V(s) = 1 - s` on `[0, 1]`.
    pub fn greenshields() -> Self {
        Self::new(
            VelocityLaw::Linear {
                v_max: 1.0,
                s_max: 1.0,
            },
            0.0,
            1.0,
            Monotonicity::Decreasing,
        )
        .expect("greenshields model is valid")
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        self.law.eval(s)
    }

    #[inline]
    pub fn deriv(&self, s: f64) -> f64 {
        self.law.deriv(s)
    }

    pub fn law(&self) -> &VelocityLaw {
        &self.law
    }

    pub fn admissible_range(&self) -> (f64, f64) {
        (self.s_min, self.s_max)
    }

    pub fn mode(&self) -> Monotonicity {
        self.mode
    }

    /// Largest sampled `|V'|` over the admissible range.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Largest sampled `|V|` over the admissible range.
    pub fn max_abs_speed(&self) -> f64 {
        self.max_speed
    }

    /// True when `[lo, hi]` lies inside the admissible range (with a few ulps
    /// of slack for values produced by arithmetic).
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let slack = 1e-12 * (1.0 + self.s_max.abs().max(self.s_min.abs()));
        lo >= self.s_min - slack && hi <= self.s_max + slack
    }
}
