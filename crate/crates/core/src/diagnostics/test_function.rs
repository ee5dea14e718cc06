use crate::error::{Error, Result};

/// Closed rectangle `[t_lo, t_hi] × [x_lo, x_hi]` outside which a test
/// function vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub t_lo: f64,
    pub t_hi: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

/// A compactly supported C¹ function of `(t, x)` with its partial derivatives.
pub trait TestFunction {
    fn eval(&self, t: f64, x: f64) -> f64;
    fn dt_eval(&self, t: f64, x: f64) -> f64;
    fn dx_eval(&self, t: f64, x: f64) -> f64;
    fn support(&self) -> Support;
}

/// Product of two polynomial bumps `(1 - u²)³`, which is C² with support
/// `[t_center ± t_half] × [x_center ± x_half]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorBump {
    pub amplitude: f64,
    pub t_center: f64,
    pub t_half: f64,
    pub x_center: f64,
    pub x_half: f64,
}

impl TensorBump {
    /// Bump covering `[t_lo, t_hi] × [x_lo, x_hi]`.
    pub fn on(amplitude: f64, t_lo: f64, t_hi: f64, x_lo: f64, x_hi: f64) -> Result<Self> {
        if !(t_lo < t_hi && x_lo < x_hi) || !amplitude.is_finite() {
            return Err(Error::domain(
                "test function support must be a nonempty rectangle",
            ));
        }
        Ok(Self {
            amplitude,
            t_center: 0.5 * (t_lo + t_hi),
            t_half: 0.5 * (t_hi - t_lo),
            x_center: 0.5 * (x_lo + x_hi),
            x_half: 0.5 * (x_hi - x_lo),
        })
    }
}

#[inline]
fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - u * u;
        s * s * s
    }
}

#[inline]
fn bump_prime(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - u * u;
        -6.0 * u * s * s
    }
}

impl TestFunction for TensorBump {
    fn eval(&self, t: f64, x: f64) -> f64 {
        let ut = (t - self.t_center) / self.t_half;
        let ux = (x - self.x_center) / self.x_half;
        self.amplitude * bump(ut) * bump(ux)
    }

    fn dt_eval(&self, t: f64, x: f64) -> f64 {
        let ut = (t - self.t_center) / self.t_half;
        let ux = (x - self.x_center) / self.x_half;
        self.amplitude * bump_prime(ut) / self.t_half * bump(ux)
    }

    fn dx_eval(&self, t: f64, x: f64) -> f64 {
        let ut = (t - self.t_center) / self.t_half;
        let ux = (x - self.x_center) / self.x_half;
        self.amplitude * bump(ut) * bump_prime(ux) / self.x_half
    }

    fn support(&self) -> Support {
        Support {
            t_lo: self.t_center - self.t_half,
            t_hi: self.t_center + self.t_half,
            x_lo: self.x_center - self.x_half,
            x_hi: self.x_center + self.x_half,
        }
    }
}

/// Checks that `phi` vanishes outside its support and that its derivative
/// callbacks agree with central differences to `1e-6` (relative to the
/// derivative scale) on a sample lattice.
pub fn validate_test_function(phi: &dyn TestFunction) -> Result<()> {
    let s = phi.support();
    let (lt, lx) = (s.t_hi - s.t_lo, s.x_hi - s.x_lo);
    let outside = [
        (s.t_lo - 0.1 * lt, s.x_lo + 0.5 * lx),
        (s.t_hi + 0.1 * lt, s.x_lo + 0.5 * lx),
        (s.t_lo + 0.5 * lt, s.x_lo - 0.1 * lx),
        (s.t_lo + 0.5 * lt, s.x_hi + 0.1 * lx),
    ];
    for (t, x) in outside {
        let v = phi.eval(t, x);
        if v.abs() > 1e-14 {
            return Err(Error::domain(format!(
                "test function is {v} at ({t}, {x}) outside its support"
            )));
        }
    }
    const SAMPLES: usize = 13;
    let h_t = 1e-6 * lt;
    let h_x = 1e-6 * lx;
    let mut scale_t: f64 = 0.0;
    let mut scale_x: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let mut worst_x: f64 = 0.0;
    for a in 1..SAMPLES {
        for b in 1..SAMPLES {
            let t = s.t_lo + lt * a as f64 / SAMPLES as f64;
            let x = s.x_lo + lx * b as f64 / SAMPLES as f64;
            let fd_t = (phi.eval(t + h_t, x) - phi.eval(t - h_t, x)) / (2.0 * h_t);
            let fd_x = (phi.eval(t, x + h_x) - phi.eval(t, x - h_x)) / (2.0 * h_x);
            let (dt, dx) = (phi.dt_eval(t, x), phi.dx_eval(t, x));
            scale_t = scale_t.max(dt.abs());
            scale_x = scale_x.max(dx.abs());
            worst_t = worst_t.max((fd_t - dt).abs());
            worst_x = worst_x.max((fd_x - dx).abs());
        }
    }
    if worst_t > 1e-6 * scale_t.max(1.0) || worst_x > 1e-6 * scale_x.max(1.0) {
        return Err(Error::domain(format!(
            "derivative callbacks disagree with finite differences ({worst_t:e}, {worst_x:e})"
        )));
    }
    Ok(())
}
