//! Checks kernels and fluxes against independent quadrature and search.

use nonlocal_limit::*;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-15 {
                    let weight = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, weight);
                }
            }
        })
        .collect()
}

fn integrate(rule: &[(f64, f64)], a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * rule
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (left, right) = (simpson(f, a, m), simpson(f, m, b));
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            refine(f, a, m, left, 0.5 * tol, depth - 1)
                + refine(f, m, b, right, 0.5 * tol, depth - 1)
        }
    }
    refine(f, a, b, simpson(f, a, b), tol, 50)
}

fn test_field() -> CellField {
    let grid = Grid1D::new(-0.5, 1.5, 160, 0.3, 0.8).unwrap();
    let values = (0..160)
        .map(|i| {
            let x = grid.center(i);
            0.5 + 0.4 * (7.0 * x).sin() * (-(x - 0.4).powi(2)).exp()
        })
        .collect();
    CellField::new(grid, values).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn exponential_kernel_matches_quadrature() {
    let rule = gauss_legendre(12);
    let q = test_field();
    let g = *q.grid();
    for eta in [0.004, 0.05, 0.3] {
        let w = nonlocal_exponential(&q, eta).unwrap();
        for j in (0..=g.n_cells()).step_by(7) {
            let x = g.interface(j);
            let kernel = |y: f64| ((x - y) / eta).exp() / eta;
            let mut exact: f64 = (j..g.n_cells())
                .map(|i| {
                    q.values()[i] * integrate(&rule, g.interface(i), g.interface(i + 1), kernel)
                })
                .sum();
            exact += g.right_farfield() * ((x - g.x_max()) / eta).exp();
            let e = rel_err(w.values()[j], exact);
            assert!(
                e < 1e-10,
                "eta={eta} j={j}: {} vs {exact} ({e:e})",
                w.values()[j]
            );
        }
    }
}

#[test]
fn upstream_exponential_matches_quadrature() {
    let rule = gauss_legendre(12);
    let q = test_field();
    let g = *q.grid();
    let eta = 0.05;
    let w = KernelSpec::new(KernelFamily::Exponential, eta, Orientation::Upstream)
        .unwrap()
        .apply(&q);
    for j in (0..=g.n_cells()).step_by(5) {
        let x = g.interface(j);
        let kernel = |y: f64| ((y - x) / eta).exp() / eta;
        let mut exact: f64 = (0..j)
            .map(|i| q.values()[i] * integrate(&rule, g.interface(i), g.interface(i + 1), kernel))
            .sum();
        exact += g.left_farfield() * ((g.x_min() - x) / eta).exp();
        assert!(rel_err(w.values()[j], exact) < 1e-10, "j={j}");
    }
}

#[test]
fn exponential_kernel_of_indicator() {
    // q = 1 on [0, eta) gives W(0) = 1 - e^{-1}.
    let eta = 0.05;
    let grid = Grid1D::new(-1.0, 1.0, 200, 0.0, 0.0).unwrap();
    let values = (0..200)
        .map(|i| {
            if (0.0..eta).contains(&grid.center(i)) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let q = CellField::new(grid, values).unwrap();
    let w = nonlocal_exponential(&q, eta).unwrap();
    let oracle = adaptive_simpson(&|y| (-y / eta).exp() / eta, 0.0, eta, 1e-15);
    assert!((oracle - (1.0 - (-1.0f64).exp())).abs() < 1e-13);
    assert!(
        (w.values()[100] - oracle).abs() < 1e-12,
        "{}",
        w.values()[100]
    );
}

/// `(1/eta)` times the integral of the far-field-extended field over `[a, b]`.
fn window_mean(q: &CellField, a: f64, b: f64) -> f64 {
    let g = q.grid();
    let overlap = |lo: f64, hi: f64| (b.min(hi) - a.max(lo)).max(0.0);
    let mut s = g.left_farfield() * overlap(f64::NEG_INFINITY, g.x_min())
        + g.right_farfield() * overlap(g.x_max(), f64::INFINITY);
    for (i, v) in q.values().iter().enumerate() {
        s += v * overlap(g.interface(i), g.interface(i + 1));
    }
    s / (b - a)
}

#[test]
fn constant_kernel_matches_window_means() {
    let q = test_field();
    let g = *q.grid();
    // Window lengths that are and are not whole multiples of dx.
    for eta in [10.0 * g.dx(), 0.0371, 0.9] {
        let down = nonlocal_constant(&q, eta).unwrap();
        let up = KernelSpec::new(KernelFamily::Constant, eta, Orientation::Upstream)
            .unwrap()
            .apply(&q);
        for j in 0..=g.n_cells() {
            let x = g.interface(j);
            assert!(
                (down.values()[j] - window_mean(&q, x, x + eta)).abs() < 1e-12,
                "j={j}"
            );
            assert!(
                (up.values()[j] - window_mean(&q, x - eta, x)).abs() < 1e-12,
                "j={j}"
            );
        }
    }
}

fn argmax_by_search(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 1_000_000;
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap()
}

#[test]
fn critical_densities_match_search() {
    let linear = VelocityModel::greenshields();
    let quadratic = VelocityModel::new(
        VelocityLaw::Quadratic {
            v_max: 1.0,
            s_max: 1.0,
        },
        0.0,
        1.0,
        Monotonicity::Decreasing,
    )
    .unwrap();
    for (v, expected) in [(linear, 0.5), (quadratic, 1.0 / 3f64.sqrt())] {
        let found = critical_density(&v).unwrap();
        let searched = argmax_by_search(|s| v.eval(s) * s, 0.0, 1.0);
        // Comparing flux values locates a smooth maximum to about sqrt(eps).
        assert!((found - expected).abs() < 5e-8, "{found}");
        assert!((found - searched).abs() < 2e-6, "{found} vs {searched}");
    }
}

#[test]
fn godunov_flux_matches_extremum_search() {
    let flux = FluxModel::new(VelocityModel::greenshields()).unwrap();
    let f = |s: f64| flux.f(s);
    let levels: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
    for &a in &levels {
        for &b in &levels {
            let (lo, hi) = (a.min(b), a.max(b));
            let samples = (0..=20_000).map(|k| f(lo + (hi - lo) * k as f64 / 20_000.0));
            let oracle = if a <= b {
                samples.fold(f64::INFINITY, f64::min)
            } else {
                samples.fold(f64::NEG_INFINITY, f64::max)
            };
            let got = godunov_flux(a, b, &flux).unwrap();
            assert!(
                (got - oracle).abs() < 1e-8,
                "a={a} b={b}: {got} vs {oracle}"
            );
        }
    }
}
