//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed. Tolerances are pinned below.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nonlocal_limit::diagnostics::{
    entropy_residual, total_variation, transport_residual_w, weak_residual, wq_identity_gap,
    FluxMode, TensorBump,
};
use nonlocal_limit::harness::{
    grid_for_eta, reference_grid, run_stability_probe, run_sweep, ExperimentConfig,
};
use nonlocal_limit::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const MP_LOWER: f64 = -1e-12;
const MP_UPPER_SLACK: f64 = 1e-6;
const TV_W_SLACK: f64 = 1e-3;
const TV_W_SLACK_CONSTANT: f64 = 1e-2;
const GAP_FRACTION: f64 = 0.05;
const GAP_RATIO: (f64, f64) = (1.6, 2.4);
const RECONSTRUCTION_TOL: f64 = 1e-12;
const CONVERGENCE_FRACTION: f64 = 0.05;
const TV_Q_LATE: (f64, f64) = (2.8, 3.2);
const TV_LOCAL: (f64, f64) = (0.95, 1.05);
const CONSERVATION_TOL: f64 = 1e-8;
const RESIDUAL_RATIO: (f64, f64) = (1.5, 3.0);
const ENTROPY_FLOOR: f64 = -1e-4;
const PROBE_FACTOR: f64 = 50.0;

const BUDGET_PER_ETA: Duration = Duration::from_secs(60);
const BUDGET_RECONSTRUCTION: Duration = Duration::from_secs(1);
const BUDGET_SWEEP: Duration = Duration::from_secs(600);
const BUDGET_FINE_RUN: Duration = Duration::from_secs(300);

/// Conservation defects of every run made by the suite.
static DEFECTS: Mutex<Vec<(String, f64)>> = Mutex::new(Vec::new());

fn record(label: impl Into<String>, report: &RunReport) {
    DEFECTS
        .lock()
        .unwrap()
        .push((label.into(), report.conservation_defect()));
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn run(id: &str, name: &str, f: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        verdict(false, format!("panicked: {msg}"))
    });
    println!(
        "criterion {id:<3} {} {name}: {} [{:.1} s]",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail,
        t.elapsed().as_secs_f64()
    );
    v.pass
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

fn datum(cfg: &ExperimentConfig, grid: &Grid1D) -> CellField {
    sample_profile(&cfg.profile().unwrap(), grid)
}

struct EtaRun {
    eta: f64,
    report: RunReport,
    elapsed: Duration,
}

/// Runs the default datum on the sweep grid for every η of the default list.
fn eta_suite(family: KernelFamily) -> Vec<EtaRun> {
    let cfg = ExperimentConfig::default();
    let runs: Vec<EtaRun> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .eta_list
            .iter()
            .map(|&eta| {
                let cfg = &cfg;
                s.spawn(move || {
                    let grid = grid_for_eta(cfg, eta).unwrap();
                    let scheme = NonlocalSchemeConfig::new(
                        KernelSpec::new(family, eta, Orientation::Downstream).unwrap(),
                        cfg.velocity_model().unwrap(),
                        cfg.cfl,
                        cfg.t_end,
                        cfg.snapshot_times.clone(),
                    )
                    .unwrap();
                    let t = Instant::now();
                    let report = solve_nonlocal(&datum(cfg, &grid), &scheme).unwrap();
                    EtaRun {
                        eta,
                        report,
                        elapsed: t.elapsed(),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for r in &runs {
        record(format!("{} eta={}", family.name(), r.eta), &r.report);
    }
    runs
}

fn max_principle(runs: &[EtaRun]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let lo = r
            .report
            .min_series
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let hi = r
            .report
            .max_series
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let ok = lo >= MP_LOWER && hi <= 1.0 + MP_UPPER_SLACK && r.elapsed <= BUDGET_PER_ETA;
        pass &= ok;
        parts.push(format!(
            "eta={}: q in [{lo:.3e}, 1{:+.3e}] {:.1} s",
            r.eta,
            hi - 1.0,
            r.elapsed.as_secs_f64()
        ));
    }
    verdict(pass, parts.join("; "))
}

fn tv_w_bound(runs: &[EtaRun], slack: f64) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let tv_q0 = r.report.tv_q_series[0];
        let tv_w0 = r.report.tv_w_series[0];
        let up = RunReport::cumulative_increase(&r.report.tv_w_series);
        let ok = (tv_q0 - 2.0).abs() <= 1e-12 && tv_w0 <= tv_q0 + 1e-12 && up <= slack * tv_q0;
        pass &= ok;
        parts.push(format!(
            "eta={}: TV(q0)={tv_q0:.15} TV(W0)={tv_w0:.12} upward={up:.2e}",
            r.eta
        ));
    }
    verdict(
        pass,
        format!("{} (allowed {:.0e}·TV(q0))", parts.join("; "), slack),
    )
}

fn solve_exponential(q0: &CellField, eta: f64, t_end: f64, times: Vec<f64>) -> RunReport {
    let scheme = NonlocalSchemeConfig::new(
        KernelSpec::exponential(eta).unwrap(),
        VelocityModel::greenshields(),
        0.5,
        t_end,
        times,
    )
    .unwrap();
    solve_nonlocal(q0, &scheme).unwrap()
}

fn wq_identity() -> Verdict {
    let cfg = ExperimentConfig::default();
    let eta = 0.01;
    let coarse = cfg.base_grid().unwrap().refined(8).unwrap();
    assert!(coarse.dx() <= eta / 100.0);
    let fine = coarse.refined(2).unwrap();
    let times: Vec<f64> = (0..=5).map(|k| 0.1 * k as f64).collect();
    let gaps = |grid: &Grid1D| -> Vec<(f64, f64)> {
        let r = solve_exponential(&datum(&cfg, grid), eta, 0.5, times.clone());
        record(format!("identity n={}", grid.n_cells()), &r);
        r.snapshots
            .iter()
            .map(|s| {
                let w = s.w.as_ref().unwrap();
                (wq_identity_gap(&s.q, w, eta), eta * total_variation(w))
            })
            .collect()
    };
    let (gc, gf) = std::thread::scope(|s| {
        let a = s.spawn(|| gaps(&coarse));
        let b = s.spawn(|| gaps(&fine));
        (a.join().unwrap(), b.join().unwrap())
    });
    let bound_ok = gc
        .iter()
        .chain(&gf)
        .all(|&(gap, scale)| gap <= GAP_FRACTION * scale);
    let worst = gc
        .iter()
        .chain(&gf)
        .map(|&(gap, scale)| gap / scale)
        .fold(0.0, f64::max);
    let ratios: Vec<f64> = gc.iter().zip(&gf).map(|(c, f)| c.0 / f.0).collect();
    let ratio_ok = ratios.iter().all(|&r| within(r, GAP_RATIO));
    verdict(
        bound_ok && ratio_ok,
        format!(
            "max gap/(eta TV(W)) = {worst:.2e} (bound {GAP_FRACTION}); halving ratios {} (want {:?})",
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", "),
            GAP_RATIO
        ),
    )
}

fn reconstruction() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x_min = rng.random_range(-2.0..0.0);
        let len = rng.random_range(0.5..4.0);
        let grid = Grid1D::new(
            x_min,
            x_min + len,
            256,
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..1.0),
        )
        .unwrap();
        let values: Vec<f64> = (0..256).map(|_| rng.random_range(0.0..1.0)).collect();
        let q = CellField::new(grid, values).unwrap();
        let eta = grid.dx() * 10f64.powf(rng.random_range(-1.0..2.0));
        let back = reconstruct_density(&nonlocal_exponential(&q, eta).unwrap(), eta).unwrap();
        let err = q
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    let elapsed = t.elapsed();
    verdict(
        worst <= RECONSTRUCTION_TOL && elapsed <= BUDGET_RECONSTRUCTION,
        format!("max |q - R(K(q))| = {worst:.2e} over 100 fields"),
    )
}

fn convergence() -> Verdict {
    let cfg = ExperimentConfig {
        eta_list: vec![0.1, 0.05, 0.025, 0.0125],
        ..ExperimentConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let outcome = run_sweep(&cfg, dir.path()).unwrap();
    let elapsed = t.elapsed();
    record("sweep reference", &outcome.reference);
    let mass = cfg
        .profile()
        .unwrap()
        .integral(cfg.window[0], cfg.window[1]);
    let eq: Vec<f64> = outcome
        .rows
        .iter()
        .map(|r| r.sup_time_l1_q_vs_ref)
        .collect();
    let ew: Vec<f64> = outcome
        .rows
        .iter()
        .map(|r| r.sup_time_l1_w_vs_ref)
        .collect();
    let decreasing = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    let limit = CONVERGENCE_FRACTION * mass;
    let pass = decreasing(&eq)
        && decreasing(&ew)
        && *eq.last().unwrap() <= limit
        && *ew.last().unwrap() <= limit
        && elapsed <= BUDGET_SWEEP;
    let fmt = |e: &[f64]| {
        e.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    verdict(
        pass,
        format!(
            "q errors [{}], W errors [{}], limit {limit:.4}",
            fmt(&eq),
            fmt(&ew)
        ),
    )
}

fn tv_phenomenology(fine: &EtaRun) -> Verdict {
    let cfg = ExperimentConfig::default();
    let r = &fine.report;
    let late = 0.75 * cfg.t_end;
    let (lo, hi) = r
        .times()
        .zip(&r.tv_q_series)
        .filter(|(t, _)| *t >= late)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &v)| {
            (lo.min(v), hi.max(v))
        });
    let tv_q_ok = lo >= TV_Q_LATE.0 && hi <= TV_Q_LATE.1;
    let tv_w_up = RunReport::cumulative_increase(&r.tv_w_series);
    let tv_w_ok = tv_w_up <= TV_W_SLACK * r.tv_q_series[0];

    let grid = reference_grid(&cfg).unwrap();
    let flux = FluxModel::new(cfg.velocity_model().unwrap()).unwrap();
    let t = Instant::now();
    let local = solve_local(
        &datum(&cfg, &grid),
        &flux,
        cfg.cfl,
        cfg.t_end,
        &cfg.snapshot_times,
    )
    .unwrap();
    let elapsed = t.elapsed() + fine.elapsed;
    record("local reference", &local);
    let (llo, lhi) = local
        .times()
        .zip(&local.tv_q_series)
        .filter(|(t, _)| *t > 1.1 && *t < cfg.t_end)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &v)| {
            (lo.min(v), hi.max(v))
        });
    let local_ok = llo >= TV_LOCAL.0 && lhi <= TV_LOCAL.1;
    verdict(
        tv_q_ok && tv_w_ok && local_ok && elapsed <= BUDGET_FINE_RUN,
        format!(
            "eta={} n={}: late TV(q) in [{lo:.4}, {hi:.4}] (want {:?}) {}; \
             TV(W) upward {tv_w_up:.2e} {}; local TV in [{llo:.4}, {lhi:.4}] {}",
            fine.eta,
            r.initial().q.len(),
            TV_Q_LATE,
            ok_word(tv_q_ok),
            ok_word(tv_w_ok),
            ok_word(local_ok),
        ),
    )
}

fn ok_word(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "failed"
    }
}

fn conservation() -> Verdict {
    let defects = DEFECTS.lock().unwrap();
    let (label, worst) =
        defects.iter().cloned().fold(
            (String::new(), 0.0),
            |acc, (l, d)| if d > acc.1 { (l, d) } else { acc },
        );
    verdict(
        !defects.is_empty() && worst <= CONSERVATION_TOL,
        format!(
            "{} runs, worst relative defect {worst:.2e} ({label})",
            defects.len()
        ),
    )
}

/// Test functions shared by the residual criteria.
fn test_functions() -> [TensorBump; 3] {
    [
        TensorBump::on(1.0, -0.5, 0.5, -0.5, 1.0).unwrap(),
        TensorBump::on(1.0, -0.2, 0.45, 0.2, 1.2).unwrap(),
        TensorBump::on(1.0, -0.1, 0.3, 0.3, 0.9).unwrap(),
    ]
}

fn residual_rates() -> Verdict {
    const T: f64 = 0.5;
    const STRIDE: usize = 4;
    let eta = 0.01;
    let cfg = ExperimentConfig::default();
    let v = VelocityModel::greenshields();
    let measure = |n: usize| -> (Vec<f64>, f64) {
        let grid = cfg.base_grid().unwrap().refined(n).unwrap();
        let q0 = datum(&cfg, &grid);
        let probe =
            NonlocalSchemeConfig::new(KernelSpec::exponential(eta).unwrap(), v, 0.5, T, vec![])
                .unwrap();
        let dt = cfl_dt(&q0, &probe).unwrap();
        let steps = (T / dt).ceil() as usize;
        let mut times: Vec<f64> = (0..steps).step_by(STRIDE).map(|k| k as f64 * dt).collect();
        times.push(T);
        let r = solve_exponential(&q0, eta, T, times);
        record(format!("residual n={}", grid.n_cells()), &r);
        let weak = test_functions()
            .iter()
            .map(|phi| weak_residual(&r, &v, FluxMode::Nonlocal, phi).unwrap())
            .collect();
        (weak, transport_residual_w(&r, &v, eta).unwrap())
    };
    let ((wc, tc), (wf, tf)) = std::thread::scope(|s| {
        let a = s.spawn(|| measure(1));
        let b = s.spawn(|| measure(2));
        (a.join().unwrap(), b.join().unwrap())
    });
    let ratios: Vec<f64> = wc.iter().zip(&wf).map(|(c, f)| c / f).collect();
    let t_ratio = tc / tf;
    let pass = ratios.iter().all(|&r| within(r, RESIDUAL_RATIO)) && within(t_ratio, RESIDUAL_RATIO);
    verdict(
        pass,
        format!(
            "weak-form ratios {} transport ratio {t_ratio:.2} (want {:?})",
            ratios
                .iter()
                .map(|r| format!("{r:.2}"))
                .collect::<Vec<_>>()
                .join(" "),
            RESIDUAL_RATIO
        ),
    )
}

fn entropy() -> Verdict {
    const T: f64 = 0.5;
    let cfg = ExperimentConfig::default();
    let grid = reference_grid(&cfg).unwrap();
    let flux = FluxModel::new(VelocityModel::greenshields()).unwrap();
    let times: Vec<f64> = (0..=200).map(|k| T * k as f64 / 200.0).collect();
    let r = solve_local(&datum(&cfg, &grid), &flux, cfg.cfl, T, &times).unwrap();
    record("entropy reference", &r);
    let mut worst = f64::INFINITY;
    for k in [0.25, 0.5, 0.75] {
        for phi in &test_functions() {
            worst = worst.min(entropy_residual(&r, &flux, k, phi).unwrap());
        }
    }
    verdict(
        worst >= ENTROPY_FLOOR,
        format!("n={}: smallest of 9 residuals {worst:.3e}", grid.n_cells()),
    )
}

fn stability() -> Verdict {
    let cfg = ExperimentConfig {
        eta_list: vec![0.01],
        ..ExperimentConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let deltas = [1e-3, 1e-2, 1e-1];
    let rows = run_stability_probe(&cfg, &deltas, dir.path()).unwrap();
    let nondecreasing = rows
        .windows(2)
        .all(|w| w[1].sup_time_l1 >= w[0].sup_time_l1);
    let bounded = rows.iter().all(|r| r.sup_time_l1 <= PROBE_FACTOR * r.delta);
    verdict(
        nondecreasing && bounded && rows.len() == deltas.len(),
        rows.iter()
            .map(|r| format!("delta={:.0e}: {:.3e}", r.delta, r.sup_time_l1))
            .collect::<Vec<_>>()
            .join("; "),
    )
}

fn main() -> ExitCode {
    let mut failed = Vec::new();
    let mut check = |id: &'static str, name: &str, f: &mut dyn FnMut() -> Verdict| {
        if !run(id, name, f) {
            failed.push(id);
        }
    };

    let exponential = eta_suite(KernelFamily::Exponential);
    check("1", "maximum principle", &mut || {
        max_principle(&exponential)
    });
    check("2", "TV bound on W", &mut || {
        tv_w_bound(&exponential, TV_W_SLACK)
    });
    check("3", "W-q identity", &mut wq_identity);
    check("4", "reconstruction identity", &mut reconstruction);
    check("5", "nonlocal-to-local convergence", &mut convergence);
    let fine = exponential.iter().find(|r| r.eta == 1e-3).unwrap();
    check("6", "TV phenomenology at eta=1e-3", &mut || {
        tv_phenomenology(fine)
    });
    check(
        "8",
        "weak-form and transport residual rates",
        &mut residual_rates,
    );
    check("9", "entropy residuals", &mut entropy);
    check("10", "constant kernel", &mut || {
        let runs = eta_suite(KernelFamily::Constant);
        let mp = max_principle(&runs);
        let tv = tv_w_bound(&runs, TV_W_SLACK_CONSTANT);
        verdict(mp.pass && tv.pass, format!("{}; {}", mp.detail, tv.detail))
    });
    check("11", "stability probe", &mut stability);
    check("7", "conservation", &mut conservation);

    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
