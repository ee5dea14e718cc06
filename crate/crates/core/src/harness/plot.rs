//! Generates `plot.py`, a matplotlib script that renders the sweep CSVs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::experiment::{eta_dir_name, sweep_outputs};
use crate::error::{Error, Result};

/// Time of the profile panel.
const PROFILE_TIME: f64 = 0.5;

const BODY: &str = r#"

def read(name):
    with open(os.path.join(HERE, name), newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}


def snapshot_grid(data):
    times = sorted(set(data["time"]))
    n = len(data["time"]) // len(times)
    x = data["x_center"][:n]
    q = [data["q"][k * n:(k + 1) * n] for k in range(len(times))]
    w = [data["W"][k * n:(k + 1) * n] for k in range(len(times))]
    return times, x, q, w


def nearest(times, t):
    return min(range(len(times)), key=lambda k: abs(times[k] - t))


def main():
    ref = snapshot_grid(read(REFERENCE["snapshots"]))
    ref_tv = read(REFERENCE["tv_series"])

    fig, axes = plt.subplots(1, len(RUNS), figsize=(4 * len(RUNS), 3.5), squeeze=False)
    for ax, (eta, files) in zip(axes[0], RUNS):
        times, x, q, _ = snapshot_grid(read(files["snapshots"]))
        im = ax.imshow(q, origin="lower", aspect="auto", vmin=0.0, vmax=1.0,
                       extent=[x[0], x[-1], times[0], times[-1]], cmap="viridis")
        ax.set_title(f"eta = {eta:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("t")
    fig.colorbar(im, ax=axes[0].tolist())
    fig.savefig(os.path.join(HERE, "heatmaps.png"), dpi=150)

    fig, (aq, aw) = plt.subplots(1, 2, figsize=(10, 3.5))
    times, x, q, _ = ref
    k = nearest(times, PROFILE_TIME)
    aq.plot(x, q[k], "k--", label="local")
    aw.plot(x, q[k], "k--", label="local")
    for eta, files in RUNS:
        times, x, q, w = snapshot_grid(read(files["snapshots"]))
        k = nearest(times, PROFILE_TIME)
        aq.plot(x, q[k], label=f"eta = {eta:g}")
        aw.plot(x, w[k], label=f"eta = {eta:g}")
    aq.set_title(f"q at t = {PROFILE_TIME}")
    aw.set_title(f"W at t = {PROFILE_TIME}")
    aq.legend()
    fig.savefig(os.path.join(HERE, "profiles.png"), dpi=150)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ref_tv["time"], ref_tv["tv_q"], "k--", label="local")
    for eta, files in RUNS:
        tv = read(files["tv_series"])
        line, = ax.plot(tv["time"], tv["tv_q"], label=f"q, eta = {eta:g}")
        ax.plot(tv["time"], tv["tv_W"], ":", color=line.get_color(), label=f"W, eta = {eta:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("total variation")
    ax.legend()
    fig.savefig(os.path.join(HERE, "total_variation.png"), dpi=150)

    sweep = read(SWEEP)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(sweep["eta"], sweep["sup_time_l1_q_vs_ref"], "o-", label="q")
    ax.loglog(sweep["eta"], sweep["sup_time_l1_W_vs_ref"], "s-", label="W")
    ax.set_xlabel("eta")
    ax.set_ylabel("sup_t L1 distance to local")
    ax.legend()
    fig.savefig(os.path.join(HERE, "convergence.png"), dpi=150)

    for eta, files in RUNS:
        with open(os.path.join(HERE, files["diagnostics"]), newline="") as f:
            for row in csv.DictReader(f):
                print(f"eta = {eta:g}  {row['name']}: {row['value']}")

    if PROBE is not None:
        probe = read(PROBE)
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(probe["delta"], probe["sup_time_l1"], "o-")
        ax.set_xlabel("delta")
        ax.set_ylabel("sup_t L1 distance")
        fig.savefig(os.path.join(HERE, "stability.png"), dpi=150)


if __name__ == "__main__":
    main()
"#;

fn py_path(p: &Path) -> String {
    format!("{:?}", p.to_string_lossy().replace('\\', "/"))
}

/// Writes `plot.py` into `out` after checking that every sweep CSV exists.
/// `probe.csv` is plotted too when present.
pub fn emit_plot_script(cfg: &ExperimentConfig, out: &Path) -> Result<PathBuf> {
    let expected = sweep_outputs(cfg);
    let missing: Vec<PathBuf> = expected
        .iter()
        .map(|p| out.join(p))
        .filter(|p| !p.is_file())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFiles(missing));
    }
    let probe = out.join("probe.csv").is_file();

    let mut s = String::new();
    s.push_str("# Renders the CSV files in this directory. Requires matplotlib.\n");
    s.push_str("import csv\nimport os\n\nimport matplotlib\n\nmatplotlib.use(\"Agg\")\n");
    s.push_str("import matplotlib.pyplot as plt\n\n");
    s.push_str("HERE = os.path.dirname(os.path.abspath(__file__))\n");
    writeln!(s, "PROFILE_TIME = {PROFILE_TIME:?}").unwrap();
    writeln!(s, "SWEEP = {}", py_path(Path::new("sweep.csv"))).unwrap();
    s.push_str("REFERENCE = {\n");
    for name in ["snapshots", "tv_series"] {
        let p = Path::new("reference").join(format!("{name}.csv"));
        writeln!(s, "    \"{name}\": {},", py_path(&p)).unwrap();
    }
    s.push_str("}\nRUNS = [\n");
    for &eta in &cfg.eta_list {
        let dir = PathBuf::from(eta_dir_name(eta));
        write!(s, "    ({eta:?}, {{").unwrap();
        for (k, name) in ["snapshots", "tv_series", "diagnostics"].iter().enumerate() {
            if k > 0 {
                s.push_str(", ");
            }
            write!(
                s,
                "\"{name}\": {}",
                py_path(&dir.join(format!("{name}.csv")))
            )
            .unwrap();
        }
        s.push_str("}),\n");
    }
    s.push_str("]\n");
    if probe {
        writeln!(s, "PROBE = {}", py_path(Path::new("probe.csv"))).unwrap();
    } else {
        s.push_str("PROBE = None\n");
    }
    s.push_str(BODY);

    let path = out.join("plot.py");
    fs::write(&path, s).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
