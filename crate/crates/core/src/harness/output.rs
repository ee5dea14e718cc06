//! CSV emission. Floats use 17 significant digits so files round-trip
//! exactly; lines end in `\n`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::report::RunReport;

/// One CSV cell.
pub(crate) enum Field {
    Float(f64),
    Int(usize),
    Text(&'static str),
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v)
    }
}

impl From<&'static str> for Field {
    fn from(v: &'static str) -> Self {
        Field::Text(v)
    }
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Float(v) if v.is_nan() => "NaN".into(),
            Field::Float(v) => format!("{v:.16e}"),
            Field::Int(v) => v.to_string(),
            Field::Text(s) => (*s).into(),
        }
    }
}

/// In-memory CSV table with a fixed header.
pub(crate) struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub(crate) fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Self { writer }
    }

    pub(crate) fn row<const N: usize>(&mut self, fields: [Field; N]) {
        self.writer
            .write_record(fields.iter().map(Field::render))
            .expect("writing to memory");
    }

    fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("writing to memory")
    }

    pub(crate) fn write(self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, self.into_bytes()).map_err(|e| Error::io(path, e))
    }
}

pub const SNAPSHOTS_HEADER: [&str; 5] = ["time", "cell_index", "x_center", "q", "W"];
pub const TV_SERIES_HEADER: [&str; 5] = ["step", "time", "tv_q", "tv_W", "mass"];
pub const DIAGNOSTICS_HEADER: [&str; 2] = ["name", "value"];
pub const SWEEP_HEADER: [&str; 6] = [
    "eta",
    "sup_time_l1_q_vs_ref",
    "sup_time_l1_W_vs_ref",
    "tv_W_max",
    "tv_q_final",
    "wq_identity_gap",
];
pub const PROBE_HEADER: [&str; 2] = ["delta", "sup_time_l1"];

/// `W` is written as the mean of the two interfaces bounding each cell, and
/// as `NaN` for local runs.
pub(crate) fn write_snapshots(report: &RunReport, path: &Path) -> Result<()> {
    let mut t = Table::new(&SNAPSHOTS_HEADER);
    for snap in &report.snapshots {
        let grid = snap.q.grid();
        let w = snap.w.as_ref().map(|w| w.cell_average());
        for (i, &q) in snap.q.values().iter().enumerate() {
            let wi = w.as_ref().map_or(f64::NAN, |w| w.values()[i]);
            t.row([
                snap.time.into(),
                i.into(),
                grid.center(i).into(),
                q.into(),
                wi.into(),
            ]);
        }
    }
    t.write(path)
}

pub(crate) fn write_tv_series(report: &RunReport, path: &Path) -> Result<()> {
    let mut t = Table::new(&TV_SERIES_HEADER);
    for (step, time) in report.times().enumerate() {
        let tv_w = report.tv_w_series.get(step).copied().unwrap_or(f64::NAN);
        t.row([
            step.into(),
            time.into(),
            report.tv_q_series[step].into(),
            tv_w.into(),
            report.mass_series[step].into(),
        ]);
    }
    t.write(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let mut t = Table::new(&["a", "b", "c"]);
        let x = 0.1 + 0.2;
        t.row([x.into(), 7usize.into(), f64::NAN.into()]);
        let text = String::from_utf8(t.into_bytes()).unwrap();
        let line = text.lines().nth(1).unwrap().to_string();
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0].parse::<f64>().unwrap(), x);
        assert_eq!(cells[1], "7");
        assert_eq!(cells[2], "NaN");
        assert!(!text.contains('\r'));
    }
}
