//! CSV, image and field outputs.

use std::path::Path;

use ndarray::{Array1, ArrayView1};
use nlsparse::mri::io::{write_field, write_pgm};
use serde::Serialize;

use crate::bench::ConvergenceReport;
use crate::t1::T1Report;
use crate::{HarnessError, Result};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Writes `rows` with a header taken from the field names.
pub fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// One line per (kind, solver, iteration).
pub fn write_convergence_csv(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["kind", "solver", "lambda", "iteration", "objective"])?;
    for c in &report.curves {
        for (i, o) in c.objective.iter().enumerate() {
            w.write_record([
                c.kind.to_string(),
                c.solver.to_string(),
                c.lambda.to_string(),
                (i + 1).to_string(),
                o.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

const GAP: usize = 2;

/// Panels `[truth | estimate | |truth − estimate|]` for PD (top row) and T1
/// (bottom row), each row scaled to its true maximum and clipped to `[0, 1]`.
pub fn montage(
    rows: usize,
    cols: usize,
    pd: (ArrayView1<f64>, ArrayView1<f64>),
    t1: (ArrayView1<f64>, ArrayView1<f64>),
) -> (Array1<f64>, usize, usize) {
    let (h, w) = (2 * rows + GAP, 3 * cols + 2 * GAP);
    let mut out = Array1::<f64>::ones(h * w);
    let peak = |v: ArrayView1<f64>| v.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for ((truth, estimate), top) in [(pd, 0), (t1, rows + GAP)] {
        let scale = peak(truth);
        let diff = (&truth - &estimate).mapv(f64::abs);
        for (panel, field) in [truth, estimate, diff.view()].into_iter().enumerate() {
            let left = panel * (cols + GAP);
            for i in 0..rows {
                for j in 0..cols {
                    out[(top + i) * w + left + j] = (field[i * cols + j] / scale).clamp(0.0, 1.0);
                }
            }
        }
    }
    // pin the display range to [0, 1]
    out[0] = 0.0;
    (out, h, w)
}

/// Writes the error table, the true maps and per-split estimates (PGM for
/// display, binary fields for exact values) plus a four-panel montage per
/// split. Returns the written file names.
pub fn write_t1_outputs(dir: &Path, report: &T1Report) -> Result<Vec<String>> {
    let (rows, cols) = (report.maps.rows(), report.maps.cols());
    let mut names = Vec::new();
    let mut out = |name: String| {
        names.push(name.clone());
        dir.join(name)
    };
    write_csv(&out("t1_table.csv".into()), &report.rows())?;
    let pd_true = report.maps.pd();
    let t1_true = report.maps.t1().mapv(|v| if v > nlsparse::mri::BACKGROUND_T1_MS { v } else { 0.0 });
    write_pgm(out("pd_true.pgm".into()), pd_true.view(), rows, cols)?;
    write_pgm(out("t1_true.pgm".into()), t1_true.view(), rows, cols)?;
    write_field(out("pd_true.nlsf".into()), pd_true.view(), rows, cols, "a.u.")?;
    write_field(out("t1_true.nlsf".into()), t1_true.view(), rows, cols, "ms")?;
    for s in &report.splits {
        let tag = s.row.split.replace('/', "-");
        write_pgm(out(format!("pd_{tag}.pgm")), s.pd_estimate.view(), rows, cols)?;
        write_pgm(out(format!("t1_{tag}.pgm")), s.t1_estimate.view(), rows, cols)?;
        write_field(out(format!("pd_{tag}.nlsf")), s.pd_estimate.view(), rows, cols, "a.u.")?;
        write_field(out(format!("t1_{tag}.nlsf")), s.t1_estimate.view(), rows, cols, "ms")?;
        let (m, h, w) = montage(
            rows,
            cols,
            (pd_true.view(), s.pd_estimate.view()),
            (t1_true.view(), s.t1_estimate.view()),
        );
        write_pgm(out(format!("fig4_{tag}.pgm")), m.view(), h, w)?;
    }
    Ok(names)
}
