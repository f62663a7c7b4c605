//! One-shot recovery from user-provided data files.

use std::path::Path;

use ndarray::{Array1, Array2};
use nlsparse::{AnalysisOperator, MeasurementModel, MeasurementVector, ModelKind, SignalShape};

use crate::config::Continuation;
use crate::continuation::{solve_problem, Problem, Solve, SolverKind};
use crate::{HarnessError, Result};

fn parse_error(path: &Path, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let row = record?
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| parse_error(path, format!("row {}: `{field}` is not a number", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads a headerless CSV matrix, one row per line.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let rows = read_rows(path)?;
    let n = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || n == 0 {
        return Err(parse_error(path, "matrix is empty"));
    }
    let m = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((m, n), flat).map_err(|_| parse_error(path, "rows have different lengths"))
}

/// Reads a headerless CSV vector, either one value per line or a single row.
pub fn read_vector_csv(path: &Path) -> Result<Array1<f64>> {
    let rows = read_rows(path)?;
    let values: Vec<f64> = if rows.len() == 1 {
        rows.into_iter().flatten().collect()
    } else if rows.iter().all(|r| r.len() == 1) {
        rows.into_iter().flatten().collect()
    } else {
        return Err(parse_error(path, "expected a single row or a single column"));
    };
    if values.is_empty() {
        return Err(parse_error(path, "vector is empty"));
    }
    Ok(Array1::from(values))
}

/// Writes one value per line, in shortest round-trip form.
pub fn write_vector_csv(path: &Path, x: &Array1<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for v in x {
        w.write_record([v.to_string()])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Analysis operator for a signal of length `n`.
pub fn vector_transform(name: &str, n: usize) -> Result<AnalysisOperator> {
    match name {
        "identity" => Ok(AnalysisOperator::identity(SignalShape::Vector(n))),
        "haar" => Ok(AnalysisOperator::haar(SignalShape::Vector(n))?),
        "finite-difference" | "tv" => Ok(AnalysisOperator::finite_difference_2d(1, n)?),
        other => Err(HarnessError::Config(format!(
            "unknown transform `{other}` (expected identity, haar or finite-difference)"
        ))),
    }
}

/// Recovers `x` from `y ≈ f(Ax)` with the given measurement kind, transform
/// and final relative λ, using the continuation driver.
pub fn recover_vector(
    kind: ModelKind,
    a: Array2<f64>,
    y: Array1<f64>,
    transform: &str,
    solver: SolverKind,
    cont: &Continuation,
    lambda_rel: f64,
) -> Result<Solve> {
    if kind == ModelKind::FourierMri {
        return Err(HarnessError::Config(
            "fourier-mri data is recovered from phantom images, not a matrix".into(),
        ));
    }
    if a.nrows() != y.len() {
        return Err(HarnessError::Config(format!(
            "matrix has {} rows but there are {} measurements",
            a.nrows(),
            y.len()
        )));
    }
    let psi = vector_transform(transform, a.ncols())?;
    let model = MeasurementModel::with_matrix(kind, a.clone())?;
    let y = MeasurementVector::Real(y);
    let problem = Problem {
        a: &a,
        model: &model,
        y: &y,
        psi: &psi,
    };
    solve_problem(problem, solver, cont, lambda_rel)
}
