//! Deterministic CSV and JSON output.
//!
//! Floats are written with 17 significant digits in scientific notation,
//! lines end in `\n`, and files are replaced atomically.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lyapunov::{AlgebraicSolution, GramianSolution};
use crate::stability::{HilgerDisk, StabilityReport};
use crate::timescale::Grid;
use crate::verify::{LyapunovTrace, Trajectory};

/// `1.3333333333333333e0` style: round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Header plus rows of already-formatted fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::from(e)
    })
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    write_atomic(path, table.to_csv()?.as_bytes())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value)?.as_bytes())
}

fn matrix_header(prefix: &str, n: usize) -> Vec<String> {
    (0..n)
        .flat_map(|i| (0..n).map(move |j| format!("{prefix}_{i}_{j}")))
        .collect()
}

fn matrix_fields(m: &DMatrix<f64>) -> impl Iterator<Item = String> + '_ {
    (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| fmt_f64(m[(i, j)])))
}

/// Rows `t, P (row-major), residual_norm, min_eigenvalue`.
pub fn gramian_table(sol: &GramianSolution) -> Table {
    let n = sol.p0.nrows();
    let mut t = Table::new(["t".to_string()]);
    t.header.extend(matrix_header("p", n));
    t.header.extend(["residual_norm".into(), "min_eigenvalue".into()]);
    for (i, p) in sol.p.iter().enumerate() {
        let mut row = vec![fmt_f64(sol.grid().t(i))];
        row.extend(matrix_fields(p));
        row.push(fmt_opt(sol.meta.residuals[i]));
        row.push(fmt_f64(linalg::min_sym_eigenvalue(p)));
        t.push(row);
    }
    t
}

#[derive(Clone, Debug, Serialize)]
pub struct GramianSummary {
    pub equation: crate::lyapunov::Equation,
    pub n: usize,
    pub points: usize,
    pub t0: f64,
    pub t_last: f64,
    pub horizon: Option<f64>,
    pub tail_bound: Option<f64>,
    pub max_residual: f64,
    pub cross_check: Option<f64>,
    pub min_eigenvalue: f64,
}

pub fn gramian_summary(sol: &GramianSolution) -> GramianSummary {
    GramianSummary {
        equation: sol.meta.equation,
        n: sol.p0.nrows(),
        points: sol.len(),
        t0: sol.grid().t(0),
        t_last: sol.grid().t(sol.len() - 1),
        horizon: sol.meta.horizon,
        tail_bound: sol.meta.tail_bound,
        max_residual: sol.meta.max_residual,
        cross_check: sol.meta.cross_check,
        min_eigenvalue: sol.min_eigenvalues().into_iter().fold(f64::INFINITY, f64::min),
    }
}

/// Rows `t, mu, P (row-major), residual_norm, tail_bound` of pointwise
/// algebraic solutions.
pub fn tsale_table(grid: &Grid, sols: &[AlgebraicSolution]) -> Table {
    let n = sols.first().map_or(0, |s| s.p.nrows());
    let mut t = Table::new(["t".to_string(), "mu".to_string()]);
    t.header.extend(matrix_header("p", n));
    t.header.extend(["residual_norm".into(), "tail_bound".into()]);
    for (pt, s) in grid.points().iter().zip(sols) {
        let mut row = vec![fmt_f64(pt.t), fmt_f64(pt.mu)];
        row.extend(matrix_fields(&s.p));
        row.push(fmt_f64(s.residual));
        row.push(fmt_f64(s.tail_bound));
        t.push(row);
    }
    t
}

/// Eigenvalue table `re, im, in_hmin, gamma_hat, converged, s_r_hits`.
pub fn eigen_table(rep: &StabilityReport) -> Table {
    let mut t = Table::new(["re", "im", "in_hmin", "gamma_hat", "converged", "s_r_hits"]);
    for e in &rep.eigen {
        t.push(vec![
            fmt_f64(e.eigenvalue.re),
            fmt_f64(e.eigenvalue.im),
            e.in_hmin.to_string(),
            fmt_opt(e.gamma.as_ref().map(|g| g.value)),
            e.gamma.as_ref().map_or(String::new(), |g| g.converged.to_string()),
            e.s_r_hits.len().to_string(),
        ]);
    }
    t
}

/// Boundary samples `mu, re, im` of the Hilger circles for each graininess.
pub fn disk_table(mus: &[f64], samples: usize) -> Table {
    let mut t = Table::new(["mu", "re", "im"]);
    for &mu in mus {
        for z in (HilgerDisk { mu }).boundary(samples) {
            t.push(vec![fmt_f64(mu), fmt_f64(z.re), fmt_f64(z.im)]);
        }
    }
    t
}

/// Rows `t, x_0 … x_{n−1}` and, with a trace, `V, V_delta`.
pub fn trajectory_table(traj: &Trajectory, trace: Option<&LyapunovTrace>) -> Table {
    let n = traj.x0.len();
    let mut t = Table::new(["t".to_string()]);
    t.header.extend((0..n).map(|i| format!("x_{i}")));
    if trace.is_some() {
        t.header.extend(["V".into(), "V_delta".into()]);
    }
    let len = trace.map_or(traj.states.len(), |tr| tr.v.len());
    for i in 0..len {
        let mut row = vec![fmt_f64(traj.grid().t(i))];
        row.extend(traj.states[i].iter().map(|v| fmt_f64(*v)));
        if let Some(tr) = trace {
            row.push(fmt_f64(tr.v[i]));
            row.push(fmt_opt(tr.v_delta[i]));
        }
        t.push(row);
    }
    t
}

/// Reads a headed two-column `t, value` CSV.
pub fn read_signal_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!("expected 2 columns, found {}", rec.len())));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
        out.push((parse(&rec[0])?, parse(&rec[1])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [4.0 / 3.0, -1e-300, 0.1, 12345.678, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(4.0 / 3.0), "1.3333333333333333e0");
    }

    #[test]
    fn csv_uses_newlines() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n1,2\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("chronoslyap-report-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn signal_csv() {
        let dir = std::env::temp_dir().join(format!("chronoslyap-signal-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("s.csv");
        fs::write(&p, "t,value\n0, 1.5\n1,2\n").unwrap();
        assert_eq!(read_signal_csv(&p).unwrap(), vec![(0.0, 1.5), (1.0, 2.0)]);
        fs::remove_dir_all(&dir).unwrap();
    }
}
