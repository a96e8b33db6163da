//! CSV/JSON serialization and atomic artifact writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use collapse_core::wavepacket::{DensityGrid, WidthRow};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const GRID_HEADER: &str = "t,q,rho_plus,rho_minus,rho_total";
pub const WIDTH_HEADER: &str = "t,sigma_Q,sigma_xi,sigma_Qxi";

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV table kept as text; rows counted as they are pushed.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    rows: usize,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut text = String::with_capacity(1 << 16);
        text.push_str(header);
        text.push('\n');
        Self { text, rows: 0 }
    }

    pub fn row(&mut self, values: &[f64]) {
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{v:.16e}");
        }
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

pub fn grid_rows(csv: &mut Csv, grid: &DensityGrid) {
    let nq = grid.q_axis.len();
    for (ti, &t) in grid.t_axis.iter().enumerate() {
        for (qi, &q) in grid.q_axis.iter().enumerate() {
            let k = ti * nq + qi;
            csv.row(&[t, q, grid.rho_plus[k], grid.rho_minus[k], grid.rho_total[k]]);
        }
    }
}

pub fn grid_csv(grid: &DensityGrid) -> Csv {
    let mut csv = Csv::new(GRID_HEADER);
    grid_rows(&mut csv, grid);
    csv
}

pub fn width_csv(rows: &[WidthRow]) -> Csv {
    let mut csv = Csv::new(WIDTH_HEADER);
    for r in rows {
        csv.row(&[r.t, r.sigma_Q, r.sigma_xi, r.sigma_Qxi]);
    }
    csv
}

/// Parses a numeric CSV with a header row back into rows of floats.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.split_terminator('\n');
    let header: Vec<String> = lines.next().ok_or("empty file")?.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|f| f.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 2)))
            .collect::<Result<Vec<f64>, String>>()?;
        if row.len() != header.len() {
            return Err(format!("line {}: {} fields, header has {}", i + 2, row.len(), header.len()));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Reloads a grid CSV into a [`DensityGrid`]; rows must be t-major as written.
pub fn parse_grid_csv(text: &str) -> Result<DensityGrid, String> {
    let (header, rows) = parse_csv(text)?;
    if header.join(",") != GRID_HEADER {
        return Err(format!("unexpected header `{}`", header.join(",")));
    }
    let mut t_axis: Vec<f64> = Vec::new();
    let mut q_axis: Vec<f64> = Vec::new();
    let mut grid =
        DensityGrid { q_axis: vec![], t_axis: vec![], rho_plus: vec![], rho_minus: vec![], rho_total: vec![] };
    for r in &rows {
        if t_axis.last() != Some(&r[0]) {
            t_axis.push(r[0]);
        }
        if t_axis.len() == 1 {
            q_axis.push(r[1]);
        }
        grid.rho_plus.push(r[2]);
        grid.rho_minus.push(r[3]);
        grid.rho_total.push(r[4]);
    }
    if t_axis.len() * q_axis.len() != rows.len() {
        return Err("rows do not form a rectangular grid".into());
    }
    grid.t_axis = t_axis;
    grid.q_axis = q_axis;
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub rows: usize,
    pub sha256: String,
}

impl Artifact {
    pub fn summary(&self) -> String {
        format!("wrote {} rows={} sha256={}", self.path.display(), self.rows, self.sha256)
    }
}

/// Writes `bytes` to `dir/name` through a temp file in the same directory
/// and an atomic rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8], rows: usize) -> Result<Artifact, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    let path = dir.join(name);
    let io = |e| CliError::io(path.display().to_string(), e);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(&path).map_err(|e| io(e.error))?;
    let sha256 = hex::encode(Sha256::digest(bytes));
    Ok(Artifact { path, rows, sha256 })
}
