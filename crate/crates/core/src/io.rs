//! JSON, CSV and ASCII PLY formats.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result, SkewGenerator};

/// `{"n": .., "entries": [[..], ..]}` with `entries` of size `(n+1)×(n+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

impl GeneratorSpec {
    pub fn from_generator(q: &SkewGenerator) -> Self {
        let m = q.entries();
        Self { n: q.n(), entries: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect() }
    }

    pub fn build(&self) -> Result<SkewGenerator> {
        let dim = self.n + 1;
        if self.entries.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.entries.len() });
        }
        if let Some(row) = self.entries.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
        }
        SkewGenerator::new(Matrix::from_fn(dim, dim, |i, j| self.entries[i][j]))
    }
}

pub fn generator_from_json(text: &str) -> Result<SkewGenerator> {
    serde_json::from_str::<GeneratorSpec>(text)?.build()
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One sampled point with its curve or family parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub param: f64,
    pub coords: Vec<f64>,
}

fn check_rows(rows: &[Row]) -> Result<usize> {
    let dim = rows.first().map(|r| r.coords.len()).unwrap_or(0);
    if let Some(r) = rows.iter().find(|r| r.coords.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: r.coords.len() });
    }
    Ok(dim)
}

/// CSV with header `<param>,x1,...,x{dim}`.
pub fn write_csv<W: Write>(mut w: W, param: &str, dim: usize, rows: &[Row]) -> Result<()> {
    let got = check_rows(rows)?;
    if !rows.is_empty() && got != dim {
        return Err(Error::DimensionMismatch { expected: dim, got });
    }
    let mut header = vec![param.to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut fields = vec![format_float(r.param)];
        fields.extend(r.coords.iter().map(|&c| format_float(c)));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// ASCII PLY point cloud: `x, y, z`, then `x4, x5, ..` for higher dimensions,
/// then the parameter `t`.
pub fn write_ply<W: Write>(mut w: W, rows: &[Row]) -> Result<()> {
    let dim = check_rows(rows)?;
    if !rows.is_empty() && dim < 3 {
        return Err(Error::InvalidArgument("PLY vertices need at least three coordinates".into()));
    }
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", rows.len())?;
    for name in ["x", "y", "z"] {
        writeln!(w, "property double {name}")?;
    }
    for i in 4..=dim {
        writeln!(w, "property double x{i}")?;
    }
    writeln!(w, "property double t")?;
    writeln!(w, "end_header")?;
    for r in rows {
        let mut fields: Vec<String> = r.coords.iter().map(|&c| format_float(c)).collect();
        fields.push(format_float(r.param));
        writeln!(w, "{}", fields.join(" "))?;
    }
    Ok(())
}
