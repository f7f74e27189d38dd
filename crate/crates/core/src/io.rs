//! JSON field files. Node values are written row-major by (i₂, i₁), so the
//! first axis varies fastest.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid2;
use crate::immersion::ImmersionResult;
use crate::matlie::{CMatrix, C64};
use crate::spectral::{SpectralParam, WaveField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    pub grid: Grid2,
    pub n: usize,
    /// Nodes closer than this to the boundary carry no data.
    #[serde(default)]
    pub margin: usize,
    pub values: Vec<CMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveFile {
    pub grid: Grid2,
    pub n: usize,
    #[serde(default)]
    pub margin: usize,
    pub values: Vec<CMatrix>,
    pub lambda: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImmersionFile {
    pub grid: Grid2,
    pub n: usize,
    #[serde(default)]
    pub margin: usize,
    pub values: Vec<CMatrix>,
    pub basepoint: [usize; 2],
    pub compat_defect: f64,
    pub path_defect: f64,
    pub su_correction: f64,
}

impl FieldFile {
    /// Values of a square field; jets are dropped.
    pub fn from_field(f: &Field) -> Result<Self> {
        if f.rows() != f.cols() {
            return Err(Error::DimensionMismatch(format!("field files hold square matrices, got {}x{}", f.rows(), f.cols())));
        }
        let g = *f.grid();
        let n = f.rows();
        let values = (0..g.len())
            .map(|k| {
                let (i1, i2) = g.indices(k);
                CMatrix::from_vec(n, f.value_entries(i1, i2).to_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: g, n, margin: f.margin(), values })
    }

    pub fn to_field(&self) -> Result<Field> {
        self.grid.validate()?;
        if self.values.len() != self.grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} nodes but the file holds {} values",
                self.grid.len(),
                self.values.len()
            )));
        }
        let mut data: Vec<C64> = Vec::with_capacity(self.grid.len() * self.n * self.n);
        for m in &self.values {
            if m.dim() != self.n {
                return Err(Error::DimensionMismatch(format!("expected {0}x{0} values, found {1}x{1}", self.n, m.dim())));
            }
            data.extend_from_slice(m.as_slice());
        }
        Ok(Field::from_raw_values(self.grid, self.n, self.n, data)?.with_margin(self.margin))
    }
}

impl WaveFile {
    pub fn from_wave(w: &WaveField) -> Result<Self> {
        let FieldFile { grid, n, margin, values } = FieldFile::from_field(&w.phi)?;
        let l = w.lambda.lambda;
        Ok(Self { grid, n, margin, values, lambda: [l.re, l.im] })
    }

    pub fn to_wave(&self) -> Result<WaveField> {
        let ff = FieldFile { grid: self.grid, n: self.n, margin: self.margin, values: self.values.clone() };
        let sp = SpectralParam::new(C64::new(self.lambda[0], self.lambda[1]))?;
        Ok(WaveField::new(ff.to_field()?, sp))
    }
}

impl ImmersionFile {
    pub fn from_result(r: &ImmersionResult) -> Result<Self> {
        let FieldFile { grid, n, margin, values } = FieldFile::from_field(&r.f)?;
        Ok(Self {
            grid,
            n,
            margin,
            values,
            basepoint: [r.basepoint.0, r.basepoint.1],
            compat_defect: r.compat_defect,
            path_defect: r.path_defect,
            su_correction: r.su_correction,
        })
    }

    pub fn field(&self) -> Result<Field> {
        FieldFile { grid: self.grid, n: self.n, margin: self.margin, values: self.values.clone() }.to_field()
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

/// Writes any serializable document as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    write_text(path, &s)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(serde_json::from_str(&s)?)
}

pub fn write_text(path: &Path, s: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(s.as_bytes()).map_err(|e| io_err(path, e))
}

pub fn write_field(path: &Path, f: &Field) -> Result<()> {
    write_json(path, &FieldFile::from_field(f)?)
}

pub fn read_field(path: &Path) -> Result<Field> {
    read_json::<FieldFile>(path)?.to_field()
}
