//! Surfaces in su(2) ≅ ℝ³, intrinsic metric data for any N, and mesh/CSV
//! export.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, RealField};
use crate::grid::Grid2;
use crate::io;
use crate::matlie::{inner_mat, CMatrix, C64};

pub const TOL_METRIC: f64 = 1e-8;

/// F = i(aσ₁ + bσ₂ + cσ₃) ↦ (a, b, c).
pub fn embed_matrix(m: &CMatrix) -> [f64; 3] {
    let f01 = m.get(0, 1);
    [f01.im, f01.re, m.get(0, 0).im]
}

pub fn unembed(v: [f64; 3]) -> CMatrix {
    let [a, b, c] = v;
    let mut m = CMatrix::zeros(2);
    m.set(0, 0, C64::new(0.0, c));
    m.set(1, 1, C64::new(0.0, -c));
    m.set(0, 1, C64::new(b, a));
    m.set(1, 0, C64::new(-b, a));
    m
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[derive(Clone, Debug)]
pub struct EmbeddedSurface {
    pub grid: Grid2,
    /// Points are defined on nodes at least this far from the boundary.
    pub margin: usize,
    pub points: Vec<[f64; 3]>,
    pub normal_margin: usize,
    /// Unit normals; zero where the tangents are dependent or undefined.
    pub normals: Vec<[f64; 3]>,
}

/// Embeds an su(2)-valued field in ℝ³ with normals from real-coordinate
/// tangents.
pub fn embed_su2(f: &Field) -> Result<EmbeddedSurface> {
    if f.rows() != 2 || f.cols() != 2 {
        return Err(Error::InvalidDimension(f.rows()));
    }
    let g = *f.grid();
    let embed_field = |x: &Field| -> Vec<[f64; 3]> {
        (0..g.len())
            .into_par_iter()
            .map(|k| {
                let (i1, i2) = g.indices(k);
                if x.is_valid(i1, i2) { embed_matrix(&x.value(i1, i2)) } else { [0.0; 3] }
            })
            .collect()
    };
    let points = embed_field(f);
    let tx = f.real_deriv(0);
    let ty = f.real_deriv(1);
    let normal_margin = tx.margin().max(ty.margin());
    let (ex, ey) = (embed_field(&tx), embed_field(&ty));
    let normals = (0..g.len())
        .map(|k| {
            let (i1, i2) = g.indices(k);
            if !g.inside(i1, i2, normal_margin) {
                return [0.0; 3];
            }
            let n = cross(ex[k], ey[k]);
            let len = norm3(n);
            if len <= 1e-12 * norm3(ex[k]) * norm3(ey[k]) || len == 0.0 {
                [0.0; 3]
            } else {
                [n[0] / len, n[1] / len, n[2] / len]
            }
        })
        .collect();
    Ok(EmbeddedSurface { grid: g, margin: f.margin(), points, normal_margin, normals })
}

impl EmbeddedSurface {
    /// Points of the valid block, row-major, with its dimensions.
    pub fn valid_block(&self) -> (Vec<[f64; 3]>, [usize; 2]) {
        let g = &self.grid;
        let m = self.margin;
        let dims = [g.dims[0].saturating_sub(2 * m), g.dims[1].saturating_sub(2 * m)];
        let mut pts = Vec::with_capacity(dims[0] * dims[1]);
        for i2 in 0..dims[1] {
            for i1 in 0..dims[0] {
                pts.push(self.points[g.node(i1 + m, i2 + m)]);
            }
        }
        (pts, dims)
    }

    pub fn to_obj(&self) -> String {
        let (pts, dims) = self.valid_block();
        obj_string(&pts, dims)
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Triangulated grid mesh: vertices row-major (first index fastest),
/// two triangles per cell, 1-based indices.
pub fn obj_string(points: &[[f64; 3]], dims: [usize; 2]) -> String {
    assert_eq!(points.len(), dims[0] * dims[1]);
    let mut s = String::new();
    for p in points {
        let _ = writeln!(s, "v {} {} {}", fmt17(p[0]), fmt17(p[1]), fmt17(p[2]));
    }
    let (n1, n2) = (dims[0], dims[1]);
    for i2 in 0..n2.saturating_sub(1) {
        for i1 in 0..n1.saturating_sub(1) {
            let v00 = i2 * n1 + i1 + 1;
            let (v10, v01, v11) = (v00 + 1, v00 + n1, v00 + n1 + 1);
            let _ = writeln!(s, "f {v00} {v10} {v11}");
            let _ = writeln!(s, "f {v00} {v11} {v01}");
        }
    }
    s
}

/// One row per interior node, first index fastest.
pub fn csv_string(f: &RealField) -> String {
    let g = &f.grid;
    let mut s = String::from("x1,x2,value\n");
    for i2 in 0..g.dims[1] {
        for i1 in 0..g.dims[0] {
            if g.inside(i1, i2, f.margin) {
                let p = g.point(i1, i2);
                let _ = writeln!(s, "{},{},{}", fmt17(p[0]), fmt17(p[1]), fmt17(f.at(i1, i2)));
            }
        }
    }
    s
}

/// Pointwise g_{αβ} = inner(∂_αF, ∂_βF) in real coordinates, stored as
/// (g₁₁, g₁₂, g₂₂).
#[derive(Clone, Debug)]
pub struct MetricField {
    pub grid: Grid2,
    pub margin: usize,
    pub data: Vec<[f64; 3]>,
}

impl MetricField {
    pub fn det(&self) -> RealField {
        let data = self.data.iter().map(|[e, f, g]| e * g - f * f).collect();
        RealField { grid: self.grid, margin: self.margin, data }
    }

    pub fn component(&self, c: usize) -> RealField {
        RealField { grid: self.grid, margin: self.margin, data: self.data.iter().map(|v| v[c]).collect() }
    }
}

pub fn first_fundamental_form(f: &Field) -> Result<MetricField> {
    if f.rows() != f.cols() {
        return Err(Error::DimensionMismatch("fundamental form needs a square field".into()));
    }
    let g = *f.grid();
    let tx = f.real_deriv(0);
    let ty = f.real_deriv(1);
    let margin = tx.margin().max(ty.margin());
    let data = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (i1, i2) = g.indices(k);
            if !g.inside(i1, i2, margin) {
                return Ok([0.0; 3]);
            }
            let (a, b) = (tx.value(i1, i2), ty.value(i1, i2));
            Ok([inner_mat(&a, &a)?, inner_mat(&a, &b)?, inner_mat(&b, &b)?])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricField { grid: g, margin, data })
}

/// Gaussian curvature with nodes of small det g masked (value NaN).
#[derive(Clone, Debug)]
pub struct GaussCurvature {
    pub k: RealField,
    pub masked: Vec<bool>,
}

impl GaussCurvature {
    pub fn masked_count(&self) -> usize {
        let g = &self.k.grid;
        (0..g.len())
            .filter(|&n| {
                let (i1, i2) = g.indices(n);
                g.inside(i1, i2, self.k.margin) && self.masked[n]
            })
            .count()
    }

    /// Largest |K − target| over unmasked interior nodes.
    pub fn max_deviation(&self, target: f64) -> f64 {
        let g = &self.k.grid;
        let mut m: f64 = 0.0;
        for n in 0..g.len() {
            let (i1, i2) = g.indices(n);
            if g.inside(i1, i2, self.k.margin) && !self.masked[n] {
                m = m.max((self.k.data[n] - target).abs());
            }
        }
        m
    }
}

fn scalar_deriv(grid: Grid2, margin: usize, data: &[f64], axis: usize) -> (Vec<f64>, usize) {
    let f = Field::from_raw_values(grid, 1, 1, data.iter().map(|&x| C64::new(x, 0.0)).collect())
        .expect("node count matches grid")
        .with_margin(margin);
    let d = f.axis_deriv(axis);
    (d.raw().iter().map(|z| z.re).collect(), d.margin())
}

/// Brioschi formula with stencil derivatives of the metric.
pub fn gauss_curvature(g: &MetricField, tol_metric: f64) -> GaussCurvature {
    let grid = g.grid;
    let comp = |c: usize| -> Vec<f64> { g.data.iter().map(|v| v[c]).collect() };
    let (e, f, gg) = (comp(0), comp(1), comp(2));
    let d = |x: &[f64], m: usize, axis: usize| scalar_deriv(grid, m, x, axis);
    let m0 = g.margin;
    let ((e_u, m1), (e_v, _)) = (d(&e, m0, 0), d(&e, m0, 1));
    let ((f_u, _), (f_v, _)) = (d(&f, m0, 0), d(&f, m0, 1));
    let ((g_u, _), (g_v, _)) = (d(&gg, m0, 0), d(&gg, m0, 1));
    let (e_vv, m2) = d(&e_v, m1, 1);
    let (f_uv, _) = d(&f_u, m1, 1);
    let (g_uu, _) = d(&g_u, m1, 0);
    let det3 = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let mut masked = vec![false; grid.len()];
    let data = (0..grid.len())
        .map(|n| {
            let (i1, i2) = grid.indices(n);
            if !grid.inside(i1, i2, m2) {
                return 0.0;
            }
            let det = e[n] * gg[n] - f[n] * f[n];
            if det <= tol_metric {
                masked[n] = true;
                return f64::NAN;
            }
            let a = [
                [-0.5 * e_vv[n] + f_uv[n] - 0.5 * g_uu[n], 0.5 * e_u[n], f_u[n] - 0.5 * e_v[n]],
                [f_v[n] - 0.5 * g_u[n], e[n], f[n]],
                [0.5 * g_v[n], f[n], gg[n]],
            ];
            let b = [[0.0, 0.5 * e_v[n], 0.5 * g_u[n]], [0.5 * e_v[n], e[n], f[n]], [0.5 * g_u[n], f[n], gg[n]]];
            (det3(a) - det3(b)) / (det * det)
        })
        .collect();
    GaussCurvature { k: RealField { grid, margin: m2, data }, masked }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Obj,
    Csv,
    Json,
}

pub fn export_obj(s: &EmbeddedSurface, path: &Path) -> Result<()> {
    io::write_text(path, &s.to_obj())
}

pub fn export_csv(f: &RealField, path: &Path) -> Result<()> {
    io::write_text(path, &csv_string(f))
}

pub fn export_json(f: &Field, path: &Path) -> Result<()> {
    io::write_field(path, f)
}
