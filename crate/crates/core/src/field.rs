//! Matrix-valued fields on a grid.
//!
//! Every node carries a truncated Taylor jet of order `order` of an
//! `rows × cols` complex matrix. Order 0 fields are plain values and are
//! differentiated by central stencils, which invalidates `half_width` nodes
//! at each edge; the count of invalid edge nodes is tracked in `margin`.
//! Fields with order ≥ 1 are differentiated exactly by shifting
//! coefficients, at the cost of one jet order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Chart, Grid2};
use crate::jet::{ncoef, JetLayout};
use crate::matlie::{expm, CMatrix, C64};
use crate::stencil::first_derivative_weights;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid2,
    rows: usize,
    cols: usize,
    order: usize,
    margin: usize,
    data: Vec<C64>,
}

/// Real scalar diagnostics on a grid (norms, densities, curvature).
#[derive(Clone, Debug)]
pub struct RealField {
    pub grid: Grid2,
    pub margin: usize,
    pub data: Vec<f64>,
}

impl RealField {
    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.data[self.grid.node(i1, i2)]
    }

    /// Maximum over the valid interior; NaN entries count as +∞.
    pub fn max(&self) -> f64 {
        self.max_where(|_| true)
    }

    /// Maximum over valid interior nodes whose physical point satisfies `pred`.
    pub fn max_where(&self, pred: impl Fn([f64; 2]) -> bool) -> f64 {
        let g = &self.grid;
        let mut m: f64 = 0.0;
        for i2 in 0..g.dims[1] {
            for i1 in 0..g.dims[0] {
                if g.inside(i1, i2, self.margin) && pred(g.point(i1, i2)) {
                    let v = self.data[g.node(i1, i2)];
                    m = if v.is_nan() { f64::INFINITY } else { m.max(v) };
                }
            }
        }
        m
    }

    /// Maximum over the physical box [x_lo, x_hi] × [y_lo, y_hi].
    pub fn max_in_box(&self, b: [f64; 4]) -> f64 {
        let tol = 1e-9 * self.grid.spacing[0].max(self.grid.spacing[1]);
        self.max_where(|p| p[0] >= b[0] - tol && p[0] <= b[1] + tol && p[1] >= b[2] - tol && p[1] <= b[3] + tol)
    }

    pub fn min(&self) -> f64 {
        let g = &self.grid;
        let mut m = f64::INFINITY;
        for i2 in 0..g.dims[1] {
            for i1 in 0..g.dims[0] {
                if g.inside(i1, i2, self.margin) {
                    m = m.min(self.data[g.node(i1, i2)]);
                }
            }
        }
        m
    }

    /// Median over valid interior nodes.
    pub fn median(&self) -> f64 {
        let g = &self.grid;
        let mut v: Vec<f64> = (0..g.len())
            .filter(|&k| {
                let (i1, i2) = g.indices(k);
                g.inside(i1, i2, self.margin)
            })
            .map(|k| self.data[k])
            .collect();
        if v.is_empty() {
            return f64::NAN;
        }
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    pub fn interior_count(&self) -> usize {
        let g = &self.grid;
        (0..g.len()).filter(|&k| {
            let (i1, i2) = g.indices(k);
            g.inside(i1, i2, self.margin)
        }).count()
    }
}

impl Field {
    pub fn zeros(grid: Grid2, rows: usize, cols: usize, order: usize) -> Self {
        let len = grid.len() * ncoef(order) * rows * cols;
        Self { grid, rows, cols, order, margin: 0, data: vec![ZERO; len] }
    }

    fn blank(&self, rows: usize, cols: usize, order: usize, margin: usize) -> Self {
        let mut f = Self::zeros(self.grid, rows, cols, order);
        f.margin = margin;
        f
    }

    /// Order-0 square field from node values.
    pub fn from_matrix_fn(grid: Grid2, n: usize, f: impl Fn(usize, usize) -> CMatrix + Sync) -> Self {
        let mut out = Self::zeros(grid, n, n, 0);
        let d0 = grid.dims[0];
        out.data.par_chunks_mut(n * n).enumerate().for_each(|(k, blk)| {
            let m = f(k % d0, k / d0);
            blk.copy_from_slice(m.as_slice());
        });
        out
    }

    /// Order-0 scalar field.
    pub fn from_scalar_fn(grid: Grid2, f: impl Fn(usize, usize) -> C64 + Sync) -> Self {
        let mut out = Self::zeros(grid, 1, 1, 0);
        let d0 = grid.dims[0];
        out.data.par_iter_mut().enumerate().for_each(|(k, v)| *v = f(k % d0, k / d0));
        out
    }

    /// Field from a jet generator writing the `[coef][row][col]` block of a node.
    pub fn from_jet_fn(
        grid: Grid2,
        rows: usize,
        cols: usize,
        order: usize,
        f: impl Fn(usize, usize, &mut [C64]) + Sync,
    ) -> Self {
        let mut out = Self::zeros(grid, rows, cols, order);
        let d0 = grid.dims[0];
        let bs = out.block();
        out.data.par_chunks_mut(bs).enumerate().for_each(|(k, blk)| f(k % d0, k / d0, blk));
        out
    }

    /// Scalar field p(x^α) for a polynomial with ascending coefficients,
    /// carrying exact jets of the given order.
    pub fn coord_poly(grid: Grid2, alpha: usize, coeffs: &[C64], order: usize) -> Self {
        assert!(alpha == 1 || alpha == 2);
        Self::from_jet_fn(grid, 1, 1, order, |i1, i2, blk| {
            let x0 = grid.coord(alpha, i1, i2);
            // Taylor coefficients p^{(j)}(x0)/j! by repeated synthetic division
            let mut c: Vec<C64> = coeffs.to_vec();
            for j in 0..=order {
                if c.is_empty() {
                    break;
                }
                let mut acc = ZERO;
                let mut q = vec![ZERO; c.len().saturating_sub(1)];
                for (i, &ci) in c.iter().enumerate().rev() {
                    acc = acc * x0 + ci;
                    if i > 0 {
                        q[i - 1] = acc;
                    }
                }
                let idx = if alpha == 1 { crate::jet::index(j, 0) } else { crate::jet::index(0, j) };
                blk[idx] = acc;
                c = q;
            }
        })
    }

    /// Constant square field carrying jets of the given order.
    pub fn constant(grid: Grid2, m: &CMatrix, order: usize) -> Self {
        let nn = m.dim() * m.dim();
        Self::from_jet_fn(grid, m.dim(), m.dim(), order, |_, _, blk| blk[..nn].copy_from_slice(m.as_slice()))
    }

    /// s·M for a scalar field s and a constant matrix M.
    pub fn scalar_times(&self, m: &CMatrix) -> Self {
        assert!(self.rows == 1 && self.cols == 1, "scalar_times needs a 1×1 field");
        let n = m.dim();
        let nc = ncoef(self.order);
        self.map_with(n, n, self.order, move |a, o, _| {
            for p in 0..nc {
                for (i, z) in m.as_slice().iter().enumerate() {
                    o[p * n * n + i] = a[p] * z;
                }
            }
        })
    }

    #[inline]
    fn block(&self) -> usize {
        ncoef(self.order) * self.rows * self.cols
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = self.margin.max(margin);
        self
    }

    pub fn is_valid(&self, i1: usize, i2: usize) -> bool {
        self.grid.inside(i1, i2, self.margin)
    }

    /// Value block (coefficient 0) at a node, row-major.
    pub fn value_entries(&self, i1: usize, i2: usize) -> &[C64] {
        let k = self.grid.node(i1, i2) * self.block();
        &self.data[k..k + self.rows * self.cols]
    }

    /// Jet coefficient block `m` at a node.
    pub fn coef_entries(&self, i1: usize, i2: usize, m: usize) -> &[C64] {
        let rc = self.rows * self.cols;
        let k = self.grid.node(i1, i2) * self.block() + m * rc;
        &self.data[k..k + rc]
    }

    pub fn value(&self, i1: usize, i2: usize) -> CMatrix {
        assert_eq!(self.rows, self.cols, "value() needs a square field");
        CMatrix::from_vec(self.rows, self.value_entries(i1, i2).to_vec()).unwrap()
    }

    pub fn scalar(&self, i1: usize, i2: usize) -> C64 {
        assert!(self.rows == 1 && self.cols == 1);
        self.value_entries(i1, i2)[0]
    }

    fn check_shape(&self, other: &Self) {
        assert!(self.grid.same_nodes(&other.grid), "fields live on different grids");
        assert!(self.rows == other.rows && self.cols == other.cols, "field shapes differ");
    }

    /// Pointwise kernel over valid nodes. `f(a_blk, b_blk, out_blk, layout)`.
    fn zip_with(
        &self,
        other: &Self,
        rows: usize,
        cols: usize,
        f: impl Fn(&[C64], &[C64], &mut [C64], &JetLayout) + Sync,
    ) -> Self {
        assert!(self.grid.same_nodes(&other.grid), "fields live on different grids");
        let order = self.order.min(other.order);
        let margin = self.margin.max(other.margin);
        let mut out = self.blank(rows, cols, order, margin);
        let layout = JetLayout::get(order);
        let (ba, bb, bo) = (self.block(), other.block(), out.block());
        let g = self.grid;
        out.data.par_chunks_mut(bo).enumerate().for_each(|(k, blk)| {
            let (i1, i2) = g.indices(k);
            if g.inside(i1, i2, margin) {
                f(&self.data[k * ba..(k + 1) * ba], &other.data[k * bb..(k + 1) * bb], blk, layout);
            }
        });
        out
    }

    fn map_with(&self, rows: usize, cols: usize, order: usize, f: impl Fn(&[C64], &mut [C64], &JetLayout) + Sync) -> Self {
        let mut out = self.blank(rows, cols, order, self.margin);
        let layout = JetLayout::get(order.min(self.order));
        let (ba, bo) = (self.block(), out.block());
        let g = self.grid;
        let margin = self.margin;
        out.data.par_chunks_mut(bo).enumerate().for_each(|(k, blk)| {
            let (i1, i2) = g.indices(k);
            if g.inside(i1, i2, margin) {
                f(&self.data[k * ba..(k + 1) * ba], blk, layout);
            }
        });
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_shape(other);
        let n = ncoef(self.order.min(other.order)) * self.rows * self.cols;
        self.zip_with(other, self.rows, self.cols, move |a, b, o, _| {
            for i in 0..n {
                o[i] = a[i] + b[i];
            }
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_shape(other);
        let n = ncoef(self.order.min(other.order)) * self.rows * self.cols;
        self.zip_with(other, self.rows, self.cols, move |a, b, o, _| {
            for i in 0..n {
                o[i] = a[i] - b[i];
            }
        })
    }

    /// a + c·b.
    pub fn axpy(&self, c: C64, other: &Self) -> Self {
        self.check_shape(other);
        let n = ncoef(self.order.min(other.order)) * self.rows * self.cols;
        self.zip_with(other, self.rows, self.cols, move |a, b, o, _| {
            for i in 0..n {
                o[i] = a[i] + c * b[i];
            }
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.data.par_iter_mut().for_each(|z| *z *= c);
        out
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Adds c·I (square fields) to the value coefficient.
    pub fn add_identity(&self, c: C64) -> Self {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut out = self.clone();
        let bs = self.block();
        let g = self.grid;
        let margin = self.margin;
        out.data.par_chunks_mut(bs).enumerate().for_each(|(k, blk)| {
            let (i1, i2) = g.indices(k);
            if g.inside(i1, i2, margin) {
                for i in 0..n {
                    blk[i * n + i] += c;
                }
            }
        });
        out
    }

    /// Left multiplication by a constant matrix.
    pub fn left_mul_const(&self, m: &CMatrix) -> Self {
        assert_eq!(m.dim(), self.rows);
        let (r, c) = (self.rows, self.cols);
        let nc = ncoef(self.order);
        self.map_with(r, c, self.order, |a, o, _| {
            for p in 0..nc {
                for i in 0..r {
                    for k in 0..r {
                        let mik = m.get(i, k);
                        for j in 0..c {
                            o[p * r * c + i * c + j] += mik * a[p * r * c + k * c + j];
                        }
                    }
                }
            }
        })
    }

    /// Matrix product of jets, truncated to the lower order.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let (r, k, c) = (self.rows, self.cols, other.cols);
        if r == k && k == c {
            match r {
                2 => return self.zip_with(other, 2, 2, |a, b, o, l| square_kernel::<2>(l, a, b, o)),
                3 => return self.zip_with(other, 3, 3, |a, b, o, l| square_kernel::<3>(l, a, b, o)),
                4 => return self.zip_with(other, 4, 4, |a, b, o, l| square_kernel::<4>(l, a, b, o)),
                _ => {}
            }
        }
        let (rk, kc, rc) = (r * k, k * c, r * c);
        self.zip_with(other, r, c, move |a, b, o, layout| {
            for &(p, q, t) in &layout.products {
                let (p, q, t) = (p as usize, q as usize, t as usize);
                let ap = &a[p * rk..(p + 1) * rk];
                let bq = &b[q * kc..(q + 1) * kc];
                let ot = &mut o[t * rc..(t + 1) * rc];
                for (arow, orow) in ap.chunks_exact(k).zip(ot.chunks_exact_mut(c)) {
                    for (x, brow) in arow.iter().zip(bq.chunks_exact(c)) {
                        for (z, y) in orow.iter_mut().zip(brow) {
                            *z += x * y;
                        }
                    }
                }
            }
        })
    }

    pub fn mul3(&self, b: &Self, c: &Self) -> Self {
        self.matmul(b).matmul(c)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Multiplies every entry by a scalar field.
    pub fn mul_scalar(&self, s: &Self) -> Self {
        assert!(s.rows == 1 && s.cols == 1, "mul_scalar needs a 1×1 field");
        let rc = self.rows * self.cols;
        self.zip_with(s, self.rows, self.cols, move |a, b, o, layout| {
            for &(p, q, t) in &layout.products {
                let (p, q, t) = (p as usize, q as usize, t as usize);
                let bq = b[q];
                if bq == ZERO {
                    continue;
                }
                for i in 0..rc {
                    o[t * rc + i] += a[p * rc + i] * bq;
                }
            }
        })
    }

    pub fn trace(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let nc = ncoef(self.order);
        self.map_with(1, 1, self.order, move |a, o, _| {
            for p in 0..nc {
                o[p] = (0..n).map(|i| a[p * n * n + i * n + i]).sum();
            }
        })
    }

    /// Conjugate transpose. Jets of conjugated functions swap the two
    /// offsets on the Euclidean chart (ζ ↔ ζ̄).
    pub fn dagger(&self) -> Self {
        let (r, c) = (self.rows, self.cols);
        let swap = self.grid.chart == Chart::EuclideanComplex;
        self.map_with(c, r, self.order, move |a, o, layout| {
            for (p, &(x, y)) in layout.monomials.iter().enumerate() {
                let src = if swap { crate::jet::index(y, x) } else { p };
                for i in 0..r {
                    for j in 0..c {
                        o[p * r * c + j * r + i] = a[src * r * c + i * c + j].conj();
                    }
                }
            }
        })
    }

    /// Reciprocal of a scalar field by jet series.
    pub fn recip(&self) -> Self {
        assert!(self.rows == 1 && self.cols == 1);
        self.map_with(1, 1, self.order, |a, o, layout| {
            let inv0 = ONE / a[0];
            o[0] = inv0;
            for m in 1..layout.len() {
                let mut s = ZERO;
                for &(p, q) in &layout.by_target[m] {
                    s += o[p as usize] * a[q as usize];
                }
                o[m] = -s * inv0;
            }
        })
    }

    /// Divides every entry by a scalar field.
    pub fn div_scalar(&self, s: &Self) -> Self {
        self.mul_scalar(&s.recip())
    }

    /// Pointwise matrix inverse with jets. Fails on a singular node.
    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let nn = n * n;
        let failed = std::sync::atomic::AtomicBool::new(false);
        let out = self.map_with(n, n, self.order, |a, o, layout| {
            if !jet_inverse_block(layout, &a[..layout.len() * nn], n, o) {
                failed.store(true, std::sync::atomic::Ordering::Relaxed);
            }
        });
        if failed.into_inner() {
            return Err(Error::Singular);
        }
        Ok(out)
    }

    /// Pointwise matrix exponential. Values use the Padé kernel; jets use a
    /// scaled Taylor series in jet arithmetic followed by squaring.
    pub fn expm(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let nn = n * n;
        let failed = std::sync::atomic::AtomicBool::new(false);
        let order = self.order;
        let out = self.map_with(n, n, order, |a, o, layout| {
            if order == 0 {
                match expm(&CMatrix::from_vec(n, a[..nn].to_vec()).unwrap()) {
                    Ok(e) => o.copy_from_slice(e.as_slice()),
                    Err(_) => failed.store(true, std::sync::atomic::Ordering::Relaxed),
                }
                return;
            }
            match jet_expm_block(layout, a, n) {
                Some(acc) => {
                    if acc.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                        failed.store(true, std::sync::atomic::Ordering::Relaxed);
                    }
                    o.copy_from_slice(&acc);
                }
                None => failed.store(true, std::sync::atomic::Ordering::Relaxed),
            }
        });
        if failed.into_inner() {
            return Err(Error::NonFinite("field exponential".into()));
        }
        Ok(out)
    }

    #[cfg(test)]
    fn expm_taylor_reference(&self) -> Self {
        let n = self.rows;
        self.map_with(n, n, self.order, |a, o, layout| o.copy_from_slice(&jet_expm_taylor(layout, a, n)))
    }

    /// Truncates jets to a lower order (order 0 keeps values only).
    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order {
            return self.clone();
        }
        let rc = self.rows * self.cols;
        let keep = ncoef(order) * rc;
        self.map_with(self.rows, self.cols, order, move |a, o, _| o.copy_from_slice(&a[..keep]))
    }

    pub fn values(&self) -> Self {
        self.truncate(0)
    }

    /// Total derivative D_α: exact on jets, central stencil on values.
    pub fn deriv(&self, alpha: usize) -> Self {
        if self.order == 0 {
            self.stencil_deriv(alpha)
        } else {
            self.jet_deriv(alpha)
        }
    }

    fn jet_deriv(&self, alpha: usize) -> Self {
        assert!(alpha == 1 || alpha == 2);
        let rc = self.rows * self.cols;
        let order = self.order - 1;
        self.map_with(self.rows, self.cols, order, move |a, o, layout| {
            for (p, &(x, y)) in layout.monomials.iter().enumerate() {
                let (src, fac) = if alpha == 1 {
                    (crate::jet::index(x + 1, y), (x + 1) as f64)
                } else {
                    (crate::jet::index(x, y + 1), (y + 1) as f64)
                };
                for i in 0..rc {
                    o[p * rc + i] = a[src * rc + i] * fac;
                }
            }
        })
    }

    /// Central-stencil derivative along a grid axis (0: first axis, 1:
    /// second) of the value field, ignoring any jets.
    pub fn axis_deriv(&self, axis: usize) -> Self {
        let v = self.values();
        let rc = v.rows * v.cols;
        let hw = v.grid.half_width();
        let w = first_derivative_weights(v.grid.stencil_order);
        let h = v.grid.spacing[axis];
        let margin = v.margin + hw;
        let mut out = v.blank(v.rows, v.cols, 0, margin);
        let g = v.grid;
        let stride = if axis == 0 { 1 } else { g.dims[0] };
        out.data.par_chunks_mut(rc).enumerate().for_each(|(k, blk)| {
            let (i1, i2) = g.indices(k);
            if !g.inside(i1, i2, margin) {
                return;
            }
            for (j, c) in w.iter().enumerate() {
                let off = (j + 1) * stride;
                let up = &v.data[(k + off) * rc..(k + off + 1) * rc];
                let dn = &v.data[(k - off) * rc..(k - off + 1) * rc];
                for i in 0..rc {
                    blk[i] += (up[i] - dn[i]) * *c;
                }
            }
            for z in blk.iter_mut() {
                *z /= h;
            }
        });
        out
    }

    /// Central-stencil D_α of the value field.
    pub fn stencil_deriv(&self, alpha: usize) -> Self {
        match self.grid.chart {
            Chart::MinkowskiLightcone => self.axis_deriv(alpha - 1),
            Chart::EuclideanComplex => {
                let dx = self.axis_deriv(0);
                let dy = self.axis_deriv(1);
                let s = if alpha == 1 { -1.0 } else { 1.0 };
                dx.axpy(C64::new(0.0, s), &dy).scale_re(0.5)
            }
        }
    }

    /// Derivative along a real coordinate axis, exact on jets. On the
    /// Euclidean chart ∂_x = D₁ + D₂ and ∂_y = i(D₁ − D₂).
    pub fn real_deriv(&self, axis: usize) -> Self {
        if self.order == 0 {
            return self.axis_deriv(axis);
        }
        match self.grid.chart {
            Chart::MinkowskiLightcone => self.jet_deriv(axis + 1),
            Chart::EuclideanComplex => {
                let d1 = self.jet_deriv(1);
                let d2 = self.jet_deriv(2);
                if axis == 0 {
                    d1.add(&d2)
                } else {
                    d1.sub(&d2).scale(C64::new(0.0, 1.0))
                }
            }
        }
    }

    /// Pointwise Frobenius norm of the values.
    pub fn norm_field(&self) -> RealField {
        let rc = self.rows * self.cols;
        let bs = self.block();
        let g = self.grid;
        let margin = self.margin;
        let data = (0..g.len())
            .into_par_iter()
            .map(|k| {
                let (i1, i2) = g.indices(k);
                if g.inside(i1, i2, margin) {
                    self.data[k * bs..k * bs + rc].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        RealField { grid: g, margin, data }
    }

    /// Real parts of a scalar field's values.
    pub fn real_part(&self) -> RealField {
        assert!(self.rows == 1 && self.cols == 1);
        let bs = self.block();
        let g = self.grid;
        let margin = self.margin;
        let data = (0..g.len())
            .map(|k| {
                let (i1, i2) = g.indices(k);
                if g.inside(i1, i2, margin) { self.data[k * bs].re } else { 0.0 }
            })
            .collect();
        RealField { grid: g, margin, data }
    }

    /// Interior maximum of the pointwise norm.
    pub fn max_norm(&self) -> f64 {
        self.norm_field().max()
    }

    /// Applies a map to the values of a square field (result has order 0).
    pub fn map_values(&self, f: impl Fn(&CMatrix) -> CMatrix + Sync) -> Self {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        self.map_with(n, n, 0, move |a, o, _| {
            let m = f(&CMatrix::from_vec(n, a[..n * n].to_vec()).unwrap());
            o.copy_from_slice(m.as_slice());
        })
    }

    /// Folds the values of valid nodes in node order.
    pub fn fold_values<T>(&self, init: T, mut f: impl FnMut(T, &CMatrix) -> T) -> T {
        let mut acc = init;
        let g = self.grid;
        for k in 0..g.len() {
            let (i1, i2) = g.indices(k);
            if self.is_valid(i1, i2) {
                acc = f(acc, &self.value(i1, i2));
            }
        }
        acc
    }

    /// Largest absolute entry over all jet coefficients of valid nodes.
    pub fn sup(&self) -> f64 {
        let bs = self.block();
        let g = self.grid;
        (0..g.len())
            .filter(|&k| {
                let (i1, i2) = g.indices(k);
                self.is_valid(i1, i2)
            })
            .map(|k| self.data[k * bs..k * bs + self.rows * self.cols].iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn raw(&self) -> &[C64] {
        &self.data
    }

    /// Order-0 field from raw row-major node values.
    pub fn from_raw_values(grid: Grid2, rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.len() * rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values, got {}",
                grid.len() * rows * cols,
                data.len()
            )));
        }
        Ok(Self { grid, rows, cols, order: 0, margin: 0, data })
    }
}

/// Inverse of a square jet block; false when the value is singular.
fn jet_inverse_block(layout: &JetLayout, a: &[C64], n: usize, o: &mut [C64]) -> bool {
    let nn = n * n;
    let a0 = CMatrix::from_vec(n, a[..nn].to_vec()).unwrap();
    let inv0 = match a0.inverse() {
        Ok(m) => m,
        Err(_) => return false,
    };
    o[..nn].copy_from_slice(inv0.as_slice());
    let mut s = vec![ZERO; nn];
    for m in 1..layout.len() {
        s.iter_mut().for_each(|z| *z = ZERO);
        for &(p, q) in &layout.by_target[m] {
            let (p, q) = (p as usize * nn, q as usize * nn);
            for i in 0..n {
                for l in 0..n {
                    let x = o[p + i * n + l];
                    for j in 0..n {
                        s[i * n + j] += x * a[q + l * n + j];
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for l in 0..n {
                    acc -= s[i * n + l] * inv0.get(l, j);
                }
                o[m * nn + i * n + j] = acc;
            }
        }
    }
    true
}

fn jet_mul(layout: &JetLayout, a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; layout.len() * n * n];
    jet_matmul_into(layout, a, b, n, &mut out);
    out
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Scaling threshold for jets; below the Padé-13 bound of 5.37 so the
/// nilpotent jet part keeps full accuracy.
const JET_EXPM_THETA: f64 = 1.0;

/// exp of a square jet block by Padé-13 scaling and squaring in jet arithmetic.
fn jet_expm_block(layout: &JetLayout, a: &[C64], n: usize) -> Option<Vec<C64>> {
    let nn = n * n;
    let len = layout.len() * nn;
    let a0 = CMatrix::from_vec(n, a[..nn].to_vec()).unwrap();
    let norm = a0.norm_1();
    let s = if norm > JET_EXPM_THETA { (norm / JET_EXPM_THETA).log2().ceil() as i32 } else { 0 };
    let f = 0.5f64.powi(s);
    let x: Vec<C64> = a[..len].iter().map(|z| z * f).collect();
    let x2 = jet_mul(layout, &x, &x, n);
    let x4 = jet_mul(layout, &x2, &x2, n);
    let x6 = jet_mul(layout, &x4, &x2, n);
    let b = &PADE13;
    let comb = |c6: f64, c4: f64, c2: f64| -> Vec<C64> {
        (0..len).map(|i| x6[i] * c6 + x4[i] * c4 + x2[i] * c2).collect()
    };
    let mut inner_u = jet_mul(layout, &x6, &comb(b[13], b[11], b[9]), n);
    let tail_u = comb(b[7], b[5], b[3]);
    for i in 0..len {
        inner_u[i] += tail_u[i];
    }
    for i in 0..n {
        inner_u[i * n + i] += b[1];
    }
    let u = jet_mul(layout, &x, &inner_u, n);
    let mut v = jet_mul(layout, &x6, &comb(b[12], b[10], b[8]), n);
    let tail_v = comb(b[6], b[4], b[2]);
    for i in 0..len {
        v[i] += tail_v[i];
    }
    for i in 0..n {
        v[i * n + i] += b[0];
    }
    let den: Vec<C64> = (0..len).map(|i| v[i] - u[i]).collect();
    let num: Vec<C64> = (0..len).map(|i| v[i] + u[i]).collect();
    let mut inv = vec![ZERO; len];
    if !jet_inverse_block(layout, &den, n, &mut inv) {
        return None;
    }
    let mut acc = jet_mul(layout, &inv, &num, n);
    for _ in 0..s {
        acc = jet_mul(layout, &acc, &acc, n);
    }
    Some(acc)
}

/// Plain scaled Taylor series; reference for the Padé kernel.
#[cfg(test)]
fn jet_expm_taylor(layout: &JetLayout, a: &[C64], n: usize) -> Vec<C64> {
    let nn = n * n;
    let len = layout.len() * nn;
    let a0 = CMatrix::from_vec(n, a[..nn].to_vec()).unwrap();
    let norm = a0.norm_1();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let f = 0.5f64.powi(s);
    let x: Vec<C64> = a[..len].iter().map(|z| z * f).collect();
    let mut acc = vec![ZERO; len];
    for i in 0..n {
        acc[i * n + i] = ONE;
    }
    for k in (1..=40).rev() {
        let mut prod = jet_mul(layout, &x, &acc, n);
        for z in prod.iter_mut() {
            *z /= k as f64;
        }
        for i in 0..n {
            prod[i * n + i] += ONE;
        }
        acc = prod;
    }
    for _ in 0..s {
        acc = jet_mul(layout, &acc, &acc, n);
    }
    acc
}

/// Square N×N jet product, accumulating each target coefficient locally.
fn square_kernel<const N: usize>(layout: &JetLayout, a: &[C64], b: &[C64], o: &mut [C64]) {
    let nn = N * N;
    for (t, pairs) in layout.all_by_target.iter().enumerate() {
        let mut acc = [[ZERO; N]; N];
        for &(p, q) in pairs {
            let ap = &a[p as usize * nn..p as usize * nn + nn];
            let bq = &b[q as usize * nn..q as usize * nn + nn];
            for i in 0..N {
                for l in 0..N {
                    let x = ap[i * N + l];
                    for j in 0..N {
                        acc[i][j] += x * bq[l * N + j];
                    }
                }
            }
        }
        let ot = &mut o[t * nn..t * nn + nn];
        for i in 0..N {
            ot[i * N..i * N + N].copy_from_slice(&acc[i]);
        }
    }
}

fn jet_matmul_into(layout: &JetLayout, a: &[C64], b: &[C64], n: usize, out: &mut [C64]) {
    match n {
        2 => return square_kernel::<2>(layout, a, b, out),
        3 => return square_kernel::<3>(layout, a, b, out),
        4 => return square_kernel::<4>(layout, a, b, out),
        _ => {}
    }
    let nn = n * n;
    for &(p, q, t) in &layout.products {
        let (p, q, t) = (p as usize, q as usize, t as usize);
        for i in 0..n {
            for l in 0..n {
                let x = a[p * nn + i * n + l];
                if x == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[t * nn + i * n + j] += x * b[q * nn + l * n + j];
                }
            }
        }
    }
}
