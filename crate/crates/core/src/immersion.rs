//! Fokas-Gel'fand immersions: tangent assembly, compatibility, line
//! integration of F and the closed-form immersion formulas.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, RealField};
use crate::grid::Chart;
use crate::matlie::{project_su, CMatrix, C64, I};
use crate::sigma::{u3_pair, u_pair, JetField};
use crate::spectral::{dlambda_phi, SpectralParam, WaveBuilder, WaveField};
use crate::symmetry::{frechet_phi, frechet_u, linearized_zero_curvature, ConformalSpec, FrechetPolicy};

/// Ingredients of A = a u¹₃ + D₁S + [S,u¹] + pr w_Q u¹ and its B analogue.
#[derive(Clone, Debug, Default)]
pub struct ImmersionInputs {
    /// a(λ) as ascending polynomial coefficients in λ.
    pub a: Vec<C64>,
    pub gauge: Option<Field>,
    pub q: Option<Field>,
}

impl ImmersionInputs {
    pub fn a_at(&self, lambda: C64) -> C64 {
        self.a.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * lambda + c)
    }

    pub fn is_empty(&self) -> bool {
        self.a.iter().all(|c| *c == C64::new(0.0, 0.0)) && self.gauge.is_none() && self.q.is_none()
    }
}

pub fn assemble_tangents(
    inp: &ImmersionInputs,
    j: &JetField,
    lambda: C64,
    policy: &FrechetPolicy,
) -> Result<(Field, Field)> {
    if inp.is_empty() {
        return Err(Error::Invalid("immersion needs at least one nonzero ingredient".into()));
    }
    let (u1, u2) = u_pair(j, lambda)?;
    let mut a = u1.scale_re(0.0);
    let mut b = u2.scale_re(0.0);
    let coef = inp.a_at(lambda);
    if coef != C64::new(0.0, 0.0) {
        let (d1, d2) = u3_pair(j, lambda)?;
        a = a.axpy(coef, &d1);
        b = b.axpy(coef, &d2);
    }
    if let Some(s) = &inp.gauge {
        j.grid().check_same(s.grid())?;
        a = a.add(&s.deriv(1)).add(&s.commutator(&u1));
        b = b.add(&s.deriv(2)).add(&s.commutator(&u2));
    }
    if let Some(q) = &inp.q {
        let (p1, p2) = frechet_u(j, q, lambda, policy)?;
        a = a.add(&p1);
        b = b.add(&p2);
    }
    Ok((a, b))
}

/// Interior max of ‖D₂A − D₁B + [A,u²] + [u¹,B]‖.
pub fn compatibility_defect(a: &Field, b: &Field, u1: &Field, u2: &Field) -> RealField {
    linearized_zero_curvature(a, b, u1, u2)
}

/// Φ⁻¹XΦ.
pub fn conjugate(phi_inv: &Field, x: &Field, phi: &Field) -> Field {
    phi_inv.mul3(x, phi)
}

/// Per-cell interpolatory line quadrature with a sliding window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationRule {
    pub points: usize,
}

pub const DEFAULT_RULE_POINTS: usize = 12;

impl Default for IntegrationRule {
    fn default() -> Self {
        Self { points: DEFAULT_RULE_POINTS }
    }
}

/// ∫₀¹ ℓ_j(t) dt for the Lagrange basis on integer nodes `offs`.
fn cell_weights(offs: &[i64]) -> Vec<f64> {
    offs.iter()
        .enumerate()
        .map(|(j, &oj)| {
            // numerator polynomial Π_{m≠j}(t − o_m), ascending coefficients
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for (m, &om) in offs.iter().enumerate() {
                if m == j {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (k, c) in poly.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= c * om as f64;
                }
                poly = next;
                denom *= (oj - om) as f64;
            }
            poly.iter().enumerate().map(|(k, c)| c / (k + 1) as f64).sum::<f64>() / denom
        })
        .collect()
}

impl IntegrationRule {
    /// Cumulative integrals along a line of `len` samples of width `w`
    /// entries each, starting from index `start` in both directions.
    fn cumulative(&self, vals: &[C64], w: usize, h: f64, start: usize) -> Vec<C64> {
        let len = vals.len() / w;
        let pts = self.points.min(len).max(2);
        let mut cell = vec![C64::new(0.0, 0.0); (len.saturating_sub(1)) * w];
        let mut cache: std::collections::HashMap<i64, Vec<f64>> = std::collections::HashMap::new();
        for i in 0..len.saturating_sub(1) {
            let s = (i as i64 - (pts as i64 / 2 - 1)).clamp(0, (len - pts) as i64);
            let weights = cache
                .entry(s - i as i64)
                .or_insert_with(|| cell_weights(&(0..pts as i64).map(|k| s + k - i as i64).collect::<Vec<_>>()));
            for (k, wk) in weights.iter().enumerate() {
                let src = (s as usize + k) * w;
                for e in 0..w {
                    cell[i * w + e] += vals[src + e] * (wk * h);
                }
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); len * w];
        for i in start..len.saturating_sub(1) {
            for e in 0..w {
                out[(i + 1) * w + e] = out[i * w + e] + cell[i * w + e];
            }
        }
        for i in (0..start).rev() {
            for e in 0..w {
                out[i * w + e] = out[(i + 1) * w + e] - cell[i * w + e];
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct ImmersionResult {
    /// F after su-projection.
    pub f: Field,
    /// F as integrated, before projection.
    pub f_raw: Field,
    pub basepoint: (usize, usize),
    pub compat_defect: f64,
    pub path_defect: f64,
    /// Pointwise discrepancy between the two integration orders.
    pub path_residual: RealField,
    pub su_correction: f64,
}

/// Integrates D₁F = Φ⁻¹AΦ, D₂F = Φ⁻¹BΦ along grid lines from the basepoint,
/// once x-then-y and once y-then-x.
pub fn integrate_surface(
    a: &Field,
    b: &Field,
    w: &WaveField,
    u1: &Field,
    u2: &Field,
    basepoint: Option<(usize, usize)>,
    rule: IntegrationRule,
) -> Result<ImmersionResult> {
    let grid = *w.phi.grid();
    grid.check_same(a.grid())?;
    grid.check_same(b.grid())?;
    let compat = compatibility_defect(a, b, u1, u2).max();
    let phi = w.phi.values();
    let phi_inv = phi.inverse()?;
    let ta = conjugate(&phi_inv, &a.values(), &phi);
    let tb = conjugate(&phi_inv, &b.values(), &phi);
    // derivatives along the two grid axes
    let (fx, fy) = match grid.chart {
        Chart::MinkowskiLightcone => (ta, tb),
        Chart::EuclideanComplex => (ta.add(&tb), ta.sub(&tb).scale(I)),
    };
    let m = fx.margin().max(fy.margin());
    let (n1, n2) = (grid.dims[0], grid.dims[1]);
    if 2 * m + 2 > n1.min(n2) {
        return Err(Error::InvalidGrid(format!("no interior left to integrate on (margin {m})")));
    }
    let bp = basepoint.unwrap_or((n1 / 2, n2 / 2));
    if !grid.inside(bp.0, bp.1, m) {
        return Err(Error::Invalid(format!("basepoint {bp:?} lies outside the valid interior (margin {m})")));
    }
    let n = a.rows();
    let nn = n * n;
    let (l1, l2) = (n1 - 2 * m, n2 - 2 * m);
    let (b1, b2) = (bp.0 - m, bp.1 - m);
    let gather = |f: &Field, i1: usize, i2: usize| f.value_entries(i1 + m, i2 + m).to_vec();
    let line1 = |f: &Field, i2: usize| -> Vec<C64> { (0..l1).flat_map(|i1| gather(f, i1, i2)).collect() };
    let line2 = |f: &Field, i1: usize| -> Vec<C64> { (0..l2).flat_map(|i2| gather(f, i1, i2)).collect() };
    let (h1, h2) = (grid.spacing[0], grid.spacing[1]);

    // path one: along axis 1 on the basepoint row, then along axis 2
    let row = rule.cumulative(&line1(&fx, b2), nn, h1, b1);
    let cols: Vec<Vec<C64>> = (0..l1).into_par_iter().map(|i1| rule.cumulative(&line2(&fy, i1), nn, h2, b2)).collect();
    // path two: along axis 2 on the basepoint column, then along axis 1
    let col = rule.cumulative(&line2(&fy, b1), nn, h2, b2);
    let rows: Vec<Vec<C64>> = (0..l2).into_par_iter().map(|i2| rule.cumulative(&line1(&fx, i2), nn, h1, b1)).collect();

    let mut p1 = vec![C64::new(0.0, 0.0); grid.len() * nn];
    let mut p2 = p1.clone();
    for i2 in 0..l2 {
        for i1 in 0..l1 {
            let k = grid.node(i1 + m, i2 + m) * nn;
            for e in 0..nn {
                p1[k + e] = row[i1 * nn + e] + cols[i1][i2 * nn + e];
                p2[k + e] = col[i2 * nn + e] + rows[i2][i1 * nn + e];
            }
        }
    }
    let f1 = Field::from_raw_values(grid, n, n, p1)?.with_margin(m);
    let f2 = Field::from_raw_values(grid, n, n, p2)?.with_margin(m);
    let path_residual = f1.sub(&f2).norm_field();
    let path_defect = path_residual.max();
    let (f, su_correction) = su_project_field(&f1);
    Ok(ImmersionResult { f, f_raw: f1, basepoint: bp, compat_defect: compat, path_defect, path_residual, su_correction })
}

/// Pointwise su-projection of the values; returns the largest discarded norm.
pub fn su_project_field(f: &Field) -> (Field, f64) {
    let proj = f.map_values(|m| project_su(m).0.into_mat()).with_margin(f.margin());
    let corr = proj.sub(&f.values()).max_norm();
    (proj, corr)
}

/// Pointwise ‖D_αF − Φ⁻¹X_αΦ‖ with stencil derivatives of the values of F.
pub fn tangent_defect(f: &Field, x1: &Field, x2: &Field, phi: &Field) -> Result<(RealField, RealField)> {
    let phi = phi.values();
    let phi_inv = phi.inverse()?;
    let fv = f.values();
    let r1 = fv.stencil_deriv(1).sub(&conjugate(&phi_inv, &x1.values(), &phi)).norm_field();
    let r2 = fv.stencil_deriv(2).sub(&conjugate(&phi_inv, &x2.values(), &phi)).norm_field();
    Ok((r1, r2))
}

/// Sym-Tafel immersion F = a(λ)Φ⁻¹∂λΦ.
pub fn sym_tafel(builder: &WaveBuilder, a: C64, lambda: SpectralParam) -> Result<Field> {
    let w = builder.build(lambda.lambda)?;
    let d = dlambda_phi(builder, lambda)?;
    Ok(w.phi.inverse()?.matmul(&d).scale(a))
}

/// Gauge immersion F = Φ⁻¹SΦ.
pub fn gauge_immersion(s: &Field, w: &WaveField) -> Result<Field> {
    Ok(conjugate(&w.phi.inverse()?, s, &w.phi))
}

/// Conformal immersion F = Φ⁻¹(fu¹ + gu²)Φ.
pub fn conformal_immersion_closed(spec: &ConformalSpec, j: &JetField, w: &WaveField, lambda: C64) -> Result<Field> {
    let grid = *j.grid();
    spec.validate(grid.chart)?;
    let (u1, u2) = u_pair(j, lambda)?;
    let o = u1.order();
    let x = u1.mul_scalar(&spec.f_field(grid, o)).add(&u2.mul_scalar(&spec.g_field(grid, o)));
    Ok(conjugate(&w.phi.inverse()?, &x, &w.phi))
}

/// 𝓕 = Φ⁻¹ pr w_Q Φ with pr w_Q Φ from the Φ-builder.
pub fn prolong_immersion(
    builder: &WaveBuilder,
    j: &JetField,
    q: &Field,
    lambda: C64,
    policy: &FrechetPolicy,
) -> Result<Field> {
    let pr = frechet_phi(builder, j, q, lambda, policy)?;
    let phi = builder.rebuild(j, lambda)?;
    Ok(phi.inverse()?.matmul(&pr))
}

/// Mean of F − 𝓕 over the valid nodes and the largest deviation from it.
pub fn constant_difference_check(f: &Field, calf: &Field) -> (CMatrix, f64) {
    let d = f.values().sub(&calf.values());
    let n = d.rows();
    let (sum, count) = d.fold_values((CMatrix::zeros(n), 0usize), |(s, c), m| (&s + m, c + 1));
    let mean = sum.scale_re(1.0 / count.max(1) as f64);
    let var = d.fold_values(0.0, |acc: f64, m| acc.max((m - &mean).norm()));
    (mean, var)
}

/// Ψ = ΦF.
pub fn psi_of(f: &Field, w: &WaveField) -> Field {
    w.phi.matmul(f)
}

/// Pointwise ‖D_αΨ − u^αΨ − X_αΦ‖ with stencil derivatives of Ψ.
pub fn psi_residual(psi: &Field, w: &WaveField, u1: &Field, u2: &Field, x1: &Field, x2: &Field) -> (RealField, RealField) {
    let p = psi.values();
    let phi = w.phi.values();
    let r = |alpha: usize, u: &Field, x: &Field| {
        p.stencil_deriv(alpha).sub(&u.values().matmul(&p)).sub(&x.values().matmul(&phi)).norm_field()
    };
    (r(1, u1, x1), r(2, u2, x2))
}

/// Smallest eigenvalue of the Gram matrix of two tangent fields under
/// −½Re tr(XY), relative to its largest, per node. Zero where both vanish.
pub fn tangent_independence_field(t1: &Field, t2: &Field) -> RealField {
    let g = *t1.grid();
    let margin = t1.margin().max(t2.margin());
    let ip = |a: &CMatrix, b: &CMatrix| -0.5 * (a * b).trace().re;
    let data = (0..g.len())
        .map(|k| {
            let (i1, i2) = g.indices(k);
            if !(t1.is_valid(i1, i2) && t2.is_valid(i1, i2)) {
                return 0.0;
            }
            let (x, y) = (t1.value(i1, i2), t2.value(i1, i2));
            let (g11, g12, g22) = (ip(&x, &x), ip(&x, &y), ip(&y, &y));
            let tr = g11 + g22;
            let det = g11 * g22 - g12 * g12;
            let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
            let (lo, hi) = (0.5 * tr - disc, 0.5 * tr + disc);
            if hi > 0.0 {
                lo / hi
            } else {
                0.0
            }
        })
        .collect();
    RealField { grid: g, margin, data }
}

/// Worst case of [`tangent_independence_field`] over valid nodes.
pub fn tangent_independence(t1: &Field, t2: &Field) -> f64 {
    tangent_independence_field(t1, t2).min()
}
