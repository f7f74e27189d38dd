//! CP^{N-1} solutions in projector form: Veronese and traveling-wave
//! generators, the Π± ladder, θ with jets and the u^α matrices.

use crate::error::{Error, Result};
use crate::field::{Field, RealField};
use crate::grid::{Chart, Grid2};
use crate::jet::{index, ncoef};
use crate::matlie::{central_unit, CMatrix, C64, I};

pub const TOL_PROJ: f64 = 1e-10;
pub const TOL_LAMBDA: f64 = 1e-6;
pub const TOL_CONTRACT: f64 = 1e-10;

/// Jet order carried by closed-form solutions. Each ladder step and each
/// derivative consumes one order.
pub const DEFAULT_JET_ORDER: usize = 4;

/// Order for a CP^{N−1} ladder: a top-level field is raised N−1 times,
/// lowered back N−1 times after a deformation and differentiated once more.
pub fn jet_order_for(n: usize) -> usize {
    (2 * n).max(DEFAULT_JET_ORDER)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    mat: CMatrix,
}

impl Projector {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let d = projector_defect(&mat);
        if d > TOL_PROJ * (1.0 + mat.norm()) {
            return Err(Error::NotAProjector(format!("defect {d:.3e}")));
        }
        Ok(Self { mat })
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }
}

/// max of ‖P − P†‖, ‖P² − P‖ and |tr P − 1|.
pub fn projector_defect(p: &CMatrix) -> f64 {
    let herm = (p - &p.dagger()).norm();
    let idem = (&(p * p) - p).norm();
    let rank = (p.trace() - 1.0).norm();
    herm.max(idem).max(rank)
}

pub fn projector_from_vector(v: &[C64]) -> Result<Projector> {
    let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let n = v.len();
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(Projector { mat: CMatrix::from_fn(n, |i, j| v[i] * v[j].conj() / nrm) })
}

/// Pointwise projector defect of a square field's values.
pub fn projector_field_defect(p: &Field) -> RealField {
    let g = *p.grid();
    let mut data = vec![0.0; g.len()];
    for (k, d) in data.iter_mut().enumerate() {
        let (i1, i2) = g.indices(k);
        if p.is_valid(i1, i2) {
            *d = projector_defect(&p.value(i1, i2));
        }
    }
    RealField { grid: g, margin: p.margin(), data }
}

fn check_lambda(lambda: C64) -> Result<()> {
    if (1.0 + lambda).norm() < TOL_LAMBDA || (1.0 - lambda).norm() < TOL_LAMBDA {
        return Err(Error::LambdaSingular(format!("{lambda}")));
    }
    Ok(())
}

pub fn require_lambda(lambda: C64) -> Result<()> {
    check_lambda(lambda)
}

fn binom(n: usize, k: usize) -> f64 {
    crate::jet::binomial(n, k)
}

/// Veronese vector v(ξ) = (1, √C(N−1,1) ξ, …, ξ^{N−1}) as an N×1 field.
pub fn veronese_vector(n: usize, grid: Grid2, order: usize) -> Result<Field> {
    grid.check_chart(Chart::EuclideanComplex)?;
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let comps: Vec<Field> = (0..n)
        .map(|m| {
            let mut c = vec![C64::new(0.0, 0.0); m + 1];
            c[m] = C64::new(binom(n - 1, m).sqrt(), 0.0);
            Field::coord_poly(grid, 1, &c, order)
        })
        .collect();
    Ok(Field::from_jet_fn(grid, n, 1, order, |i1, i2, blk| {
        for p in 0..ncoef(order) {
            for (m, comp) in comps.iter().enumerate() {
                blk[p * n + m] = comp.coef_entries(i1, i2, p)[0];
            }
        }
    }))
}

/// P = vv†/(v†v) for an N×1 vector field.
pub fn projector_of_vector_field(v: &Field) -> Field {
    let vd = v.dagger();
    v.matmul(&vd).div_scalar(&vd.matmul(v))
}

/// Holomorphic Veronese projector P₀ with analytic jets.
pub fn veronese_field(n: usize, grid: Grid2) -> Result<Field> {
    veronese_field_with_order(n, grid, jet_order_for(n))
}

/// Order 0 gives a plain value field whose derivatives come from stencils.
pub fn veronese_field_with_order(n: usize, grid: Grid2, order: usize) -> Result<Field> {
    Ok(projector_of_vector_field(&veronese_vector(n, grid, order)?))
}

/// Nearest Hermitian rank-one projector via power iteration on (P+P†)/2.
pub fn reproject(p: &CMatrix) -> CMatrix {
    let n = p.dim();
    let h = (p + &p.dagger()).scale_re(0.5);
    let mut best = 0;
    let mut best_norm = -1.0;
    for j in 0..n {
        let c: f64 = (0..n).map(|i| h.get(i, j).norm_sqr()).sum();
        if c > best_norm {
            best_norm = c;
            best = j;
        }
    }
    let mut v: Vec<C64> = (0..n).map(|i| h.get(i, best)).collect();
    for _ in 0..200 {
        let w: Vec<C64> = (0..n).map(|i| (0..n).map(|j| h.get(i, j) * v[j]).sum()).collect();
        let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 {
            break;
        }
        let w: Vec<C64> = w.into_iter().map(|z| z / nrm).collect();
        let diff: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
            / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        v = w;
        if diff < 1e-15 {
            break;
        }
    }
    match projector_from_vector(&v) {
        Ok(q) => q.mat,
        Err(_) => h,
    }
}

/// Result of one ladder step.
#[derive(Clone, Debug)]
pub struct LadderStep {
    pub projector: Field,
    /// Largest change made by re-projection (zero for jet fields).
    pub correction: f64,
}

fn ladder_step(p: &Field, up: bool) -> Result<LadderStep> {
    p.grid().check_chart(Chart::EuclideanComplex)?;
    let a = p.deriv(1);
    let b = p.deriv(2);
    let num = if up { a.mul3(p, &b) } else { b.mul3(p, &a) };
    let den = num.trace();
    // scale-aware contraction test
    let g = *p.grid();
    let (an, bn) = (a.values().norm_field(), b.values().norm_field());
    let mut max_den: f64 = 0.0;
    let mut alive = false;
    for k in 0..g.len() {
        let (i1, i2) = g.indices(k);
        if !den.is_valid(i1, i2) {
            continue;
        }
        let d = den.scalar(i1, i2).norm();
        max_den = max_den.max(d);
        if d >= TOL_CONTRACT * an.at(i1, i2) * bn.at(i1, i2) && d > f64::MIN_POSITIVE * 1e10 {
            alive = true;
        }
    }
    if !alive {
        return Err(Error::ContractedToZero(max_den));
    }
    let q = num.div_scalar(&den);
    if q.order() > 0 {
        return Ok(LadderStep { projector: q, correction: 0.0 });
    }
    let fixed = q.map_values(reproject).with_margin(q.margin());
    let correction = fixed.sub(&q).max_norm();
    Ok(LadderStep { projector: fixed, correction })
}

/// Π₊P = D₁P P D₂P / tr(D₁P P D₂P).
pub fn raise(p: &Field) -> Result<Field> {
    Ok(ladder_step(p, true)?.projector)
}

/// Π₋P = D₂P P D₁P / tr(D₂P P D₁P).
pub fn lower(p: &Field) -> Result<Field> {
    Ok(ladder_step(p, false)?.projector)
}

pub fn raise_with_correction(p: &Field) -> Result<LadderStep> {
    ladder_step(p, true)
}

pub fn lower_with_correction(p: &Field) -> Result<LadderStep> {
    ladder_step(p, false)
}

#[derive(Clone, Debug)]
pub struct SolutionLadder {
    pub levels: Vec<Field>,
    pub active: usize,
    pub orthogonality_defect: f64,
    pub completeness_defect: f64,
    pub reprojection_correction: f64,
}

impl SolutionLadder {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn active_projector(&self) -> &Field {
        &self.levels[self.active]
    }

    pub fn with_active(mut self, k: usize) -> Result<Self> {
        if k >= self.levels.len() {
            return Err(Error::Invalid(format!("ladder level {k} out of range (length {})", self.levels.len())));
        }
        self.active = k;
        Ok(self)
    }
}

pub fn build_ladder(p0: &Field) -> Result<SolutionLadder> {
    let n = p0.rows();
    let mut levels = vec![p0.clone()];
    let mut correction: f64 = 0.0;
    while levels.len() <= n {
        match raise_with_correction(levels.last().unwrap()) {
            Ok(step) => {
                correction = correction.max(step.correction);
                levels.push(step.projector);
            }
            Err(Error::ContractedToZero(_)) => break,
            Err(e) => return Err(e),
        }
    }
    let mut orth: f64 = 0.0;
    for i in 0..levels.len() {
        for j in 0..i {
            orth = orth.max(levels[i].values().matmul(&levels[j].values()).max_norm());
        }
    }
    let mut sum = levels[0].values();
    for l in &levels[1..] {
        sum = sum.add(&l.values());
    }
    let completeness = sum.add_identity(C64::new(-1.0, 0.0)).max_norm();
    Ok(SolutionLadder {
        levels,
        active: 0,
        orthogonality_defect: orth,
        completeness_defect: completeness,
        reprojection_correction: correction,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    NumericStencil,
    Analytic,
}

/// θ together with its first and second total derivatives.
#[derive(Clone, Debug)]
pub struct JetField {
    pub theta: Field,
    pub d1: Field,
    pub d2: Field,
    pub d11: Field,
    pub d12: Field,
    pub d22: Field,
    pub provenance: Provenance,
}

impl JetField {
    /// Jets follow the field: exact for Taylor fields of order ≥ 2,
    /// stencils for value fields.
    pub fn from_theta(theta: Field) -> Self {
        let d1 = theta.deriv(1);
        let d2 = theta.deriv(2);
        let d11 = d1.deriv(1);
        let d12 = d1.deriv(2);
        let d22 = d2.deriv(2);
        let provenance = if theta.order() >= 2 { Provenance::Analytic } else { Provenance::NumericStencil };
        Self { theta, d1, d2, d11, d12, d22, provenance }
    }

    pub fn n(&self) -> usize {
        self.theta.rows()
    }

    pub fn grid(&self) -> &Grid2 {
        self.theta.grid()
    }

    pub fn d(&self, alpha: usize) -> &Field {
        if alpha == 1 { &self.d1 } else { &self.d2 }
    }

    /// P = 𝓔 − iθ.
    pub fn projector(&self) -> Field {
        self.theta.scale(-I).add_identity(C64::new(1.0 / self.n() as f64, 0.0))
    }
}

/// θ = i(P − 𝓔) with jets.
pub fn theta_of(p: &Field) -> JetField {
    let n = p.rows();
    JetField::from_theta(p.add_identity(C64::new(-1.0 / n as f64, 0.0)).scale(I))
}

/// ‖θθ + i(2−N)/N θ − (1−N)/N 𝓔‖ pointwise.
pub fn theta2_defect(j: &JetField) -> RealField {
    let n = j.n() as f64;
    let t = &j.theta;
    let e = (1.0 - n) / n / n;
    t.matmul(t)
        .axpy(I * ((2.0 - n) / n), t)
        .add_identity(C64::new(-e, 0.0))
        .norm_field()
}

/// ‖[θ₁,θ](2iθ − (2−N)𝓔) + iθ₁‖ pointwise.
pub fn eq_v_defect(j: &JetField) -> RealField {
    let n = j.n() as f64;
    let c = j.d1.commutator(&j.theta);
    let right = j.theta.scale(I * 2.0).add_identity(C64::new(-(2.0 - n) / n, 0.0));
    c.matmul(&right).axpy(I, &j.d1).norm_field()
}

/// ‖θθ₁θ − (N−1)/N² θ₁‖ pointwise.
pub fn theta_cubic_defect(j: &JetField) -> RealField {
    let n = j.n() as f64;
    j.theta.mul3(&j.d1, &j.theta).axpy(C64::new(-(n - 1.0) / (n * n), 0.0), &j.d1).norm_field()
}

/// u¹ = −2/(1+λ)[θ₁,θ], u² = −2/(1−λ)[θ₂,θ].
pub fn u_pair(j: &JetField, lambda: C64) -> Result<(Field, Field)> {
    check_lambda(lambda)?;
    let c1 = -2.0 / (1.0 + lambda);
    let c2 = -2.0 / (1.0 - lambda);
    Ok((j.d1.commutator(&j.theta).scale(c1), j.d2.commutator(&j.theta).scale(c2)))
}

/// ∂λu¹ = 2/(1+λ)²[θ₁,θ], ∂λu² = −2/(1−λ)²[θ₂,θ].
pub fn u3_pair(j: &JetField, lambda: C64) -> Result<(Field, Field)> {
    check_lambda(lambda)?;
    let c1 = 2.0 / ((1.0 + lambda) * (1.0 + lambda));
    let c2 = -2.0 / ((1.0 - lambda) * (1.0 - lambda));
    Ok((j.d1.commutator(&j.theta).scale(c1), j.d2.commutator(&j.theta).scale(c2)))
}

/// ‖[θ₁₂,θ]‖ pointwise.
pub fn el_residual(j: &JetField) -> RealField {
    j.d12.commutator(&j.theta).norm_field()
}

/// tr(P₁P₂) = −tr(θ₁θ₂), real part.
pub fn action_density(j: &JetField) -> RealField {
    j.d1.matmul(&j.d2).trace().scale_re(-1.0).real_part()
}

/// ‖D₂u¹ − D₁u² + [u¹,u²]‖ pointwise.
pub fn zero_curvature_defect(u1: &Field, u2: &Field) -> RealField {
    u1.deriv(2).sub(&u2.deriv(1)).add(&u1.commutator(u2)).norm_field()
}

#[derive(Clone, Debug)]
pub struct TravelingWave {
    pub kappa: f64,
    pub omega: f64,
    /// The constant matrix [θ₁,θ].
    pub m: CMatrix,
}

impl TravelingWave {
    pub fn new(kappa: f64, omega: f64) -> Self {
        Self { kappa, omega, m: CMatrix::from_real_rows(&[&[0.0, omega], &[-omega, 0.0]]) }
    }
}

/// θ(s) = i(P(s) − 𝓔) with P(s) = R(ωs) diag(1,0) R(ωs)ᵀ, s = x¹ + κx².
pub fn traveling_solution(kappa: f64, omega: f64, grid: Grid2) -> Result<(TravelingWave, JetField)> {
    traveling_solution_with_order(kappa, omega, grid, DEFAULT_JET_ORDER)
}

pub fn traveling_solution_with_order(kappa: f64, omega: f64, grid: Grid2, order: usize) -> Result<(TravelingWave, JetField)> {
    grid.check_chart(Chart::MinkowskiLightcone)?;
    if !kappa.is_finite() || !omega.is_finite() {
        return Err(Error::Invalid("traveling wave parameters must be finite".into()));
    }
    let w2 = 2.0 * omega;
    let theta = Field::from_jet_fn(grid, 2, 2, order, |i1, i2, blk| {
        let s = grid.coord(1, i1, i2).re + kappa * grid.coord(2, i1, i2).re;
        let mut fact = 1.0;
        for d in 0..=order {
            if d > 0 {
                fact *= d as f64;
            }
            // d-th s-derivative of cos(2ωs), sin(2ωs) divided by d!
            let ph = w2 * s + d as f64 * std::f64::consts::FRAC_PI_2;
            let scale = w2.powi(d as i32) / fact;
            let (c, sn) = (ph.cos() * scale, ph.sin() * scale);
            for b in 0..=d {
                let a = d - b;
                let w = binom(d, b) * kappa.powi(b as i32);
                let o = index(a, b) * 4;
                // θ = (i/2)[[cos, sin],[sin, −cos]]
                blk[o] = C64::new(0.0, 0.5 * c * w);
                blk[o + 1] = C64::new(0.0, 0.5 * sn * w);
                blk[o + 2] = C64::new(0.0, 0.5 * sn * w);
                blk[o + 3] = C64::new(0.0, -0.5 * c * w);
            }
        }
    });
    Ok((TravelingWave::new(kappa, omega), JetField::from_theta(theta)))
}

/// Pointwise ‖κθ₁ − θ₂‖.
pub fn traveling_constraint_defect(t: &TravelingWave, j: &JetField) -> RealField {
    j.d1.scale_re(t.kappa).sub(&j.d2).norm_field()
}

/// Pointwise ‖[θ₁,θ] − M‖.
pub fn traveling_constant_defect(t: &TravelingWave, j: &JetField) -> RealField {
    j.d1.commutator(&j.theta).sub(&Field::constant(*j.grid(), &t.m, 0)).norm_field()
}

pub fn central(n: usize) -> CMatrix {
    central_unit(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn projector_examples() {
        let p = projector_from_vector(&[c(1.0), c(0.0)]).unwrap();
        assert!(p.mat().max_abs_diff(&CMatrix::diag(&[c(1.0), c(0.0)])) == 0.0);
        let p = projector_from_vector(&[c(1.0), c(1.0)]).unwrap();
        assert!(p.mat().max_abs_diff(&CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]])) < 1e-16);
        let v = [C64::new(0.3, -1.0), C64::new(2.0, 0.5), C64::new(0.0, 1.0)];
        let p = projector_from_vector(&v).unwrap();
        for i in 0..3 {
            let pv: C64 = (0..3).map(|j| p.mat().get(i, j) * v[j]).sum();
            assert!((pv - v[i]).norm() < 1e-15);
        }
        assert!(matches!(projector_from_vector(&[c(0.0), c(0.0)]), Err(Error::ZeroVector)));
    }

    fn node_of(g: &Grid2, x: f64, y: f64) -> (usize, usize) {
        let i1 = ((x - g.origin[0]) / g.spacing[0]).round() as usize;
        let i2 = ((y - g.origin[1]) / g.spacing[1]).round() as usize;
        (i1, i2)
    }

    #[test]
    fn veronese_samples() {
        let g = Grid2::euclidean_default();
        let p = veronese_field(2, g).unwrap();
        let (a, b) = node_of(&g, 0.0, 0.0);
        assert!(p.value(a, b).max_abs_diff(&CMatrix::diag(&[c(1.0), c(0.0)])) < 1e-15);
        let (a, b) = node_of(&g, 1.0, 0.0);
        assert!(p.value(a, b).max_abs_diff(&CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]])) < 1e-15);
        assert!(veronese_field(2, Grid2::minkowski_default()).is_err());
    }

    #[test]
    fn veronese_solves_el_both_ways() {
        let g = Grid2::euclidean_default();
        for n in [2, 3] {
            let analytic = theta_of(&veronese_field(n, g).unwrap());
            assert_eq!(analytic.provenance, Provenance::Analytic);
            assert!(el_residual(&analytic).max() < 1e-12);
            let numeric = theta_of(&veronese_field_with_order(n, g, 0).unwrap());
            assert_eq!(numeric.provenance, Provenance::NumericStencil);
            let r = el_residual(&numeric).max();
            assert!(r < 1e-8, "N={n}: {r}");
            assert!(theta2_defect(&numeric).max() < 1e-12);
            assert!(eq_v_defect(&numeric).max() < 1e-10);
            assert!(theta_cubic_defect(&numeric).max() < 1e-10);
        }
    }

    #[test]
    fn perturbed_field_is_not_a_solution() {
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field_with_order(2, g, 0).unwrap());
        let bump = Field::from_matrix_fn(g, 2, |i1, i2| {
            let [x, y] = g.point(i1, i2);
            let b = (-(x * x + y * y) * 2.0).exp();
            CMatrix::from_fn(2, |r, s| if r == s { C64::new(0.0, if r == 0 { b } else { -b }) } else { C64::new(0.0, 0.0) })
        });
        let bad = JetField::from_theta(j.theta.axpy(c(0.01), &bump));
        assert!(el_residual(&bad).max() > 1e-4);
    }

    #[test]
    fn action_density_at_origin() {
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field(2, g).unwrap());
        let (a, b) = node_of(&g, 0.0, 0.0);
        let d = action_density(&j);
        assert!((d.at(a, b) - 1.0).abs() < 1e-13);
        assert!(d.min() >= -1e-14);
        assert!(action_density(&theta_of(&Field::constant(g, &CMatrix::diag(&[c(1.0), c(0.0)]), 4))).max() == 0.0);
    }

    #[test]
    fn ladder_structure() {
        let g = Grid2::euclidean_default();
        let p0 = veronese_field(2, g).unwrap();
        let p1 = raise(&p0).unwrap();
        assert!(p1.add(&p0).add_identity(c(-1.0)).max_norm() < 1e-13);
        assert!(matches!(raise(&p1), Err(Error::ContractedToZero(_))));
        assert!(lower(&p1).unwrap().sub(&p0).max_norm() < 1e-12);
        let l2 = build_ladder(&p0).unwrap();
        assert_eq!(l2.len(), 2);
        let l3 = build_ladder(&veronese_field(3, g).unwrap()).unwrap();
        assert_eq!(l3.len(), 3);
        assert!(l3.completeness_defect < TOL_PROJ, "{}", l3.completeness_defect);
        assert!(l3.orthogonality_defect < 1e-9);
        let roundtrip = lower(&l3.levels[1]).unwrap().sub(&l3.levels[0]).max_norm();
        assert!(roundtrip < TOL_PROJ);
    }

    #[test]
    fn numeric_ladder_round_trip() {
        let g = Grid2::euclidean_default();
        let p0 = veronese_field_with_order(3, g, 0).unwrap();
        let up = raise_with_correction(&p0).unwrap();
        let back = lower(&up.projector).unwrap();
        assert!(back.sub(&p0).max_norm() < 1e-8);
        assert!(projector_field_defect(&up.projector).max() < 1e-12);
    }

    #[test]
    fn u_pair_lambda_checks() {
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field(2, g).unwrap());
        assert!(matches!(u_pair(&j, c(1.0)), Err(Error::LambdaSingular(_))));
        assert!(matches!(u_pair(&j, c(-1.0)), Err(Error::LambdaSingular(_))));
        let (u1, u2) = u_pair(&j, c(0.0)).unwrap();
        assert!(u1.sub(&j.d1.commutator(&j.theta).scale_re(-2.0)).max_norm() == 0.0);
        assert!(u2.sub(&j.d2.commutator(&j.theta).scale_re(-2.0)).max_norm() == 0.0);
        let (u1, u2) = u_pair(&j, c(0.5)).unwrap();
        assert!(zero_curvature_defect(&u1, &u2).max() < 1e-12);
    }

    #[test]
    fn traveling_wave_structure() {
        let g = Grid2::minkowski_default();
        let (t, j) = traveling_solution(2.0, 1.0, g).unwrap();
        let expect = CMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).scale_re(-1.0);
        assert!(t.m.max_abs_diff(&expect) == 0.0);
        assert!(traveling_constant_defect(&t, &j).max() < 1e-12);
        assert!(traveling_constraint_defect(&t, &j).max() < 1e-14);
        assert!(el_residual(&j).max() < 1e-12);
        assert!(j.d1.commutator(&j.d2).max_norm() < 1e-12);
        let c1 = j.d1.commutator(&j.theta);
        assert!(c1.deriv(1).max_norm() < 1e-12 && c1.deriv(2).max_norm() < 1e-12);
        let (u1, u2) = u_pair(&j, c(0.5)).unwrap();
        let anti = |u: &Field| u.add(&u.dagger()).max_norm();
        assert!(anti(&u1) < 1e-12 && anti(&u2) < 1e-12);
        assert!(traveling_solution(2.0, 1.0, Grid2::euclidean_default()).is_err());
    }
}
