//! Wave functions Φ solving D_αΦ = u^αΦ, their λ-derivatives and LSP
//! residuals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, RealField};
use crate::grid::Chart;
use crate::matlie::{CMatrix, C64, I};
use crate::sigma::{lower, require_lambda, JetField, SolutionLadder};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralParam {
    pub lambda: C64,
}

impl SpectralParam {
    pub fn new(lambda: C64) -> Result<Self> {
        require_lambda(lambda)?;
        Ok(Self { lambda })
    }

    pub fn real(lambda: f64) -> Result<Self> {
        Self::new(C64::new(lambda, 0.0))
    }
}

#[derive(Clone, Debug)]
pub struct WaveField {
    pub lambda: SpectralParam,
    pub phi: Field,
    pub unitarity_defect: RealField,
}

impl WaveField {
    pub fn new(phi: Field, lambda: SpectralParam) -> Self {
        let v = phi.values();
        let unitarity_defect = v.dagger().matmul(&v).add_identity(C64::new(-1.0, 0.0)).norm_field();
        Self { lambda, phi, unitarity_defect }
    }

    pub fn inverse(&self) -> Result<Field> {
        self.phi.inverse()
    }

    /// Largest and smallest |det Φ| over the valid nodes.
    pub fn det_range(&self) -> (f64, f64) {
        let v = self.phi.values();
        v.fold_values((f64::INFINITY, 0.0), |(lo, hi), m| {
            let d = m.det().norm();
            (lo.min(d), hi.max(d))
        })
    }

    /// max over nodes of |det Φ − det Φ(first valid node)|.
    pub fn det_variation(&self) -> f64 {
        let v = self.phi.values();
        let mut first: Option<C64> = None;
        v.fold_values(0.0, |acc: f64, m| {
            let d = m.det();
            let d0 = *first.get_or_insert(d);
            acc.max((d - d0).norm())
        })
    }

    /// Largest 1-norm condition number of Φ.
    pub fn max_condition(&self) -> f64 {
        self.phi.values().fold_values(0.0, |acc: f64, m| acc.max(m.condition_1()))
    }
}

/// Coefficients of Φ = I + α Σ_{j<k} P_j + β P_k.
pub fn euclidean_coefficients(lambda: C64) -> (C64, C64) {
    let d = 1.0 - lambda;
    (4.0 * lambda / (d * d), -2.0 / d)
}

/// λ-derivatives of the coefficients in [`euclidean_coefficients`].
pub fn euclidean_coefficients_dlambda(lambda: C64) -> (C64, C64) {
    let d = 1.0 - lambda;
    (4.0 * (1.0 + lambda) / (d * d * d), -2.0 / (d * d))
}

/// Φ for the active ladder level k from the stored ladder.
pub fn phi_euclidean(ladder: &SolutionLadder, lambda: SpectralParam) -> Result<WaveField> {
    let k = ladder.active;
    let p = &ladder.levels[k];
    p.grid().check_chart(Chart::EuclideanComplex)?;
    let (a, b) = euclidean_coefficients(lambda.lambda);
    let mut phi = p.scale(b);
    for l in &ladder.levels[..k] {
        phi = phi.axpy(a, l);
    }
    Ok(WaveField::new(phi.add_identity(C64::new(1.0, 0.0)), lambda))
}

/// Φ rebuilt from the projector P_k alone by lowering k times.
pub fn phi_from_projector(p: &Field, k: usize, lambda: C64) -> Result<Field> {
    require_lambda(lambda)?;
    let (a, b) = euclidean_coefficients(lambda);
    let mut phi = p.scale(b);
    let mut cur = p.clone();
    for _ in 0..k {
        cur = lower(&cur)?;
        phi = phi.axpy(a, &cur);
    }
    Ok(phi.add_identity(C64::new(1.0, 0.0)))
}

/// χ = λx¹/(1+λ) − κλx²/(1−λ) as a scalar jet field.
fn chi_field(grid: crate::grid::Grid2, kappa: f64, lambda: C64, order: usize) -> Field {
    let zero = C64::new(0.0, 0.0);
    let a = Field::coord_poly(grid, 1, &[zero, lambda / (1.0 + lambda)], order);
    let b = Field::coord_poly(grid, 2, &[zero, -kappa * lambda / (1.0 - lambda)], order);
    a.add(&b)
}

/// ∂λχ = x¹/(1+λ)² − κx²/(1−λ)².
fn dchi_field(grid: crate::grid::Grid2, kappa: f64, lambda: C64, order: usize) -> Field {
    let zero = C64::new(0.0, 0.0);
    let a = Field::coord_poly(grid, 1, &[zero, 1.0 / ((1.0 + lambda) * (1.0 + lambda))], order);
    let b = Field::coord_poly(grid, 2, &[zero, -kappa / ((1.0 - lambda) * (1.0 - lambda))], order);
    a.add(&b)
}

/// Φ = exp(2χ[θ₁,θ])(2iθ − (2−N)𝓔) evaluated from the jets of θ.
pub fn phi_traveling_from_jets(j: &JetField, kappa: f64, lambda: C64) -> Result<Field> {
    require_lambda(lambda)?;
    let g = *j.grid();
    g.check_chart(Chart::MinkowskiLightcone)?;
    let n = j.n() as f64;
    let c = j.d1.commutator(&j.theta);
    let chi = chi_field(g, kappa, lambda, c.order());
    let e = c.mul_scalar(&chi).scale_re(2.0).expm()?;
    let right = j.theta.scale(I * 2.0).add_identity(C64::new(-(2.0 - n) / n, 0.0));
    Ok(e.matmul(&right))
}

pub fn phi_traveling(t: &crate::sigma::TravelingWave, j: &JetField, lambda: SpectralParam) -> Result<WaveField> {
    if j.n() != 2 {
        return Err(Error::InvalidDimension(j.n()));
    }
    Ok(WaveField::new(phi_traveling_from_jets(j, t.kappa, lambda.lambda)?, lambda))
}

/// Pointwise ‖D_αΦ − u^αΦ‖ with stencil derivatives of the Φ values.
pub fn lsp_residual(w: &WaveField, u1: &Field, u2: &Field) -> Result<(RealField, RealField)> {
    w.phi.grid().check_same(u1.grid())?;
    w.phi.grid().check_same(u2.grid())?;
    let phi = w.phi.values();
    let r1 = phi.stencil_deriv(1).sub(&u1.matmul(&phi)).norm_field();
    let r2 = phi.stencil_deriv(2).sub(&u2.matmul(&phi)).norm_field();
    Ok((r1, r2))
}

/// A closed-form family λ ↦ Φ(λ) on a fixed solution.
#[derive(Clone, Debug)]
pub enum WaveBuilder {
    Euclidean { ladder: SolutionLadder },
    Traveling { kappa: f64, jets: JetField },
}

impl WaveBuilder {
    pub fn build(&self, lambda: C64) -> Result<WaveField> {
        let sp = SpectralParam::new(lambda)?;
        match self {
            Self::Euclidean { ladder } => phi_euclidean(ladder, sp),
            Self::Traveling { kappa, jets } => Ok(WaveField::new(phi_traveling_from_jets(jets, *kappa, lambda)?, sp)),
        }
    }

    /// Rebuilds Φ at fixed λ from a (possibly deformed) solution.
    pub fn rebuild(&self, j: &JetField, lambda: C64) -> Result<Field> {
        match self {
            Self::Euclidean { ladder } => phi_from_projector(&j.projector(), ladder.active, lambda),
            Self::Traveling { kappa, .. } => phi_traveling_from_jets(j, *kappa, lambda),
        }
    }

    /// The solution the family is built on.
    pub fn jets(&self) -> JetField {
        match self {
            Self::Euclidean { ladder } => crate::sigma::theta_of(ladder.active_projector()),
            Self::Traveling { jets, .. } => jets.clone(),
        }
    }
}

/// Analytic ∂λΦ.
pub fn dlambda_phi(builder: &WaveBuilder, lambda: SpectralParam) -> Result<Field> {
    let lam = lambda.lambda;
    match builder {
        WaveBuilder::Euclidean { ladder } => {
            let (a, b) = euclidean_coefficients_dlambda(lam);
            let k = ladder.active;
            let mut d = ladder.levels[k].scale(b);
            for l in &ladder.levels[..k] {
                d = d.axpy(a, l);
            }
            Ok(d)
        }
        WaveBuilder::Traveling { kappa, jets } => {
            let w = builder.build(lam)?;
            let c = jets.d1.commutator(&jets.theta);
            let dchi = dchi_field(*jets.grid(), *kappa, lam, c.order());
            Ok(c.mul_scalar(&dchi).scale_re(2.0).matmul(&w.phi))
        }
    }
}

/// Max deviation between the analytic ∂λΦ and a central difference in λ,
/// relative to max(1, ‖∂λΦ‖∞).
pub fn dlambda_fd_defect(builder: &WaveBuilder, lambda: SpectralParam, step: f64) -> Result<f64> {
    let analytic = dlambda_phi(builder, lambda)?.values();
    let hi = builder.build(lambda.lambda + step)?.phi.values();
    let lo = builder.build(lambda.lambda - step)?.phi.values();
    let fd = hi.sub(&lo).scale_re(0.5 / step);
    Ok(fd.sub(&analytic).max_norm() / analytic.max_norm().max(1.0))
}

/// Reconstructs Φ from the ladder with explicit coefficients.
pub fn phi_from_coefficients(levels: &[Field], coeffs: &[C64]) -> Field {
    let mut phi = levels[0].scale(coeffs[0]);
    for (l, c) in levels.iter().zip(coeffs).skip(1) {
        phi = phi.axpy(*c, l);
    }
    phi.add_identity(C64::new(1.0, 0.0))
}

/// The identity as a value field.
pub fn identity_field(grid: crate::grid::Grid2, n: usize) -> Field {
    Field::constant(grid, &CMatrix::identity(n), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2;
    use crate::sigma::{build_ladder, theta_of, traveling_solution, u_pair, veronese_field};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn holomorphic_level_closed_form() {
        let g = Grid2::euclidean_default();
        let ladder = build_ladder(&veronese_field(2, g).unwrap()).unwrap();
        let lam = 0.5;
        let w = phi_euclidean(&ladder, SpectralParam::real(lam).unwrap()).unwrap();
        let want = ladder.levels[0].scale_re(-2.0 / (1.0 - lam)).add_identity(c(1.0));
        assert!(w.phi.sub(&want).max_norm() < 1e-15);
        let j = theta_of(&ladder.levels[0]);
        let (u1, u2) = u_pair(&j, c(lam)).unwrap();
        let (r1, r2) = lsp_residual(&w, &u1, &u2).unwrap();
        assert!(r1.max() < 1e-7 && r2.max() < 1e-7, "{} {}", r1.max(), r2.max());
        assert!(SpectralParam::real(1.0).is_err());
    }

    #[test]
    fn identity_phi_residual_is_u() {
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field(2, g).unwrap());
        let (u1, u2) = u_pair(&j, c(0.5)).unwrap();
        let w = WaveField::new(identity_field(g, 2), SpectralParam::real(0.5).unwrap());
        let (r1, _) = lsp_residual(&w, &u1, &u2).unwrap();
        let want = u1.values().norm_field();
        let m = r1.margin;
        let diff = (0..g.len()).map(|k| {
            let (a, b) = g.indices(k);
            if g.inside(a, b, m) { (r1.data[k] - want.data[k]).abs() } else { 0.0 }
        }).fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }

    #[test]
    fn traveling_wave_lsp_and_determinant() {
        let g = Grid2::minkowski_default();
        let (t, j) = traveling_solution(2.0, 1.0, g).unwrap();
        let lam = SpectralParam::real(0.5).unwrap();
        let w = phi_traveling(&t, &j, lam).unwrap();
        let (u1, u2) = u_pair(&j, lam.lambda).unwrap();
        let (r1, r2) = lsp_residual(&w, &u1, &u2).unwrap();
        assert!(r1.max() < 1e-8 && r2.max() < 1e-8, "{} {}", r1.max(), r2.max());
        assert!(w.det_variation() < 1e-10);
        // on χ = 0 Φ = 2iθ
        let (i1, i2) = (50, 50);
        let want = j.theta.value(i1, i2).scale(I * 2.0);
        assert!(w.phi.value(i1, i2).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn dlambda_matches_differences() {
        let g = Grid2::euclidean_default();
        for n in [2, 3] {
            let ladder = build_ladder(&veronese_field(n, g).unwrap()).unwrap();
            for k in 0..ladder.len() {
                let b = WaveBuilder::Euclidean { ladder: ladder.clone().with_active(k).unwrap() };
                let d = dlambda_fd_defect(&b, SpectralParam::real(0.5).unwrap(), 1e-5).unwrap();
                assert!(d < 1e-7, "N={n} k={k}: {d}");
            }
        }
        let ladder = build_ladder(&veronese_field(2, g).unwrap()).unwrap();
        let b = WaveBuilder::Euclidean { ladder: ladder.clone() };
        let d = dlambda_phi(&b, SpectralParam::real(0.5).unwrap()).unwrap();
        assert!(d.sub(&ladder.levels[0].scale_re(-2.0 / 0.25)).max_norm() < 1e-14);
        let (_, j) = traveling_solution(2.0, 1.0, Grid2::minkowski_default()).unwrap();
        let b = WaveBuilder::Traveling { kappa: 2.0, jets: j };
        let lam = SpectralParam::real(0.5).unwrap();
        assert!(dlambda_fd_defect(&b, lam, 1e-5).unwrap() < 1e-7);
        let d = dlambda_phi(&b, lam).unwrap();
        assert!(d.value(50, 50).norm() == 0.0);
    }

    #[test]
    fn coefficient_reconstruction() {
        let g = Grid2::euclidean_default();
        let ladder = build_ladder(&veronese_field(3, g).unwrap()).unwrap().with_active(2).unwrap();
        let lam = C64::new(-0.3, 0.0);
        let w = phi_euclidean(&ladder, SpectralParam::new(lam).unwrap()).unwrap();
        let (a, b) = euclidean_coefficients(lam);
        let rebuilt = phi_from_coefficients(&ladder.levels, &[a, a, b]);
        assert!(w.phi.sub(&rebuilt).max_norm() < 1e-14);
    }
}
