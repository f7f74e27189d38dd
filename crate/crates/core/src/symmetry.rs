//! Generalized symmetries in evolutionary form. Prolongations are realized
//! by deforming the whole field θ → θ ± εQ and recomputing its jets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, RealField};
use crate::grid::{Chart, Grid2};
use crate::matlie::C64;
use crate::sigma::{u_pair, JetField, TravelingWave};
use crate::spectral::WaveBuilder;

/// Conformal data f(x¹), g(x²) as ascending complex coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalSpec {
    #[serde(with = "coeff_serde")]
    pub f: Vec<C64>,
    #[serde(with = "coeff_serde")]
    pub g: Vec<C64>,
}

mod coeff_serde {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

fn eval_poly(c: &[C64], x: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * x + a)
}

fn poly_deriv(c: &[C64]) -> Vec<C64> {
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

impl ConformalSpec {
    pub fn new(f: Vec<C64>, g: Vec<C64>) -> Self {
        Self { f, g }
    }

    pub fn real(f: &[f64], g: &[f64]) -> Self {
        Self::new(f.iter().map(|&x| C64::new(x, 0.0)).collect(), g.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Euclidean spec with g the conjugate mirror of f.
    pub fn euclidean(f: Vec<C64>) -> Self {
        let g = f.iter().map(|z| z.conj()).collect();
        Self { f, g }
    }

    pub fn zero() -> Self {
        Self { f: vec![], g: vec![] }
    }

    pub fn validate(&self, chart: Chart) -> Result<()> {
        let bad = |z: &C64| !z.re.is_finite() || !z.im.is_finite();
        if self.f.iter().chain(&self.g).any(bad) {
            return Err(Error::Invalid("conformal coefficients must be finite".into()));
        }
        match chart {
            Chart::MinkowskiLightcone => {
                if self.f.iter().chain(&self.g).any(|z| z.im != 0.0) {
                    return Err(Error::Invalid("Minkowski conformal coefficients must be real".into()));
                }
            }
            Chart::EuclideanComplex => {
                let len = self.f.len().max(self.g.len());
                let zero = C64::new(0.0, 0.0);
                for k in 0..len {
                    let a = self.f.get(k).copied().unwrap_or(zero);
                    let b = self.g.get(k).copied().unwrap_or(zero);
                    if (a.conj() - b).norm() > 1e-14 * (1.0 + a.norm()) {
                        return Err(Error::Invalid(format!(
                            "Euclidean conformal data needs g = conj(f); coefficient {k} differs"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn f_field(&self, grid: Grid2, order: usize) -> Field {
        Field::coord_poly(grid, 1, &self.f, order)
    }

    pub fn g_field(&self, grid: Grid2, order: usize) -> Field {
        Field::coord_poly(grid, 2, &self.g, order)
    }

    pub fn f_at(&self, x1: C64) -> C64 {
        eval_poly(&self.f, x1)
    }

    pub fn g_at(&self, x2: C64) -> C64 {
        eval_poly(&self.g, x2)
    }

    pub fn df(&self) -> Vec<C64> {
        poly_deriv(&self.f)
    }

    pub fn dg(&self) -> Vec<C64> {
        poly_deriv(&self.g)
    }

    pub fn is_zero(&self) -> bool {
        self.f.iter().chain(&self.g).all(|z| *z == C64::new(0.0, 0.0))
    }
}

/// Q = f(x¹)θ₁ + g(x²)θ₂.
pub fn conformal_characteristic(spec: &ConformalSpec, j: &JetField) -> Result<Field> {
    let grid = *j.grid();
    spec.validate(grid.chart)?;
    let order = j.d1.order();
    let f = spec.f_field(grid, order);
    let g = spec.g_field(grid, order);
    Ok(j.d1.mul_scalar(&f).add(&j.d2.mul_scalar(&g)))
}

type Evaluator = dyn Fn(&JetField) -> Result<Field> + Send + Sync;

/// A characteristic Q as a map from jets to a field.
pub enum SymmetryCharacteristic {
    Conformal(ConformalSpec),
    Custom(Box<Evaluator>),
}

impl SymmetryCharacteristic {
    pub fn evaluate(&self, j: &JetField) -> Result<Field> {
        match self {
            Self::Conformal(spec) => conformal_characteristic(spec, j),
            Self::Custom(f) => f(j),
        }
    }
}

impl std::fmt::Debug for SymmetryCharacteristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Conformal(s) => f.debug_tuple("Conformal").field(s).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrechetPolicy {
    pub eps_base: f64,
    pub richardson: bool,
}

pub const DEFAULT_EPS_BASE: f64 = 1e-5;

impl Default for FrechetPolicy {
    fn default() -> Self {
        Self { eps_base: DEFAULT_EPS_BASE, richardson: true }
    }
}

impl FrechetPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_base > 0.0) || !self.eps_base.is_finite() {
            return Err(Error::Invalid(format!("eps_base must be positive, got {}", self.eps_base)));
        }
        Ok(())
    }

    /// ε = eps_base·(1 + ‖θ‖∞).
    pub fn eps_for(&self, j: &JetField) -> f64 {
        self.eps_base * (1.0 + j.theta.sup())
    }
}

/// The solution deformed along Q with jets recomputed.
pub fn deform(j: &JetField, q: &Field, eps: f64) -> JetField {
    JetField::from_theta(j.theta.axpy(C64::new(eps, 0.0), q))
}

fn central<G>(g: &G, j: &JetField, q: &Field, eps: f64) -> Result<Vec<Field>>
where
    G: Fn(&JetField) -> Result<Vec<Field>> + Sync,
{
    let (hi, lo) = rayon::join(|| g(&deform(j, q, eps)), || g(&deform(j, q, -eps)));
    let wrap = |e: Error| match e {
        Error::DeformationOutOfDomain(_) => e,
        other => Error::DeformationOutOfDomain(other.to_string()),
    };
    let (hi, lo) = (hi.map_err(wrap)?, lo.map_err(wrap)?);
    Ok(hi.iter().zip(&lo).map(|(a, b)| a.sub(b).scale_re(0.5 / eps)).collect())
}

/// pr w_Q G = ∂ε G[θ + εQ] at ε = 0 by central differences.
pub fn frechet_apply<G>(g: G, j: &JetField, q: &Field, policy: &FrechetPolicy) -> Result<Field>
where
    G: Fn(&JetField) -> Result<Field> + Sync,
{
    let mut v = frechet_apply_many(|jj| Ok(vec![g(jj)?]), j, q, policy)?;
    Ok(v.remove(0))
}

/// Several functionals sharing each deformed solution.
pub fn frechet_apply_many<G>(g: G, j: &JetField, q: &Field, policy: &FrechetPolicy) -> Result<Vec<Field>>
where
    G: Fn(&JetField) -> Result<Vec<Field>> + Sync,
{
    policy.validate()?;
    j.grid().check_same(q.grid())?;
    let eps = policy.eps_for(j);
    frechet_many_with_eps(&g, j, q, eps, policy.richardson)
}

pub fn frechet_with_eps<G>(g: &G, j: &JetField, q: &Field, eps: f64, richardson: bool) -> Result<Field>
where
    G: Fn(&JetField) -> Result<Field> + Sync,
{
    let mut v = frechet_many_with_eps(&|jj: &JetField| Ok(vec![g(jj)?]), j, q, eps, richardson)?;
    Ok(v.remove(0))
}

fn frechet_many_with_eps<G>(g: &G, j: &JetField, q: &Field, eps: f64, richardson: bool) -> Result<Vec<Field>>
where
    G: Fn(&JetField) -> Result<Vec<Field>> + Sync,
{
    let coarse = central(g, j, q, eps)?;
    if !richardson {
        return Ok(coarse);
    }
    let fine = central(g, j, q, 0.5 * eps)?;
    Ok(fine.iter().zip(&coarse).map(|(f, c)| f.scale_re(4.0 / 3.0).axpy(C64::new(-1.0 / 3.0, 0.0), c)).collect())
}

/// Frechet derivatives of u¹ and u² along Q.
pub fn frechet_u(j: &JetField, q: &Field, lambda: C64, policy: &FrechetPolicy) -> Result<(Field, Field)> {
    let mut v = frechet_apply_many(|jj| Ok(<[Field; 2]>::from(u_pair(jj, lambda)?).to_vec()), j, q, policy)?;
    let q2 = v.pop().expect("two outputs");
    Ok((v.pop().expect("two outputs"), q2))
}

/// Closed forms pr w u¹ = D₁(fu¹) + gD₂u¹, pr w u² = fD₁u² + D₂(gu²).
pub fn prolong_u(spec: &ConformalSpec, j: &JetField, lambda: C64) -> Result<(Field, Field)> {
    let grid = *j.grid();
    spec.validate(grid.chart)?;
    let (u1, u2) = u_pair(j, lambda)?;
    let order = u1.order();
    let f = spec.f_field(grid, order);
    let g = spec.g_field(grid, order);
    let p1 = u1.mul_scalar(&f).deriv(1).add(&u1.deriv(2).mul_scalar(&g));
    let p2 = u2.deriv(1).mul_scalar(&f).add(&u2.mul_scalar(&g).deriv(2));
    Ok((p1, p2))
}

/// ‖D₂Q₁ − D₁Q₂ + [Q₁,u²] + [u¹,Q₂]‖ with Q_α = pr w_Q u^α.
pub fn el_symmetry_defect(q: &Field, j: &JetField, lambda: C64, policy: &FrechetPolicy) -> Result<RealField> {
    let (u1, u2) = u_pair(j, lambda)?;
    let (q1, q2) = frechet_u(j, q, lambda, policy)?;
    Ok(linearized_zero_curvature(&q1, &q2, &u1, &u2))
}

/// ‖D₂A − D₁B + [A,u²] + [u¹,B]‖ pointwise.
pub fn linearized_zero_curvature(a: &Field, b: &Field, u1: &Field, u2: &Field) -> RealField {
    a.deriv(2).sub(&b.deriv(1)).add(&a.commutator(u2)).add(&u1.commutator(b)).norm_field()
}

/// pr w_Q(D_αΦ − u^αΦ) with Φ rebuilt from each deformed solution.
pub fn lsp_symmetry_defect(
    builder: &WaveBuilder,
    j: &JetField,
    q: &Field,
    lambda: C64,
    policy: &FrechetPolicy,
) -> Result<(Field, Field)> {
    let (_, d1, d2) = prolonged_wave(builder, j, q, lambda, policy)?;
    Ok((d1, d2))
}

/// pr w_Q Φ together with the LSP symmetry defects, sharing each deformed Φ.
pub fn prolonged_wave(
    builder: &WaveBuilder,
    j: &JetField,
    q: &Field,
    lambda: C64,
    policy: &FrechetPolicy,
) -> Result<(Field, Field, Field)> {
    let g = |jj: &JetField| -> Result<Vec<Field>> {
        let phi = builder.rebuild(jj, lambda)?;
        let (u1, u2) = u_pair(jj, lambda)?;
        let r1 = phi.deriv(1).sub(&u1.matmul(&phi));
        let r2 = phi.deriv(2).sub(&u2.matmul(&phi));
        Ok(vec![phi, r1, r2])
    };
    let mut v = frechet_apply_many(g, j, q, policy)?.into_iter();
    let mut next = || v.next().expect("three outputs");
    Ok((next(), next(), next()))
}

/// pr w_Q Φ through the Φ-builder.
pub fn frechet_phi(builder: &WaveBuilder, j: &JetField, q: &Field, lambda: C64, policy: &FrechetPolicy) -> Result<Field> {
    frechet_apply(|jj| builder.rebuild(jj, lambda), j, q, policy)
}

/// Defect fields of D_α(pr w_Q G) − pr w_Q(D_α G). The left side uses
/// stencils on the values of pr w_Q G; the right side differentiates the
/// jets of G on each deformed solution.
#[derive(Clone, Debug)]
pub struct CommutationDefect {
    pub d1: RealField,
    pub d2: RealField,
    /// Scale of the compared terms, max(1, ‖D_α pr w_Q G‖∞).
    pub scale: f64,
}

impl CommutationDefect {
    pub fn max(&self) -> f64 {
        self.d1.max().max(self.d2.max())
    }

    pub fn max_in_box(&self, b: [f64; 4]) -> f64 {
        self.d1.max_in_box(b).max(self.d2.max_in_box(b))
    }
}

pub fn commutation_defect<G>(q: &Field, g: G, j: &JetField, policy: &FrechetPolicy) -> Result<CommutationDefect>
where
    G: Fn(&JetField) -> Result<Field> + Sync,
{
    policy.validate()?;
    commutation_defect_with_eps(q, g, j, policy.eps_for(j), policy.richardson)
}

pub fn commutation_defect_with_eps<G>(q: &Field, g: G, j: &JetField, eps: f64, richardson: bool) -> Result<CommutationDefect>
where
    G: Fn(&JetField) -> Result<Field> + Sync,
{
    let pr = frechet_with_eps(&g, j, q, eps, richardson)?.values();
    let mut out = Vec::new();
    let mut scale: f64 = 1.0;
    for alpha in [1, 2] {
        let lhs = pr.stencil_deriv(alpha);
        let rhs = frechet_with_eps(&|jj: &JetField| Ok(g(jj)?.deriv(alpha)), j, q, eps, richardson)?;
        scale = scale.max(lhs.max_norm());
        out.push(lhs.sub(&rhs.values()).norm_field());
    }
    let d2 = out.pop().unwrap();
    let d1 = out.pop().unwrap();
    Ok(CommutationDefect { d1, d2, scale })
}

/// χ = λx¹/(1+λ) − κλx²/(1−λ) as a scalar jet field.
pub fn chi_field(grid: Grid2, kappa: f64, lambda: C64, order: usize) -> Field {
    let zero = C64::new(0.0, 0.0);
    let a = Field::coord_poly(grid, 1, &[zero, lambda / (1.0 + lambda)], order);
    let b = Field::coord_poly(grid, 2, &[zero, -kappa * lambda / (1.0 - lambda)], order);
    a.add(&b)
}

/// Tangent generators of the traveling-wave immersion 𝓕:
/// R₁ = (−2f₁/(1+λ) + 2f₁₁χ)[θ₁,θ], R₂ = (−2κg₂ − 2κλf₁/(1−λ))[θ₁,θ].
pub fn traveling_r_fields(spec: &ConformalSpec, t: &TravelingWave, grid: Grid2, lambda: C64) -> Result<(Field, Field)> {
    crate::sigma::require_lambda(lambda)?;
    grid.check_chart(Chart::MinkowskiLightcone)?;
    spec.validate(grid.chart)?;
    let f1 = Field::coord_poly(grid, 1, &spec.df(), 0);
    let f11 = Field::coord_poly(grid, 1, &poly_deriv(&spec.df()), 0);
    let g2 = Field::coord_poly(grid, 2, &spec.dg(), 0);
    let chi = chi_field(grid, t.kappa, lambda, 0);
    let k = t.kappa;
    let r1 = f1.scale(-2.0 / (1.0 + lambda)).add(&f11.mul_scalar(&chi).scale_re(2.0));
    let r2 = g2.scale_re(-2.0 * k).add(&f1.scale(-2.0 * k * lambda / (1.0 - lambda)));
    Ok((r1.scalar_times(&t.m), r2.scalar_times(&t.m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigma::{theta_of, traveling_solution, veronese_field, veronese_field_with_order};
    use crate::spectral::{SpectralParam, WaveBuilder};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn xi2() -> ConformalSpec {
        ConformalSpec::euclidean(vec![c(0.0), c(0.0), c(1.0)])
    }

    #[test]
    fn spec_validation() {
        assert!(xi2().validate(Chart::EuclideanComplex).is_ok());
        let bad = ConformalSpec::new(vec![C64::new(0.0, 1.0)], vec![C64::new(0.0, 1.0)]);
        assert!(bad.validate(Chart::EuclideanComplex).is_err());
        assert!(bad.validate(Chart::MinkowskiLightcone).is_err());
        assert!(ConformalSpec::real(&[0.0, 1.0], &[0.0, 1.0]).validate(Chart::MinkowskiLightcone).is_ok());
        let json = serde_json::to_string(&xi2()).unwrap();
        let back: ConformalSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, xi2());
        assert!(serde_json::from_str::<ConformalSpec>(r#"{"f":[],"g":[],"h":[]}"#).is_err());
    }

    #[test]
    fn characteristic_examples() {
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field(2, g).unwrap());
        assert!(conformal_characteristic(&ConformalSpec::zero(), &j).unwrap().max_norm() == 0.0);
        let (_, jt) = traveling_solution(2.0, 1.0, Grid2::minkowski_default()).unwrap();
        let q = conformal_characteristic(&ConformalSpec::real(&[1.0], &[]), &jt).unwrap();
        assert!(q.sub(&jt.d1).max_norm() == 0.0);
        assert!(conformal_characteristic(&ConformalSpec::real(&[1.0], &[]), &j).is_err());
    }

    #[test]
    fn frechet_of_simple_functionals() {
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field(2, g).unwrap());
        let q = conformal_characteristic(&xi2(), &j).unwrap();
        let pol = FrechetPolicy::default();
        let id = frechet_apply(|jj| Ok(jj.theta.clone()), &j, &q, &pol).unwrap();
        assert!(id.sub(&q).max_norm() < 1e-10);
        let d1 = frechet_apply(|jj| Ok(jj.d1.clone()), &j, &q, &pol).unwrap();
        assert!(d1.sub(&q.deriv(1)).max_norm() < 1e-8);
        // linear in Q
        let q2 = j.d2.clone();
        let sum = frechet_apply(|jj| Ok(jj.d1.matmul(&jj.theta)), &j, &q.add(&q2), &pol).unwrap();
        let parts = frechet_apply(|jj| Ok(jj.d1.matmul(&jj.theta)), &j, &q, &pol)
            .unwrap()
            .add(&frechet_apply(|jj| Ok(jj.d1.matmul(&jj.theta)), &j, &q2, &pol).unwrap());
        assert!(sum.sub(&parts).max_norm() < 1e-8);
    }

    #[test]
    fn prolonged_u_matches_closed_form() {
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field(3, g).unwrap());
        let spec = xi2();
        let q = conformal_characteristic(&spec, &j).unwrap();
        let lam = c(0.5);
        let (p1, p2) = prolong_u(&spec, &j, lam).unwrap();
        let (f1, f2) = frechet_u(&j, &q, lam, &FrechetPolicy::default()).unwrap();
        let scale = p1.max_norm().max(1.0);
        assert!(p1.sub(&f1).max_norm() < 1e-6 * scale, "{}", p1.sub(&f1).max_norm());
        assert!(p2.sub(&f2).max_norm() < 1e-6 * scale);
        let z = prolong_u(&ConformalSpec::zero(), &j, lam).unwrap();
        assert!(z.0.max_norm() == 0.0 && z.1.max_norm() == 0.0);
    }

    #[test]
    fn el_symmetry_positive_and_negative() {
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field(2, g).unwrap());
        let lam = c(0.5);
        let pol = FrechetPolicy::default();
        let q = conformal_characteristic(&xi2(), &j).unwrap();
        assert!(el_symmetry_defect(&q, &j, lam, &pol).unwrap().max() < 1e-6);
        // a rotation generator times a bump is not a symmetry
        let bump = Field::coord_poly(g, 1, &[c(0.0), c(0.0), c(0.3)], j.theta.order()).mul_scalar(
            &Field::coord_poly(g, 2, &[c(1.0), c(0.0), c(0.3)], j.theta.order()),
        );
        let k = crate::matlie::CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let bad = bump.scalar_times(&k).matmul(&j.theta).commutator(&j.theta);
        assert!(el_symmetry_defect(&bad, &j, lam, &pol).unwrap().max() > 1e-3);
        let zero = q.scale_re(0.0);
        assert!(el_symmetry_defect(&zero, &j, lam, &pol).unwrap().max() == 0.0);
    }

    #[test]
    fn commutation_on_both_charts() {
        let pol = FrechetPolicy::default();
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field(2, g).unwrap());
        let q = conformal_characteristic(&xi2(), &j).unwrap();
        let d = commutation_defect(&q, |jj| Ok(jj.theta.clone()), &j, &pol).unwrap();
        assert!(d.max() < 1e-8, "{}", d.max());
        let d = commutation_defect(&q, |jj| Ok(u_pair(jj, c(0.5))?.0), &j, &pol).unwrap();
        assert!(d.max() < 1e-6, "{}", d.max());
        let gm = Grid2::minkowski_default();
        let (_, jt) = traveling_solution(2.0, 1.0, gm).unwrap();
        let qt = conformal_characteristic(&ConformalSpec::real(&[0.0, 1.0], &[0.0, 1.0]), &jt).unwrap();
        let d = commutation_defect(&qt, |jj| Ok(u_pair(jj, c(0.5))?.1), &jt, &pol).unwrap();
        assert!(d.max() < 1e-6, "{}", d.max());
    }

    #[test]
    fn commutation_with_stencil_jets() {
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field_with_order(2, g, 0).unwrap());
        let q = conformal_characteristic(&xi2(), &j).unwrap();
        let d = commutation_defect(&q, |jj| Ok(jj.theta.clone()), &j, &FrechetPolicy::default()).unwrap();
        assert!(d.max() < 1e-8, "{}", d.max());
    }

    #[test]
    fn epsilon_order_on_non_quadratic_control() {
        // G = exp(θ) is not polynomial in the jets, so the ε-error of a
        // central difference is visible: order 2 plain, order 4 with Richardson.
        let g = Grid2::euclidean_default();
        let j = theta_of(&veronese_field(2, g).unwrap());
        let q = conformal_characteristic(&xi2(), &j).unwrap();
        let cubic = |jj: &JetField| jj.theta.scale_re(3.0).expm();
        let exact = frechet_with_eps(&cubic, &j, &q, 1e-3, true).unwrap();
        for (rich, want) in [(false, 2.0), (true, 4.0)] {
            let e1 = frechet_with_eps(&cubic, &j, &q, 0.04, rich).unwrap().sub(&exact).max_norm();
            let e2 = frechet_with_eps(&cubic, &j, &q, 0.02, rich).unwrap().sub(&exact).max_norm();
            let order = (e1 / e2).log2();
            assert!((order - want).abs() < 0.3, "richardson={rich}: {order}");
        }
    }

    #[test]
    fn traveling_lsp_defects() {
        let gm = Grid2::minkowski_default();
        let (t, j) = traveling_solution(2.0, 1.0, gm).unwrap();
        let lam = c(0.5);
        let builder = WaveBuilder::Traveling { kappa: 2.0, jets: j.clone() };
        let phi = builder.build(lam).unwrap().phi;
        let pol = FrechetPolicy::default();
        // f = (x¹)², g = 0: defect₁ = −f₁₁χ(1+λ)D₁Φ, defect₂ = λ(f₁ − g₂)D₂Φ
        let spec = ConformalSpec::real(&[0.0, 0.0, 1.0], &[]);
        let q = conformal_characteristic(&spec, &j).unwrap();
        let (d1, d2) = lsp_symmetry_defect(&builder, &j, &q, lam, &pol).unwrap();
        let chi = chi_field(gm, 2.0, lam, phi.order());
        let want1 = phi.deriv(1).mul_scalar(&chi).scale(-2.0 * (1.0 + lam));
        assert!(d1.sub(&want1).max_norm() < 1e-6, "{}", d1.sub(&want1).max_norm());
        assert!(d1.max_norm() > 0.1);
        let f1 = Field::coord_poly(gm, 1, &spec.df(), phi.order());
        let want2 = phi.deriv(2).mul_scalar(&f1).scale(lam);
        assert!(d2.sub(&want2).max_norm() < 1e-6, "{}", d2.sub(&want2).max_norm());
        // f₁ = g₂: no defect
        let spec = ConformalSpec::real(&[0.7, 0.4], &[-0.2, 0.4]);
        let q = conformal_characteristic(&spec, &j).unwrap();
        let (d1, d2) = lsp_symmetry_defect(&builder, &j, &q, lam, &pol).unwrap();
        assert!(d1.max_norm() < 1e-6 && d2.max_norm() < 1e-6);
        let (r1, r2) = traveling_r_fields(&ConformalSpec::real(&[0.3], &[0.1]), &t, gm, lam).unwrap();
        assert!(r1.max_norm() == 0.0 && r2.max_norm() == 0.0);
    }

    #[test]
    fn euclidean_builder_is_conformally_covariant() {
        let g = Grid2::euclidean_default();
        let ladder = crate::sigma::build_ladder(&veronese_field(2, g).unwrap()).unwrap();
        let lam = c(0.5);
        let builder = WaveBuilder::Euclidean { ladder: ladder.with_active(1).unwrap() };
        let j = builder.jets();
        let spec = xi2();
        let q = conformal_characteristic(&spec, &j).unwrap();
        let pr = frechet_phi(&builder, &j, &q, lam, &FrechetPolicy::default()).unwrap();
        let phi = builder.build(lam).unwrap().phi;
        let o = pr.order();
        let rhs = phi.deriv(1).mul_scalar(&spec.f_field(g, o)).add(&phi.deriv(2).mul_scalar(&spec.g_field(g, o)));
        assert!(pr.sub(&rhs).max_norm() < 1e-6, "{}", pr.sub(&rhs).max_norm());
        let _ = SpectralParam::real(0.5).unwrap();
    }
}
