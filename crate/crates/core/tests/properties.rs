use proptest::prelude::*;
use solsurf_core::field::Field;
use solsurf_core::geometry::{embed_matrix, unembed};
use solsurf_core::grid::{Chart, Grid2};
use solsurf_core::matlie::{commutator, expm, inner_mat, project_su, su_basis, CMatrix, C64};
use solsurf_core::sigma::{theta_of, u_pair, veronese_field};
use solsurf_core::spectral::SpectralParam;
use solsurf_core::symmetry::{conformal_characteristic, frechet_u, ConformalSpec, FrechetPolicy};

fn su_element(n: usize, coeffs: &[f64]) -> CMatrix {
    su_basis(n).unwrap().recompose(&coeffs[..n * n - 1])
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 16)
}

fn in_algebra(m: &CMatrix) -> f64 {
    (m + &m.dagger()).norm() + m.trace().norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric_and_closes(n in 2usize..=4, a in coeffs(), b in coeffs()) {
        let (x, y) = (su_element(n, &a), su_element(n, &b));
        let xy = commutator(&x, &y).unwrap();
        let yx = commutator(&y, &x).unwrap();
        prop_assert!((&xy + &yx).norm() < 1e-13);
        prop_assert!(in_algebra(&xy) < 1e-12);
    }

    #[test]
    fn jacobi_identity(n in 2usize..=4, a in coeffs(), b in coeffs(), c in coeffs()) {
        let (x, y, z) = (su_element(n, &a), su_element(n, &b), su_element(n, &c));
        let br = |p: &CMatrix, q: &CMatrix| commutator(p, q).unwrap();
        let s = &(&br(&x, &br(&y, &z)) + &br(&y, &br(&z, &x))) + &br(&z, &br(&x, &y));
        prop_assert!(s.norm() < 1e-11);
    }

    #[test]
    fn projection_is_idempotent(n in 2usize..=4, re in coeffs(), im in coeffs()) {
        let m = CMatrix::from_fn(n, |i, j| C64::new(re[i * n + j], im[j * n + i]));
        let (p, _) = project_su(&m);
        prop_assert!(in_algebra(p.mat()) < 1e-13);
        let (pp, corr) = project_su(p.mat());
        prop_assert!(corr < 1e-13);
        prop_assert!(pp.mat().max_abs_diff(p.mat()) < 1e-14);
    }

    #[test]
    fn exponential_of_algebra_is_special_unitary(n in 2usize..=4, a in coeffs()) {
        let x = su_element(n, &a);
        let g = expm(&x).unwrap();
        let ginv = expm(&x.scale_re(-1.0)).unwrap();
        let id = CMatrix::identity(n);
        prop_assert!((&(&g * &ginv) - &id).norm() < 1e-11);
        prop_assert!((&(&g * &g.dagger()) - &id).norm() < 1e-11);
        prop_assert!((g.det() - C64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn su2_embedding_is_an_isometry(a in coeffs(), b in coeffs()) {
        let (x, y) = (su_element(2, &a), su_element(2, &b));
        let (ex, ey) = (embed_matrix(&x), embed_matrix(&y));
        let dot: f64 = ex.iter().zip(&ey).map(|(p, q)| p * q).sum();
        prop_assert!((dot - inner_mat(&x, &y).unwrap()).abs() < 1e-12 * (1.0 + dot.abs()));
        prop_assert!(unembed(ex).max_abs_diff(&x) < 1e-15);
    }

    #[test]
    fn spectral_parameter_rejects_the_poles(d in -1e-7..1e-7f64, s in prop::bool::ANY) {
        let pole = if s { 1.0 } else { -1.0 };
        prop_assert!(SpectralParam::real(pole + d).is_err());
        prop_assert!(SpectralParam::real(pole * (0.5 + d)).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// The prolongation of u is linear in the characteristic.
    #[test]
    fn frechet_derivative_is_linear_in_q(
        alpha in -1.5..1.5f64,
        beta in -1.5..1.5f64,
        c1 in -1.0..1.0f64,
        c2 in -1.0..1.0f64,
    ) {
        let g = Grid2::centered(Chart::EuclideanComplex, [0.1, -0.2], 0.05, 41).unwrap();
        let j = theta_of(&veronese_field(2, g).unwrap());
        let pol = FrechetPolicy::default();
        let lam = C64::new(0.5, 0.0);
        let q1 = conformal_characteristic(&ConformalSpec::euclidean(vec![C64::new(c1, 0.0), C64::new(0.0, 1.0)]), &j).unwrap();
        let q2 = conformal_characteristic(&ConformalSpec::euclidean(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(c2, 0.5)]), &j).unwrap();
        let q = q1.scale_re(alpha).add(&q2.scale_re(beta));
        let (a1, _) = frechet_u(&j, &q1, lam, &pol).unwrap();
        let (b1, _) = frechet_u(&j, &q2, lam, &pol).unwrap();
        let (s1, _) = frechet_u(&j, &q, lam, &pol).unwrap();
        let combo = a1.scale_re(alpha).add(&b1.scale_re(beta));
        let scale = s1.max_norm().max(1.0);
        prop_assert!(s1.values().sub(&combo.values()).max_norm() / scale < 1e-9);
        let (u1, _) = u_pair(&j, lam).unwrap();
        prop_assert!(u1.max_norm() > 0.0);
    }
}

#[test]
fn zero_characteristic_has_zero_derivative() {
    let g = Grid2::centered(Chart::EuclideanComplex, [0.0, 0.0], 0.05, 41).unwrap();
    let j = theta_of(&veronese_field(2, g).unwrap());
    let q = Field::zeros(g, 2, 2, j.theta.order());
    let (p1, p2) = frechet_u(&j, &q, C64::new(0.5, 0.0), &FrechetPolicy::default()).unwrap();
    assert_eq!(p1.max_norm(), 0.0);
    assert_eq!(p2.max_norm(), 0.0);
}
