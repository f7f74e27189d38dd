//! Dense complex matrices and the su(N) structure built on them.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_vec(n: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(d: &[C64]) -> Self {
        let n = d.len();
        Self::from_fn(n, |i, j| if i == j { d[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Induced infinity norm (max row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(self * other)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(&(self * other) - &(other * self))
    }

    /// LU factorisation with partial pivoting. Returns (LU, perm, sign).
    fn lu(&self) -> Result<(Vec<C64>, Vec<usize>, f64)> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(pmax > 0.0) || !pmax.is_finite() {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let l = a[i * n + k] / pivot;
                a[i * n + k] = l;
                for j in (k + 1)..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= l * t;
                }
            }
        }
        Ok((a, perm, sign))
    }

    pub fn det(&self) -> C64 {
        match self.lu() {
            Ok((a, _, sign)) => {
                let n = self.n;
                (0..n).map(|i| a[i * n + i]).product::<C64>() * sign
            }
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let (a, perm, _) = self.lu()?;
        let mut inv = Self::zeros(n);
        for col in 0..n {
            let mut x: Vec<C64> =
                (0..n).map(|i| if perm[i] == col { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect();
            for i in 0..n {
                for j in 0..i {
                    let t = a[i * n + j] * x[j];
                    x[i] -= t;
                }
            }
            for i in (0..n).rev() {
                for j in (i + 1)..n {
                    let t = a[i * n + j] * x[j];
                    x[i] -= t;
                }
                x[i] /= a[i * n + i];
            }
            for i in 0..n {
                inv.set(i, col, x[i]);
            }
        }
        Ok(inv)
    }

    /// 1-norm condition number estimate from the explicit inverse.
    pub fn condition_1(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.norm_1() * inv.norm_1(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Solve self * x = b for a single right-hand side.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let inv = self.inverse()?;
        Ok((0..self.n).map(|i| (0..self.n).map(|j| inv.get(i, j) * b[j]).sum()).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})[", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, " ")?;
            for j in 0..self.n {
                let z = self.get(i, j);
                write!(f, " {:+.6e}{:+.6e}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: CMatrix) -> CMatrix {
        &self + &rhs
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: CMatrix) -> CMatrix {
        &self - &rhs
    }
}

impl Mul for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        &self * &rhs
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_re(-1.0)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            n: self.n,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        if r.re.len() != r.n * r.n || r.im.len() != r.n * r.n {
            return Err(serde::de::Error::custom("matrix entry count does not match n*n"));
        }
        let data = r.re.iter().zip(&r.im).map(|(&a, &b)| C64::new(a, b)).collect();
        Ok(CMatrix { n: r.n, data })
    }
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.dagger()
}

pub fn commutator(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    x.commutator(y)
}

pub fn central_unit(n: usize) -> CMatrix {
    CMatrix::identity(n).scale_re(1.0 / n as f64)
}

/// Default algebraic tolerance, relative to the largest entry.
pub const TOL_ALG: f64 = 1e-12;

/// Element of su(N): anti-Hermitian and traceless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SuElement {
    mat: CMatrix,
}

impl SuElement {
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tol(mat, TOL_ALG)
    }

    pub fn with_tol(mat: CMatrix, tol: f64) -> Result<Self> {
        let scale = mat.norm_max().max(1.0);
        let herm = (&mat + &mat.dagger()).norm_max();
        let tr = mat.trace().norm();
        if herm > tol * scale || tr > tol * scale {
            return Err(Error::NotInAlgebra { hermitian_part: herm, trace: tr });
        }
        Ok(Self { mat })
    }

    pub fn zero(n: usize) -> Self {
        Self { mat: CMatrix::zeros(n) }
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }
}

/// Projects an arbitrary matrix onto su(N); returns the projection and the
/// Frobenius norm of the discarded part.
pub fn project_su(m: &CMatrix) -> (SuElement, f64) {
    let n = m.dim();
    let anti = (m - &m.dagger()).scale_re(0.5);
    let tr = anti.trace() / n as f64;
    let mut p = anti;
    for i in 0..n {
        let v = p.get(i, i) - tr;
        p.set(i, i, v);
    }
    let defect = (m - &p).norm();
    (SuElement { mat: p }, defect)
}

/// Positive-definite pairing on su(N): −½ Re tr(XY).
pub fn inner(x: &SuElement, y: &SuElement) -> Result<f64> {
    inner_mat(x.mat(), y.mat())
}

pub fn inner_mat(x: &CMatrix, y: &CMatrix) -> Result<f64> {
    Ok(-0.5 * x.try_mul(y)?.trace().re)
}

/// Orthonormal basis of su(N) with its structure constants.
#[derive(Clone, Debug)]
pub struct SuBasis {
    pub dim: usize,
    pub elements: Vec<SuElement>,
    /// c[k][l][j] with [e_k, e_l] = Σ_j c[k][l][j] e_j.
    pub structure_constants: Vec<Vec<Vec<f64>>>,
}

impl SuBasis {
    /// Generalised Gell-Mann basis times i, normalised so inner(e_j, e_k) = δ_jk.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let one = C64::new(1.0, 0.0);
        let mut gens: Vec<CMatrix> = Vec::with_capacity(n * n - 1);
        for j in 0..n {
            for k in (j + 1)..n {
                let mut s = CMatrix::zeros(n);
                s.set(j, k, one);
                s.set(k, j, one);
                gens.push(s);
                let mut a = CMatrix::zeros(n);
                a.set(j, k, -I);
                a.set(k, j, I);
                gens.push(a);
            }
        }
        for l in 1..n {
            let c = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut d = CMatrix::zeros(n);
            for m in 0..l {
                d.set(m, m, C64::new(c, 0.0));
            }
            d.set(l, l, C64::new(-c * l as f64, 0.0));
            gens.push(d);
        }
        // tr(λ_a λ_b) = 2δ_ab, so e = iλ is orthonormal under −½ Re tr.
        let elements: Vec<SuElement> = gens.into_iter().map(|g| SuElement { mat: g.scale(I) }).collect();
        let dim = elements.len();
        let mut c = vec![vec![vec![0.0; dim]; dim]; dim];
        for k in 0..dim {
            for l in 0..dim {
                let com = elements[k].mat().commutator(elements[l].mat())?;
                for j in 0..dim {
                    c[k][l][j] = inner_mat(&com, elements[j].mat())?;
                }
            }
        }
        Ok(Self { dim: n, elements, structure_constants: c })
    }

    pub fn decompose(&self, x: &CMatrix) -> Result<Vec<f64>> {
        self.elements.iter().map(|e| inner_mat(x, e.mat())).collect()
    }

    pub fn recompose(&self, coeffs: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim);
        for (c, e) in coeffs.iter().zip(&self.elements) {
            out += &e.mat().scale_re(*c);
        }
        out
    }

    /// max over k,l of ‖[e_k,e_l] − Σ_j c_kl^j e_j‖.
    pub fn closure_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..self.elements.len() {
            for l in 0..self.elements.len() {
                let com = self.elements[k].mat().commutator(self.elements[l].mat())?;
                let rec = self.recompose(&self.structure_constants[k][l]);
                worst = worst.max((&com - &rec).norm());
            }
        }
        Ok(worst)
    }
}

pub fn su_basis(n: usize) -> Result<SuBasis> {
    SuBasis::new(n)
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

const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé kernel.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_finite() {
        return Err(Error::NonFinite("expm input".into()));
    }
    let n = m.dim();
    let norm = m.norm_1();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = m.scale_re(0.5f64.powi(s));
    let id = CMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let mut u_inner = &(&a6.scale_re(b[13]) + &a4.scale_re(b[11])) + &a2.scale_re(b[9]);
    u_inner = &a6 * &u_inner;
    let u_tail = &(&(&a6.scale_re(b[7]) + &a4.scale_re(b[5])) + &a2.scale_re(b[3])) + &id.scale_re(b[1]);
    let u = &a * &(&u_inner + &u_tail);
    let mut v_inner = &(&a6.scale_re(b[12]) + &a4.scale_re(b[10])) + &a2.scale_re(b[8]);
    v_inner = &a6 * &v_inner;
    let v_tail = &(&(&a6.scale_re(b[6]) + &a4.scale_re(b[4])) + &a2.scale_re(b[2])) + &id.scale_re(b[0]);
    let v = &v_inner + &v_tail;
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.inverse()?.try_mul(&p)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::NonFinite("expm result".into()));
    }
    Ok(r)
}

/// Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli() -> [CMatrix; 3] {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    [
        CMatrix::from_vec(2, vec![o, one, one, o]).unwrap(),
        CMatrix::from_vec(2, vec![o, -I, I, o]).unwrap(),
        CMatrix::from_vec(2, vec![one, o, o, -one]).unwrap(),
    ]
}
