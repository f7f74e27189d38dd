//! Index tables for truncated bivariate Taylor jets.
//!
//! A jet of order K at a node stores the coefficients c_{ab}, a + b ≤ K, of
//! Σ c_{ab} (δ¹)^a (δ²)^b, where δ^α are offsets in the abstract coordinates
//! x¹, x² (ζ, ζ̄ on the Euclidean chart). Monomials are ordered by total
//! degree, so the layout of order K is a prefix of the layout of order K+1.

use std::sync::OnceLock;

pub const MAX_ORDER: usize = 10;

#[derive(Debug)]
pub struct JetLayout {
    pub order: usize,
    pub monomials: Vec<(usize, usize)>,
    /// Product triples (p, q, r): monomial p times monomial q is monomial r.
    pub products: Vec<(u16, u16, u16)>,
    /// For each target r, the pairs (p, q) with q ≠ 0 and p + q = r.
    pub by_target: Vec<Vec<(u16, u16)>>,
    /// For each target r, all pairs (p, q) with p + q = r.
    pub all_by_target: Vec<Vec<(u16, u16)>>,
}

#[inline]
pub fn ncoef(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

#[inline]
pub fn index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

impl JetLayout {
    fn build(order: usize) -> Self {
        let mut monomials = Vec::with_capacity(ncoef(order));
        for d in 0..=order {
            for b in 0..=d {
                monomials.push((d - b, b));
            }
        }
        let mut products = Vec::new();
        let mut by_target = vec![Vec::new(); monomials.len()];
        let mut all_by_target = vec![Vec::new(); monomials.len()];
        for (p, &(a1, b1)) in monomials.iter().enumerate() {
            for (q, &(a2, b2)) in monomials.iter().enumerate() {
                if a1 + a2 + b1 + b2 <= order {
                    let r = index(a1 + a2, b1 + b2);
                    products.push((p as u16, q as u16, r as u16));
                    all_by_target[r].push((p as u16, q as u16));
                    if q != 0 {
                        by_target[r].push((p as u16, q as u16));
                    }
                }
            }
        }
        Self { order, monomials, products, by_target, all_by_target }
    }

    pub fn get(order: usize) -> &'static JetLayout {
        static TABLES: OnceLock<Vec<JetLayout>> = OnceLock::new();
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        &TABLES.get_or_init(|| (0..=MAX_ORDER).map(JetLayout::build).collect())[order]
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

/// Binomial coefficient as f64.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_prefix_ordered() {
        let l3 = JetLayout::get(3);
        let l2 = JetLayout::get(2);
        assert_eq!(l3.len(), 10);
        assert_eq!(&l3.monomials[..l2.len()], &l2.monomials[..]);
        for (i, &(a, b)) in l3.monomials.iter().enumerate() {
            assert_eq!(index(a, b), i);
        }
    }

    #[test]
    fn product_count() {
        // Σ_{d≤K} C(d+3, 3) = C(K+4, 4)
        for k in 0..=6 {
            assert_eq!(JetLayout::get(k).products.len() as f64, binomial(k + 4, 4));
        }
    }
}
