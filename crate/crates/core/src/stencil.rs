//! Central finite-difference stencils of arbitrary even order.

/// Weights c_j, j = 1..=m, of the central first-derivative stencil with
/// half-width m: f'(x) ≈ Σ_j c_j (f(x+jh) − f(x−jh)) / h.
pub fn first_derivative_weights(order: usize) -> Vec<f64> {
    assert!(order >= 2 && order.is_multiple_of(2), "stencil order must be even");
    let m = order / 2;
    (1..=m)
        .map(|j| {
            // (m!)² / ((m−j)!(m+j)!) as a stable product
            let mut r = 1.0;
            for i in 1..=j {
                r *= (m - j + i) as f64 / (m + i) as f64;
            }
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sign * r / j as f64
        })
        .collect()
}

/// Sum of absolute weights of the antisymmetric stencil (roundoff gain).
pub fn gain(order: usize) -> f64 {
    2.0 * first_derivative_weights(order).iter().map(|c| c.abs()).sum::<f64>()
}
