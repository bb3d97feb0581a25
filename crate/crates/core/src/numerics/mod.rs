//! Small dense linear algebra and special functions.

mod expm;
mod lambert;
mod matrix;
mod svd;

pub(crate) use expm::expm;
pub use expm::matrix_exp;
pub use lambert::lambert_w0;
pub use matrix::{Lu, Matrix};
pub use svd::{is_numerically_singular, min_singular_value, singular_values, spectral_norm, SINGULAR_RTOL};

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert!((pairwise_sum(&xs) - xs.iter().sum::<f64>()).abs() < 1e-10);
    }
}
