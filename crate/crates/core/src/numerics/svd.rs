//! Singular values via one-sided (Hestenes) Jacobi rotations.

use crate::error::{dim_err, Result};
use crate::numerics::Matrix;

const MAX_SWEEPS: usize = 60;

/// Singular values of `m`, in decreasing order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let (rows, cols) = m.shape();
    if rows == 1 || cols == 1 {
        return vec![m.norm_fro()];
    }
    // Work on the columns of the taller orientation.
    let (r, c, cols_major) = if rows >= cols {
        (rows, cols, column_major(m))
    } else {
        (cols, rows, column_major(&m.transpose()))
    };
    let mut a = cols_major;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in (p + 1)..c {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..r {
                    let (x, y) = (a[p * r + i], a[q * r + i]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..r {
                    let (x, y) = (a[p * r + i], a[q * r + i]);
                    a[p * r + i] = cs * x - sn * y;
                    a[q * r + i] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = a
        .chunks(r)
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

fn column_major(m: &Matrix) -> Vec<f64> {
    let (rows, cols) = m.shape();
    let mut out = Vec::with_capacity(rows * cols);
    for j in 0..cols {
        for i in 0..rows {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Largest singular value ‖M‖₂.
pub fn spectral_norm(m: &Matrix) -> f64 {
    match m.shape() {
        (1, 1) => m[(0, 0)].abs(),
        (1, _) | (_, 1) => m.norm_fro(),
        _ => singular_values(m)[0],
    }
}

/// Smallest singular value of a square matrix; zero exactly when `m` is singular.
pub fn min_singular_value(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(dim_err(
            "min_singular_value",
            "square",
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    Ok(match m.rows() {
        1 => m[(0, 0)].abs(),
        _ => *singular_values(m).last().expect("nonempty"),
    })
}

/// Scale-aware singularity test: `σ_min(U) < 1e-9 · max(1, ‖U‖)`.
pub fn is_numerically_singular(u: &Matrix) -> bool {
    let sv = singular_values(u);
    let smax = sv[0];
    let smin = *sv.last().expect("nonempty");
    smin < SINGULAR_RTOL * smax.max(1.0)
}

pub const SINGULAR_RTOL: f64 = 1e-9;
