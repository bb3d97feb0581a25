//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham, "The scaling and squaring method for the matrix exponential
//! revisited", 2005).

use crate::error::{dim_err, Result};
use crate::numerics::Matrix;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
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

/// Returns `e^{A t}`.
pub fn matrix_exp(a: &Matrix, t: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(dim_err(
            "matrix_exp",
            "square",
            format!("{}x{}", a.rows(), a.cols()),
        ));
    }
    a.ensure_finite("matrix_exp")?;
    if !t.is_finite() {
        return Err(crate::Error::NonFinite("matrix_exp time"));
    }
    Ok(expm(&a.scale(t)))
}

/// `e^{M}` for a square, finite `m`. Shapes are assumed valid.
pub(crate) fn expm(m: &Matrix) -> Matrix {
    let n = m.rows();
    if n == 1 {
        return Matrix::diag(&[m[(0, 0)].exp()]);
    }
    let norm = m.norm_one();
    if norm == 0.0 {
        return Matrix::identity(n);
    }
    for &(order, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match order {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(m, coeffs);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = m.scale(0.5f64.powi(s));
    let mut r = pade13(&scaled);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn rational(u: &Matrix, v: &Matrix) -> Matrix {
    // r = (V - U)^{-1} (V + U); V - U is well conditioned in the scaled regime.
    (v - u)
        .solve(&(v + u))
        .expect("Padé denominator is nonsingular for scaled arguments")
}

fn pade_low(a: &Matrix, b: &[f64]) -> Matrix {
    let n = a.rows();
    let a2 = a * a;
    let mut odd = Matrix::identity(n).scale(b[1]);
    let mut even = Matrix::identity(n).scale(b[0]);
    let mut power = Matrix::identity(n);
    let mut j = 2;
    while j < b.len() {
        power = &power * &a2;
        even = &even + &power.scale(b[j]);
        if j + 1 < b.len() {
            odd = &odd + &power.scale(b[j + 1]);
        }
        j += 2;
    }
    let u = a * &odd;
    rational(&u, &even)
}

fn pade13(a: &Matrix) -> Matrix {
    let n = a.rows();
    let b = &B13;
    let id = Matrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| {
        let mut m = &(&a6.scale(c6) + &a4.scale(c4)) + &a2.scale(c2);
        if c0 != 0.0 {
            m = &m + &id.scale(c0);
        }
        m
    };
    let u_inner = &(&a6 * &lin(b[13], b[11], b[9], 0.0)) + &lin(b[7], b[5], b[3], b[1]);
    let u = a * &u_inner;
    let v = &(&a6 * &lin(b[12], b[10], b[8], 0.0)) + &lin(b[6], b[4], b[2], b[0]);
    rational(&u, &v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_is_identity() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let e = matrix_exp(&a, 0.0).unwrap();
        assert!((&e - &Matrix::identity(2)).max_abs() == 0.0);
    }

    #[test]
    fn rotation_generator() {
        let w = 1.7;
        let a = Matrix::from_rows(&[[0.0, -w], [w, 0.0]]).unwrap();
        for &t in &[0.01, 0.3, 1.0, 5.0, 40.0] {
            let e = matrix_exp(&a, t).unwrap();
            let (c, s) = ((w * t).cos(), (w * t).sin());
            let want = Matrix::from_rows(&[[c, -s], [s, c]]).unwrap();
            assert!((&e - &want).max_abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn diagonal_and_nilpotent() {
        let d = Matrix::diag(&[-3.0, 0.5, 2.0]);
        let e = matrix_exp(&d, 1.5).unwrap();
        for (i, x) in [-3.0f64, 0.5, 2.0].iter().enumerate() {
            assert!((e[(i, i)] / (x * 1.5).exp() - 1.0).abs() < 1e-13);
        }
        let n = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let e = matrix_exp(&n, 2.0).unwrap();
        assert!((e[(0, 1)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_square() {
        let a = Matrix::zeros(2, 3);
        assert!(matrix_exp(&a, 1.0).is_err());
    }
}
