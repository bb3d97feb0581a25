//! Independent reference implementations used as test oracles. None of them
//! calls into the numerical routines they are used to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riccati_escape::{Matrix, RiccatiSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, half_width: f64) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-half_width..=half_width))
        .collect();
    Matrix::new(rows, cols, data).unwrap()
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..inner).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// `Σ_{j<terms} (tA)^j / j!`.
pub fn taylor_expm(a: &Matrix, t: f64, terms: usize) -> Matrix {
    let n = a.rows();
    let at: Vec<Vec<f64>> = a
        .to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|x| x * t).collect())
        .collect();
    let mut term: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    let mut sum = term.clone();
    for j in 1..terms {
        term = mul(&term, &at);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= j as f64;
            }
        }
        for (s, r) in sum.iter_mut().zip(&term) {
            for (x, y) in s.iter_mut().zip(r) {
                *x += y;
            }
        }
    }
    Matrix::from_rows(&sum).unwrap()
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ
/// in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Principal Lambert W by bisection of `w e^w − x` on `[0, max(1, x)]`.
pub fn lambert_bisect(x: f64) -> f64 {
    bisect(|w| w * w.exp() - x, 0.0, x.max(1.0))
}

/// Largest singular value as the square root of the dominant eigenvalue of
/// `MᵀM`, by power iteration.
pub fn power_iteration_norm(m: &Matrix) -> f64 {
    let rows = m.to_rows();
    let c = m.cols();
    let gram: Vec<Vec<f64>> = (0..c)
        .map(|i| (0..c).map(|j| rows.iter().map(|r| r[i] * r[j]).sum()).collect())
        .collect();
    let mut v: Vec<f64> = (0..c).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w: Vec<f64> = gram
            .iter()
            .map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|x| x / norm).collect();
        if (norm - lambda).abs() <= 1e-15 * norm {
            lambda = norm;
            break;
        }
        lambda = norm;
    }
    lambda.sqrt()
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Right-hand side of the Riccati equation from the blocks, written out
/// with plain loops.
pub fn riccati_rhs_oracle(a: &Matrix, k: usize, y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.rows();
    let m = d - k;
    let at = |i: usize, j: usize| a[(i, j)];
    let a11 = |i: usize, j: usize| at(i, j);
    let a12 = |i: usize, j: usize| at(i, k + j);
    let a21 = |i: usize, j: usize| at(k + i, j);
    let a22 = |i: usize, j: usize| at(k + i, k + j);
    let mut out = vec![vec![0.0; k]; m];
    for i in 0..m {
        for j in 0..k {
            let mut v = a21(i, j);
            for l in 0..m {
                v += a22(i, l) * y[l][j];
            }
            for l in 0..k {
                v -= y[i][l] * a11(l, j);
            }
            for l in 0..k {
                let a12y: f64 = (0..m).map(|q| a12(l, q) * y[q][j]).sum();
                v -= y[i][l] * a12y;
            }
            out[i][j] = v;
        }
    }
    out
}

fn rk4(sys: &RiccatiSystem, y0: &[Vec<f64>], t: f64, steps: usize) -> Vec<Vec<f64>> {
    let k = sys.k();
    let h = t / steps as f64;
    let axpy = |y: &[Vec<f64>], s: f64, d: &[Vec<f64>]| -> Vec<Vec<f64>> {
        y.iter()
            .zip(d)
            .map(|(r, dr)| r.iter().zip(dr).map(|(a, b)| a + s * b).collect())
            .collect()
    };
    let f = |y: &[Vec<f64>]| riccati_rhs_oracle(sys.a(), k, y);
    let mut y = y0.to_vec();
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, 0.5 * h, &k1));
        let k3 = f(&axpy(&y, 0.5 * h, &k2));
        let k4 = f(&axpy(&y, h, &k3));
        y = y
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .map(|(j, v)| v + h / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]))
                    .collect()
            })
            .collect();
    }
    y
}

/// RK4 on the Riccati right-hand side, halving the step until two
/// successive solutions agree to `tol`.
pub fn rk4_adaptive(sys: &RiccatiSystem, y0: &Matrix, t: f64, tol: f64) -> Matrix {
    let y0 = y0.to_rows();
    let mut steps = 16;
    let mut prev = rk4(sys, &y0, t, steps);
    loop {
        steps *= 2;
        let next = rk4(sys, &y0, t, steps);
        let diff = prev
            .iter()
            .flatten()
            .zip(next.iter().flatten())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff < tol || steps > 1 << 20 {
            return Matrix::from_rows(&next).unwrap();
        }
        prev = next;
    }
}
