//! The canonical chart `Y ↦ span[I; Y]` of the Grassmannian `G^k(ℝ^d)`, the
//! projection-difference metric, and angle nets on the projective line.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::numerics::{min_singular_value, spectral_norm, Matrix};

/// A `k`-dimensional subspace of `ℝ^d`, held as an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspacePoint {
    basis: Matrix,
}

impl SubspacePoint {
    /// Orthonormalizes the columns of `m` (d×k, full column rank).
    pub fn from_spanning(m: &Matrix) -> Result<Self> {
        m.ensure_finite("SubspacePoint")?;
        let (d, k) = m.shape();
        if k > d {
            return Err(dim_err("SubspacePoint", format!("at most {d} columns"), k));
        }
        let mut cols: Vec<Vec<f64>> = (0..k).map(|j| (0..d).map(|i| m[(i, j)]).collect()).collect();
        for j in 0..k {
            let original = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            // Two passes of modified Gram–Schmidt.
            for _ in 0..2 {
                for p in 0..j {
                    let dot: f64 = cols[p].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                    let (head, tail) = cols.split_at_mut(j);
                    for (x, q) in tail[0].iter_mut().zip(&head[p]) {
                        *x -= dot * q;
                    }
                }
            }
            let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            // Relative to the column itself, so columns of very different
            // lengths are fine.
            if !(norm > 1e-13 * original) || original == 0.0 {
                return Err(Error::Singular("SubspacePoint: rank-deficient spanning set"));
            }
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        let basis = Matrix::from_fn(d, k, |i, j| cols[j][i]);
        Ok(Self { basis })
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Orthogonal projection `B·Bᵀ` onto the subspace.
    pub fn projector(&self) -> Matrix {
        &self.basis * &self.basis.transpose()
    }

    /// Image `M(V)` of the subspace under an invertible linear map.
    pub fn transform(&self, m: &Matrix) -> Result<Self> {
        Self::from_spanning(&m.matmul(&self.basis)?)
    }
}

/// `ψ(Y) = span[I; Y]`.
pub fn chart_embed(y: &Matrix) -> Result<SubspacePoint> {
    let k = y.cols();
    SubspacePoint::from_spanning(&Matrix::vstack(&Matrix::identity(k), y)?)
}

/// Inverse of the chart on its image.
#[derive(Debug, Clone, PartialEq)]
pub enum Retraction {
    OnChart(Matrix),
    /// The subspace meets `span[0; I]` nontrivially: the escape set.
    OffChart,
}

/// Threshold on `σ_min` of the top block of an orthonormal basis below which
/// the subspace is treated as lying on the chart boundary.
pub const OFF_CHART_TOL: f64 = 1e-12;

pub fn chart_retract(p: &SubspacePoint) -> Retraction {
    let (d, k) = p.basis.shape();
    if d == k {
        return Retraction::OffChart;
    }
    let top = p.basis.block(0, 0, k, k);
    if min_singular_value(&top).map_or(true, |s| s < OFF_CHART_TOL) {
        return Retraction::OffChart;
    }
    let bottom = p.basis.block(k, 0, d - k, k);
    match top.solve_right(&bottom) {
        Ok(y) => Retraction::OnChart(y),
        Err(_) => Retraction::OffChart,
    }
}

/// `ρ(P1, P2) = ‖π1 − π2‖₂`, the spectral norm of the projection difference.
pub fn grassmann_distance(p1: &SubspacePoint, p2: &SubspacePoint) -> Result<f64> {
    if p1.basis.shape() != p2.basis.shape() {
        return Err(dim_err(
            "grassmann_distance",
            format!("{:?}", p1.basis.shape()),
            format!("{:?}", p2.basis.shape()),
        ));
    }
    Ok(spectral_norm(&(&p1.projector() - &p2.projector())))
}

/// A line through the origin of `ℝ²`, by its angle from the positive x-axis,
/// normalized into `[−π/2, π/2)`. The angle `−π/2` (the y-axis) is the chart
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjectiveAngle(f64);

impl ProjectiveAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite("ProjectiveAngle"));
        }
        Ok(Self(normalize_line_angle(theta)))
    }

    /// Angle of the line `span[1; y]`.
    pub fn from_slope(y: f64) -> Self {
        Self(y.atan())
    }

    pub fn from_point(p: &SubspacePoint) -> Result<Self> {
        if p.basis.shape() != (2, 1) {
            return Err(dim_err(
                "ProjectiveAngle",
                "(2, 1)",
                format!("{:?}", p.basis.shape()),
            ));
        }
        Ok(Self(line_angle(p.basis[(0, 0)], p.basis[(1, 0)])))
    }

    pub fn theta(self) -> f64 {
        self.0
    }

    pub fn is_boundary(self) -> bool {
        self.0 == -FRAC_PI_2
    }

    /// Chart value `tan θ`, or `None` on the boundary.
    pub fn slope(self) -> Option<f64> {
        (!self.is_boundary()).then(|| self.0.tan())
    }

    /// Unit direction `[cos θ; sin θ]`.
    pub fn direction(self) -> [f64; 2] {
        [self.0.cos(), self.0.sin()]
    }

    pub fn to_point(self) -> SubspacePoint {
        let [c, s] = self.direction();
        SubspacePoint {
            basis: Matrix::from_fn(2, 1, |i, _| if i == 0 { c } else { s }),
        }
    }

    /// Projective distance `|sin(θ1 − θ2)|`.
    pub fn distance(self, other: Self) -> f64 {
        (self.0 - other.0).sin().abs()
    }
}

/// Folds an angle into `[−π/2, π/2)`.
pub fn normalize_line_angle(theta: f64) -> f64 {
    let r = (theta + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if r >= FRAC_PI_2 {
        -FRAC_PI_2
    } else {
        r
    }
}

/// Angle of the line through `(x, y)`, in `[−π/2, π/2)`.
pub fn line_angle(x: f64, y: f64) -> f64 {
    normalize_line_angle(y.atan2(x))
}

/// `n` cell-centred angles covering the open chart `(−π/2, π/2)` with
/// spacing `π/n`.
pub fn uniform_angles(n: usize) -> Vec<ProjectiveAngle> {
    let h = PI / n as f64;
    (0..n)
        .map(|j| ProjectiveAngle(-FRAC_PI_2 + (j as f64 + 0.5) * h))
        .collect()
}

/// Finite ε-net of the projective line (minus the chart boundary).
///
/// Uses `⌈π/ε⌉ + 1` uniform angles, so every on-chart line is within
/// distance `π/(2n) < ε` of a net point.
pub fn build_net(epsilon: f64) -> Result<Vec<ProjectiveAngle>> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain {
            op: "build_net",
            name: "epsilon",
            value: epsilon,
        });
    }
    let n = (PI / epsilon).ceil() as usize + 1;
    Ok(uniform_angles(n))
}

/// Index of the net point nearest to `theta` in the projective metric.
/// `net` must be sorted.
pub fn nearest_net_point(net: &[ProjectiveAngle], theta: ProjectiveAngle) -> usize {
    assert!(!net.is_empty(), "empty net");
    let pos = net.partition_point(|p| p.0 < theta.0);
    // Neighbours in the sorted order plus both ends (the projective wrap).
    [pos.saturating_sub(1), pos.min(net.len() - 1), 0, net.len() - 1]
        .into_iter()
        .min_by(|&i, &j| {
            net[i]
                .distance(theta)
                .total_cmp(&net[j].distance(theta))
                .then(i.cmp(&j))
        })
        .expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn embed_zero_and_one() {
        let p = chart_embed(&Matrix::scalar(0.0).unwrap()).unwrap();
        assert_eq!(ProjectiveAngle::from_point(&p).unwrap().theta(), 0.0);
        let p = chart_embed(&Matrix::scalar(1.0).unwrap()).unwrap();
        assert!((ProjectiveAngle::from_point(&p).unwrap().theta() - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn y_axis_is_off_chart() {
        let p = ProjectiveAngle::new(FRAC_PI_2).unwrap();
        assert!(p.is_boundary());
        assert_eq!(chart_retract(&p.to_point()), Retraction::OffChart);
        let x_axis = ProjectiveAngle::new(0.0).unwrap().to_point();
        assert_eq!(
            chart_retract(&x_axis),
            Retraction::OnChart(Matrix::scalar(0.0).unwrap())
        );
    }

    #[test]
    fn axes_are_at_distance_one() {
        let x = ProjectiveAngle::new(0.0).unwrap().to_point();
        let y = ProjectiveAngle::new(FRAC_PI_2).unwrap().to_point();
        assert!((grassmann_distance(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(grassmann_distance(&x, &x).unwrap(), 0.0);
        let z = chart_embed(&Matrix::zeros(2, 1)).unwrap();
        assert!(grassmann_distance(&x, &z).is_err());
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_line_angle(FRAC_PI_2), -FRAC_PI_2);
        assert!((normalize_line_angle(PI + 0.25) - 0.25).abs() < 1e-15);
        assert!((normalize_line_angle(-3.0 * FRAC_PI_4) - FRAC_PI_4).abs() < 1e-15);
        assert!((line_angle(-1.0, -1.0) - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn net_shape() {
        assert!(build_net(0.0).is_err());
        assert!(build_net(-1.0).is_err());
        let net = build_net(1.0).unwrap();
        assert!(net.len() >= 2);
        assert!(net.windows(2).all(|w| w[0] < w[1]));
        assert!(net.iter().all(|p| !p.is_boundary()));
    }

    #[test]
    fn nearest_point_wraps() {
        let net = uniform_angles(4);
        let near_top = ProjectiveAngle::new(FRAC_PI_2 - 1e-3).unwrap();
        assert_eq!(nearest_net_point(&net, near_top), 3);
        let just_past = ProjectiveAngle::new(-FRAC_PI_2 + 1e-3).unwrap();
        assert_eq!(nearest_net_point(&net, just_past), 0);
        assert_eq!(nearest_net_point(&net, ProjectiveAngle::new(0.1).unwrap()), 2);
    }
}
