use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use super::{Mode, SwitchedSystem};
use crate::chart::{uniform_angles, ProjectiveAngle};
use crate::error::{Error, Result};
use crate::flow::{escape_time, EscapeOptions};
use crate::numerics::Matrix;

/// Grid of angles on the projective line carrying the deterministic escape
/// times `t_A`, `t_B` and, once solved, the mean escape times `T_A`, `T_B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartGrid {
    pub points: Vec<ProjectiveAngle>,
    pub escape_a: Vec<f64>,
    pub escape_b: Vec<f64>,
    pub mean_a: Vec<f64>,
    pub mean_b: Vec<f64>,
    /// Sup-norm of the last series term added.
    pub residual: f64,
    /// Sup-norm of every series term, in order.
    pub term_norms: Vec<f64>,
}

impl ChartGrid {
    pub fn from_points(points: Vec<ProjectiveAngle>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Numerical("grid angles must be strictly increasing".into()));
        }
        if points.iter().any(|p| p.is_boundary()) {
            return Err(Error::Domain {
                op: "ChartGrid",
                name: "theta",
                value: -FRAC_PI_2,
            });
        }
        Ok(Self {
            points,
            escape_a: Vec::new(),
            escape_b: Vec::new(),
            mean_a: Vec::new(),
            mean_b: Vec::new(),
            residual: f64::NAN,
            term_norms: Vec::new(),
        })
    }

    /// `⌈π/spacing⌉` cell-centred angles on `(−π/2, π/2)`.
    pub fn uniform(spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || spacing > PI {
            return Err(Error::Domain {
                op: "ChartGrid::uniform",
                name: "spacing",
                value: spacing,
            });
        }
        Self::from_points(uniform_angles((PI / spacing).ceil() as usize))
    }

    /// Grid with deterministic escape times filled in; fails when some point
    /// does not escape before `opts.t_cap` in one of the modes.
    pub fn with_escape_times(
        sw: &SwitchedSystem,
        points: Vec<ProjectiveAngle>,
        opts: &EscapeOptions,
    ) -> Result<Self> {
        let mut grid = Self::from_points(points)?;
        let report = check_bounded(sw, &grid.points, opts)?;
        if !report.ok {
            return Err(Error::UnboundedEscape {
                count: report.offenders.len(),
                first: report.offenders[0].0.theta(),
            });
        }
        grid.escape_a = report.escape_a;
        grid.escape_b = report.escape_b;
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.theta()).collect()
    }

    /// Smallest gap between neighbouring angles (π for fewer than two points).
    pub fn min_spacing(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1].theta() - w[0].theta())
            .fold(PI, f64::min)
    }

    /// Largest deterministic escape time on the grid.
    pub fn t0(&self) -> f64 {
        self.escape_a
            .iter()
            .chain(&self.escape_b)
            .fold(0.0, |m, &t| m.max(t))
    }

    /// Value of a grid function at `theta`, by linear interpolation in angle
    /// (linear extrapolation past the outermost points).
    pub fn interpolate(&self, values: &[f64], theta: f64) -> f64 {
        interp_weights(&self.points, theta)
            .iter()
            .map(|&(i, w)| w * values[i])
            .sum()
    }

    pub fn mean_a_at(&self, theta: f64) -> f64 {
        self.interpolate(&self.mean_a, theta)
    }

    pub fn mean_b_at(&self, theta: f64) -> f64 {
        self.interpolate(&self.mean_b, theta)
    }
}

/// Linear interpolation weights of `theta` on the sorted `points`.
pub(crate) fn interp_weights(points: &[ProjectiveAngle], theta: f64) -> [(usize, f64); 2] {
    let n = points.len();
    if n == 1 {
        return [(0, 1.0), (0, 0.0)];
    }
    let pos = points.partition_point(|p| p.theta() <= theta);
    let j = pos.clamp(1, n - 1) - 1;
    let (a, b) = (points[j].theta(), points[j + 1].theta());
    let w = (theta - a) / (b - a);
    [(j, 1.0 - w), (j + 1, w)]
}

/// Result of [`check_bounded`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedReport {
    /// Largest escape time observed (over finite ones).
    pub t0: f64,
    /// Every point escapes before the cap in both modes.
    pub ok: bool,
    pub offenders: Vec<(ProjectiveAngle, Mode)>,
    /// `t_A` per point, `+∞` where no escape was found.
    pub escape_a: Vec<f64>,
    pub escape_b: Vec<f64>,
}

/// Computes `t_A`, `t_B` on `points` and checks that they are bounded.
pub fn check_bounded(
    sw: &SwitchedSystem,
    points: &[ProjectiveAngle],
    opts: &EscapeOptions,
) -> Result<BoundedReport> {
    sw.require_projective_line("check_bounded")?;
    let times = |mode: Mode| -> Result<Vec<f64>> {
        let sys = sw.system(mode);
        points
            .par_iter()
            .map(|p| {
                let y = Matrix::scalar(p.slope().expect("grid excludes the boundary"))?;
                match escape_time(sys, &y, opts) {
                    Ok(res) => Ok(res.time_or_inf()),
                    Err(Error::NoEscapePossibleFromLinearPart) => Ok(f64::INFINITY),
                    Err(e) => Err(e),
                }
            })
            .collect()
    };
    let escape_a = times(Mode::A)?;
    let escape_b = times(Mode::B)?;
    let mut offenders = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if !escape_a[i].is_finite() {
            offenders.push((*p, Mode::A));
        }
        if !escape_b[i].is_finite() {
            offenders.push((*p, Mode::B));
        }
    }
    let t0 = escape_a
        .iter()
        .chain(&escape_b)
        .filter(|t| t.is_finite())
        .fold(0.0, |m: f64, &t| m.max(t));
    Ok(BoundedReport {
        t0,
        ok: offenders.is_empty(),
        offenders,
        escape_a,
        escape_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_has_629_points_at_default_spacing() {
        let g = ChartGrid::uniform(0.005).unwrap();
        assert_eq!(g.len(), 629);
        // The odd count puts the middle point on θ = 0.
        assert!(g.points[314].theta().abs() < 1e-15);
        assert!(ChartGrid::uniform(0.0).is_err());
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let g = ChartGrid::uniform(0.1).unwrap();
        let vals: Vec<f64> = g.points.iter().map(|p| 2.0 * p.theta() - 1.0).collect();
        for &th in &[-1.57, -1.0, 0.0, 0.33, 1.57] {
            assert!((g.interpolate(&vals, th) - (2.0 * th - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_grid_is_vacuously_bounded() {
        let sw = SwitchedSystem::rotations(1.0, 1.0, 1.0).unwrap();
        let r = check_bounded(&sw, &[], &EscapeOptions::default()).unwrap();
        assert!(r.ok);
        assert_eq!(r.t0, 0.0);
    }

    #[test]
    fn rejects_unsorted_points() {
        let p = |x| ProjectiveAngle::new(x).unwrap();
        assert!(ChartGrid::from_points(vec![p(0.2), p(0.1)]).is_err());
    }
}
