use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::interp_weights;
use super::{ChartGrid, PoissonLaw, SwitchedSystem};
use crate::chart::{line_angle, ProjectiveAngle};
use crate::error::{Error, Result};
use crate::flow::RiccatiSystem;
use crate::numerics::expm;

const MIN_NODES: usize = 64;
const MAX_NODES: usize = 1 << 16;

/// The integral operator `(M T)(s) = ∫_0^{t(s)} f(τ) T(e^{Aτ}.s) dτ`
/// discretized on a grid: composite Simpson in `τ` with the density
/// integrated exactly, linear interpolation of `T` in angle. Each row is a
/// sparse list of `(grid index, weight)`.
#[derive(Debug, Clone)]
pub struct QuadraturePlan {
    rows: Vec<Vec<(usize, f64)>>,
}

impl QuadraturePlan {
    pub fn build(
        sys: &RiccatiSystem,
        escape_times: &[f64],
        law: PoissonLaw,
        points: &[ProjectiveAngle],
    ) -> Result<Self> {
        if (sys.dim(), sys.k()) != (2, 1) {
            return Err(crate::error::dim_err(
                "QuadraturePlan",
                "2x2 system, k = 1",
                sys.dim(),
            ));
        }
        if escape_times.len() != points.len() {
            return Err(crate::error::dim_err(
                "QuadraturePlan",
                points.len(),
                escape_times.len(),
            ));
        }
        if let Some(i) = escape_times.iter().position(|t| !t.is_finite()) {
            return Err(Error::UnboundedEscape {
                count: escape_times.iter().filter(|t| !t.is_finite()).count(),
                first: points[i].theta(),
            });
        }
        let spacing = points
            .windows(2)
            .map(|w| w[1].theta() - w[0].theta())
            .fold(std::f64::consts::PI, f64::min);
        let rows = points
            .par_iter()
            .zip(escape_times.par_iter())
            .map(|(p, &t_esc)| plan_row(sys, law, points, *p, t_esc, spacing))
            .collect();
        Ok(Self { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, w)| w * values[j]).sum())
            .collect()
    }

    /// Sum of weights per row; approximates `F(t(s))`.
    pub fn row_sums(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect()
    }
}

/// Angles of the flowed line at `n + 1` equispaced times on `[0, t_end]`,
/// unwrapped so that they vary continuously from `start`.
fn flow_angles(sys: &RiccatiSystem, start: ProjectiveAngle, t_end: f64, n: usize) -> Vec<f64> {
    let step = expm(&sys.a().scale(t_end / n as f64));
    let [mut x, mut y] = start.direction();
    let mut prev = start.theta();
    let mut out = Vec::with_capacity(n + 1);
    out.push(prev);
    for _ in 0..n {
        let nx = step[(0, 0)] * x + step[(0, 1)] * y;
        let ny = step[(1, 0)] * x + step[(1, 1)] * y;
        let r = nx.hypot(ny);
        (x, y) = (nx / r, ny / r);
        let raw = line_angle(x, y);
        let unwrapped = raw + std::f64::consts::PI * ((prev - raw) / std::f64::consts::PI).round();
        prev = unwrapped;
        out.push(unwrapped.clamp(-FRAC_PI_2, FRAC_PI_2));
    }
    out
}

fn plan_row(
    sys: &RiccatiSystem,
    law: PoissonLaw,
    points: &[ProjectiveAngle],
    start: ProjectiveAngle,
    t_esc: f64,
    spacing: f64,
) -> Vec<(usize, f64)> {
    if t_esc <= 0.0 {
        return Vec::new();
    }
    let coarse = flow_angles(sys, start, t_esc, MIN_NODES);
    let travel: f64 = coarse.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let n = MIN_NODES
        .max((16.0 * law.rate() * t_esc).ceil() as usize)
        .max((2.0 * travel / spacing).ceil() as usize)
        .min(MAX_NODES);
    let (taus, weights) = law.simpson_weights(t_esc, n);
    let angles = if n == MIN_NODES {
        coarse
    } else {
        flow_angles(sys, start, t_esc, taus.len() - 1)
    };
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * angles.len());
    for (w, phi) in weights.iter().zip(&angles) {
        let c = *w;
        for (j, iw) in interp_weights(points, *phi) {
            row.push((j, c * iw));
        }
    }
    row.sort_by_key(|e| e.0);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for (j, w) in row {
        match merged.last_mut() {
            Some(last) if last.0 == j => last.1 += w,
            _ => merged.push((j, w)),
        }
    }
    merged
}

/// `M_i T` on the grid points for subsystem `sys` with escape times
/// `escape_times`.
pub fn apply_m(
    values: &[f64],
    sys: &RiccatiSystem,
    escape_times: &[f64],
    law: PoissonLaw,
    points: &[ProjectiveAngle],
) -> Result<Vec<f64>> {
    if values.len() != points.len() {
        return Err(crate::error::dim_err("apply_m", points.len(), values.len()));
    }
    Ok(QuadraturePlan::build(sys, escape_times, law, points)?.apply(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesOptions {
    /// Number of series terms `M^0 g, …, M^{terms−1} g` to sum.
    pub terms: usize,
    /// Stop early once the sup-norm of the latest term falls below this.
    pub tol: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { terms: 21, tol: 0.0 }
    }
}

fn sup_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().chain(b).fold(0.0, |m, x| m.max(x.abs()))
}

/// Partial sums of `Σ_k M^k [g_A; g_B]` on the grid.
///
/// `grid` must carry finite escape times (see [`ChartGrid::with_escape_times`]).
pub fn solve_power_series(sw: &SwitchedSystem, grid: &ChartGrid, opts: &SeriesOptions) -> Result<ChartGrid> {
    sw.require_projective_line("solve_power_series")?;
    if grid.escape_a.len() != grid.len() || grid.escape_b.len() != grid.len() {
        return Err(Error::Numerical(
            "grid has no escape times; build it with ChartGrid::with_escape_times".into(),
        ));
    }
    if opts.terms == 0 {
        return Err(Error::Domain {
            op: "solve_power_series",
            name: "terms",
            value: 0.0,
        });
    }
    let law = sw.law();
    let plan_a = QuadraturePlan::build(sw.sys_a(), &grid.escape_a, law, &grid.points)?;
    let plan_b = QuadraturePlan::build(sw.sys_b(), &grid.escape_b, law, &grid.points)?;
    let g = |ts: &[f64]| ts.iter().map(|&t| law.g_value(t)).collect::<Result<Vec<_>>>();
    let mut term_a = g(&grid.escape_a)?;
    let mut term_b = g(&grid.escape_b)?;
    let mut sum_a = term_a.clone();
    let mut sum_b = term_b.clone();
    let mut norms = vec![sup_norm(&term_a, &term_b)];
    while norms.len() < opts.terms && *norms.last().expect("nonempty") >= opts.tol {
        let next_a = plan_a.apply(&term_b);
        let next_b = plan_b.apply(&term_a);
        term_a = next_a;
        term_b = next_b;
        sum_a.iter_mut().zip(&term_a).for_each(|(s, t)| *s += t);
        sum_b.iter_mut().zip(&term_b).for_each(|(s, t)| *s += t);
        norms.push(sup_norm(&term_a, &term_b));
    }
    let mut out = grid.clone();
    out.mean_a = sum_a;
    out.mean_b = sum_b;
    out.residual = *norms.last().expect("nonempty");
    out.term_norms = norms;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::EscapeOptions;

    #[test]
    fn constant_function_integrates_to_cdf() {
        let sw = SwitchedSystem::rotations(1.0, 1.0, 0.7).unwrap();
        let grid = ChartGrid::with_escape_times(
            &sw,
            ChartGrid::uniform(0.05).unwrap().points,
            &EscapeOptions::default(),
        )
        .unwrap();
        let ones = vec![1.0; grid.len()];
        let out = apply_m(&ones, sw.sys_a(), &grid.escape_a, sw.law(), &grid.points).unwrap();
        for (v, t) in out.iter().zip(&grid.escape_a) {
            assert!((v - sw.law().cdf(*t)).abs() < 1e-9);
        }
        let zeros = apply_m(
            &vec![0.0; grid.len()],
            sw.sys_a(),
            &grid.escape_a,
            sw.law(),
            &grid.points,
        )
        .unwrap();
        assert!(zeros.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_unbounded_escape() {
        let sw = SwitchedSystem::rotations(1.0, 1.0, 1.0).unwrap();
        let grid = ChartGrid::uniform(0.5).unwrap();
        let mut bad = vec![1.0; grid.len()];
        bad[2] = f64::INFINITY;
        assert!(matches!(
            QuadraturePlan::build(sw.sys_a(), &bad, sw.law(), &grid.points),
            Err(Error::UnboundedEscape { .. })
        ));
        assert!(solve_power_series(&sw, &grid, &SeriesOptions::default()).is_err());
    }
}
