use rayon::prelude::*;
use serde::Serialize;

use super::{ChartGrid, SwitchedSystem};
use crate::chart::{line_angle, nearest_net_point, ProjectiveAngle};
use crate::error::{dim_err, Error, Result};
use crate::flow::RiccatiSystem;
use crate::numerics::{expm, Matrix};

/// Finite-rank surrogates `N_A`, `N_B` of the integral operators on a net,
/// with the source terms `g_A`, `g_B` on the same net.
///
/// `N_A[ℓ, m]` collects the switching probability mass `ξ_{A,n}(s_ℓ)` of all
/// time cells `[nh, (n+1)h)` whose left-end state `e^{Anh}.s_ℓ` quantizes to
/// the net point `s_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferMatrices {
    pub na: Matrix,
    pub nb: Matrix,
    pub ga: Vec<f64>,
    pub gb: Vec<f64>,
    pub h: f64,
}

/// Time cell `h = spacing / max(‖A‖, ‖B‖)`: the largest angular speed of
/// either flow crosses at most one grid cell per time cell.
pub fn default_time_step(sw: &SwitchedSystem, grid: &ChartGrid) -> f64 {
    grid.min_spacing() / sw.sys_a().norm().max(sw.sys_b().norm()).max(f64::MIN_POSITIVE)
}

fn transfer_matrix(
    sys: &RiccatiSystem,
    escape_times: &[f64],
    sw: &SwitchedSystem,
    points: &[ProjectiveAngle],
    h: f64,
) -> Result<Matrix> {
    let l = points.len();
    let law = sw.law();
    let step = expm(&sys.a().scale(h));
    let rows: Vec<Vec<(usize, f64)>> = points
        .par_iter()
        .zip(escape_times.par_iter())
        .map(|(p, &t_esc)| {
            let mut row = Vec::new();
            let [mut x, mut y] = p.direction();
            let mut n = 0usize;
            loop {
                let t = n as f64 * h;
                if t >= t_esc {
                    break;
                }
                let xi = law.mass(t, ((n + 1) as f64 * h).min(t_esc));
                let q = nearest_net_point(points, ProjectiveAngle::new(line_angle(x, y)).expect("finite"));
                row.push((q, xi));
                let nx = step[(0, 0)] * x + step[(0, 1)] * y;
                let ny = step[(1, 0)] * x + step[(1, 1)] * y;
                let r = nx.hypot(ny);
                (x, y) = (nx / r, ny / r);
                n += 1;
            }
            row
        })
        .collect();
    let mut m = Matrix::zeros(l, l);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, xi) in row {
            m[(i, j)] += xi;
        }
    }
    Ok(m)
}

/// Builds `N_A`, `N_B`, `g_A`, `g_B` on the points of `grid` with time cell `h`.
pub fn build_transfer_matrices(sw: &SwitchedSystem, grid: &ChartGrid, h: f64) -> Result<TransferMatrices> {
    sw.require_projective_line("build_transfer_matrices")?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain {
            op: "build_transfer_matrices",
            name: "h",
            value: h,
        });
    }
    if grid.is_empty() {
        return Err(dim_err("build_transfer_matrices", "nonempty grid", 0));
    }
    if grid.escape_a.len() != grid.len() || grid.escape_b.len() != grid.len() {
        return Err(Error::Numerical(
            "grid has no escape times; build it with ChartGrid::with_escape_times".into(),
        ));
    }
    for (ts, _) in [(&grid.escape_a, 'A'), (&grid.escape_b, 'B')] {
        if let Some(i) = ts.iter().position(|t| !t.is_finite()) {
            return Err(Error::UnboundedEscape {
                count: ts.iter().filter(|t| !t.is_finite()).count(),
                first: grid.points[i].theta(),
            });
        }
    }
    let law = sw.law();
    let g = |ts: &[f64]| ts.iter().map(|&t| law.g_value(t)).collect::<Result<Vec<_>>>();
    Ok(TransferMatrices {
        na: transfer_matrix(sw.sys_a(), &grid.escape_a, sw, &grid.points, h)?,
        nb: transfer_matrix(sw.sys_b(), &grid.escape_b, sw, &grid.points, h)?,
        ga: g(&grid.escape_a)?,
        gb: g(&grid.escape_b)?,
        h,
    })
}

impl TransferMatrices {
    pub fn len(&self) -> usize {
        self.ga.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ga.is_empty()
    }

    /// `(‖N_A‖_∞, ‖N_B‖_∞)`.
    pub fn row_sum_norms(&self) -> (f64, f64) {
        (self.na.norm_inf(), self.nb.norm_inf())
    }

    /// `Ψ = [I −N_A; −N_B I]`.
    pub fn psi(&self) -> Matrix {
        let l = self.len();
        let mut psi = Matrix::identity(2 * l);
        for i in 0..l {
            for j in 0..l {
                psi[(i, l + j)] = -self.na[(i, j)];
                psi[(l + i, j)] = -self.nb[(i, j)];
            }
        }
        psi
    }

    /// Solves `Ψ [T_A; T_B] = [g_A; g_B]`.
    pub fn solve(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let (ra, rb) = self.row_sum_norms();
        if ra >= 1.0 || rb >= 1.0 {
            return Err(Error::Numerical(format!(
                "transfer matrix row sums ({ra}, {rb}) are not below 1"
            )));
        }
        let rhs: Vec<f64> = self.ga.iter().chain(&self.gb).copied().collect();
        let x = self.psi().lu()?.solve_vec(&rhs)?;
        let (a, b) = x.split_at(self.len());
        Ok((a.to_vec(), b.to_vec()))
    }
}
