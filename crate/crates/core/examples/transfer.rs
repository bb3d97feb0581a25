//! Transfer-matrix discretization of the mean escape equations.
//!
//! The integral operators become substochastic matrices on a net of angles;
//! one linear solve replaces the series. Compared here against the series.

use riccati_escape::mean_escape::default_time_step;
use riccati_escape::{
    build_transfer_matrices, solve_power_series, ChartGrid, EscapeOptions, SeriesOptions, SwitchedSystem,
};

fn main() -> riccati_escape::Result<()> {
    let sw = SwitchedSystem::rotations(1.0, 1.0, 1.0)?;
    for spacing in [0.05, 0.02, 0.01] {
        let grid = ChartGrid::with_escape_times(
            &sw,
            ChartGrid::uniform(spacing)?.points,
            &EscapeOptions::default(),
        )?;
        let h = default_time_step(&sw, &grid);
        let tm = build_transfer_matrices(&sw, &grid, h)?;
        let (ta, _) = tm.solve()?;
        let series = solve_power_series(
            &sw,
            &grid,
            &SeriesOptions {
                terms: 200,
                tol: 1e-12,
            },
        )?;
        let gap = ta
            .iter()
            .zip(&series.mean_a)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let (ra, rb) = tm.row_sum_norms();
        println!(
            "spacing {spacing}: {} points, h = {h:.4}, row sums ({ra:.4}, {rb:.4}), sup |T_A - series| = {gap:.4}",
            grid.len()
        );
    }
    Ok(())
}
