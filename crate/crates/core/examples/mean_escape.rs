//! Mean escape time under Poisson switching between two rotations.
//!
//! Mode A turns counter-clockwise at speed `ω`, mode B clockwise at speed `γ`,
//! and the mode flips at rate `λ`. The coupled integral equations are solved
//! by their Neumann series on a uniform grid of angles.

use riccati_escape::{solve_power_series, ChartGrid, EscapeOptions, SeriesOptions, SwitchedSystem};

fn main() -> riccati_escape::Result<()> {
    for omega in [1.0, 10.0, 100.0] {
        let sw = SwitchedSystem::rotations(omega, 1.0, 1.0)?;
        let grid =
            ChartGrid::with_escape_times(&sw, ChartGrid::uniform(0.01)?.points, &EscapeOptions::default())?;
        let solved = solve_power_series(
            &sw,
            &grid,
            &SeriesOptions {
                terms: 200,
                tol: 1e-12,
            },
        )?;
        println!(
            "omega = {omega:>5}: {} terms, F(t0) = {:.4}, last term {:.1e}",
            solved.term_norms.len(),
            sw.law().cdf(grid.t0()),
            solved.residual
        );
        for theta in [-1.2, -0.6, 0.0, 0.6, 1.2] {
            println!(
                "    theta = {theta:+.1}: T_A = {:.5}, T_B = {:.5}",
                solved.mean_a_at(theta),
                solved.mean_b_at(theta)
            );
        }
    }
    Ok(())
}
