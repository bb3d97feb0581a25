//! Matrix escape times against the rotation law `(π/2 − θ)/ω`.
//!
//! `A = [[0, −ω], [ω, 0]]` turns the line at angle `θ` at speed `ω`; it leaves
//! the chart when it becomes vertical. Also runs a 3×3 system with a 2×1 state
//! to show the general matrix case.

use std::f64::consts::FRAC_PI_2;

use riccati_escape::{escape_time, flow, EscapeOptions, FlowOutcome, Matrix, RiccatiSystem};

fn main() -> riccati_escape::Result<()> {
    let opts = EscapeOptions::default();
    println!("{:>6} {:>8} {:>14} {:>10}", "omega", "theta", "escape", "rel err");
    for omega in [1.0, 10.0, 100.0] {
        let sys = RiccatiSystem::rotation(omega)?;
        for theta in [-1.2, 0.0, 0.9, 1.5] {
            let want = (FRAC_PI_2 - theta) / omega;
            let got = escape_time(&sys, &Matrix::scalar(f64::tan(theta))?, &opts)?.time_or_inf();
            println!(
                "{omega:>6} {theta:>8.2} {got:>14.10} {:>10.1e}",
                (got - want).abs() / want
            );
        }
    }

    let sys = RiccatiSystem::new(
        Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, 0.0, 0.5]])?,
        1,
    )?;
    let y0 = Matrix::column(&[0.2, -0.1])?;
    let res = escape_time(&sys, &y0, &opts)?;
    println!("\n3x3 system, k = 1: {:?}", res.outcome);
    if let Some(t) = res.time() {
        if let FlowOutcome::State(y) = flow(&sys, &y0, 0.9 * t)? {
            println!("state at 90% of the escape time: {:?}", y.as_slice());
        }
    }
    Ok(())
}
